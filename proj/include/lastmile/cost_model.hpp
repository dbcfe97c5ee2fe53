#pragma once

#include <string>
#include <utility>
#include <vector>

namespace lastmile::cost {

// Physical and economic constants of the delivery zone. Defaults are the
// baseline-calibrated set shipped with the project (see configs/baseline.cfg);
// four of them (truck/drone unit cost, stop time, wait value) come from the
// calibration, the rest are fixed inputs.
struct CostParams {
    double area = 1250.0;             // A: service zone (mi^2)
    double truck_unit_cost = 1.0;     // Ct: truck operating cost ($/mi)
    double drone_unit_cost = 0.41716123434043617;  // Cd: drone operating cost ($/mi)
    double truck_stop_time = 0.054284231456216525; // dt: stop time per truck delivery (hr)
    double truck_stop_cost = 0.2;     // St: fixed truck stop cost ($)
    double drone_stop_cost = 0.0;     // Sd: marginal drone stop cost ($)
    double route_time = 8.0;          // T: route time (hr)
    double linehaul_speed = 60.0;     // Vl (mi/hr)
    double truck_speed = 30.0;        // Vt: truck tour speed (mi/hr)
    double drone_speed = 30.0;        // Vd: drone tour speed (mi/hr)
    double circuity = 2.0 / 3.0;      // phi
    double linehaul_adjust = 1.2;     // nu
    double wait_value = 0.0;          // cw: value of waiting time ($/hr)
    int drones_per_truck = 10;        // n

    void validate() const;  // throws std::domain_error
};

enum class FleetKind { TruckOnly, DroneAssisted, Hybrid };

// TO, DT(n), or an HD mixture of the first two in fixed proportions.
struct FleetMode {
    FleetKind kind = FleetKind::TruckOnly;
    int drones = 0;                                   // DT only
    std::vector<std::pair<FleetMode, double>> mix;    // HD only

    static FleetMode truck_only();
    static FleetMode drone_assisted(int n);
    static FleetMode hybrid(std::vector<std::pair<FleetMode, double>> mix);
    // Equal-quarters default over {TO, DT(2), DT(5), DT(10)}.
    static FleetMode default_hybrid();

    void validate() const;
    std::string label() const;
};

// Coefficients of a cost (or cost-difference) function alpha*Q + beta*sqrt(Q).
struct OmegaCoeffs {
    double alpha = 0.0;
    double beta = 0.0;
    double eval(double q) const;
};

enum class DensityKind { Uniform, CenterPeaked, EdgePeaked };

struct DensityPattern {
    DensityKind kind = DensityKind::Uniform;
    double q0 = 50.0;      // central density (pkg/mi^2/day)
    double omega = 10.0;   // spread (mi)
    double radius = 20.0;  // zone radius (mi)

    void validate() const;
    double at(double x, double y) const;
};

// Which swath closed form a DT evaluation refers to.
enum class DtSwath { DroneDistance, Combined };

double linehaul_distance(const CostParams& p);
double optimal_swath(const FleetMode& mode, double q, const CostParams& p,
                     DtSwath dt_variant = DtSwath::Combined);
double per_point_cost(const FleetMode& mode, double q, const CostParams& p);
double total_cost(const FleetMode& mode, double q, const CostParams& p);   // $/day
double region_total_cost(const FleetMode& mode, double q, const CostParams& p,
                         double area_ratio);

// Exact two-point fit (Q=1 and Q=4) of total_cost(first) - total_cost(second),
// validated against direct evaluation on a 20-point grid in [1, 200].
OmegaCoeffs omega_coeffs(const FleetMode& first, const FleetMode& second,
                         const CostParams& p);
// Same fit for a single mode's total cost.
OmegaCoeffs mode_coeffs(const FleetMode& mode, const CostParams& p);

// Positive root of alpha*Q + beta*sqrt(Q) = 0; requires opposite signs.
double break_even(const OmegaCoeffs& coeffs);

// Mean of the density field over the disc, adaptive quadrature to 1e-6*q0.
double average_density(const DensityPattern& pattern);

// Literature closed forms of the DT and saving coefficients, kept exactly as
// published (including their suspect speed symbols). Logged as a cross-check
// against the fitted coefficients; never used in computations.
struct PrintedCoefficients {
    double alpha2, beta2;  // DT total-cost coefficients
    double alpha3, beta3;  // saving-function coefficients
};
PrintedCoefficients printed_coefficients(const CostParams& p);

}  // namespace lastmile::cost
