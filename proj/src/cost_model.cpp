#include "lastmile/cost_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lastmile/errors.hpp"

namespace lastmile::cost {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

void require(bool ok, const char* msg) {
    if (!ok) throw std::domain_error(msg);
}

// k coefficient of the combined DT swath as used by the per-point cost:
// w = k * sqrt(3/Q).
double k_dt(int n, double cost_ratio) {
    const double nn = static_cast<double>(n);
    return std::sqrt(nn + 1.0) * (1.0 + std::sqrt(2.0 * nn) * cost_ratio) /
           (1.0 + 2.0 * nn * cost_ratio);
}

}  // namespace

void CostParams::validate() const {
    require(area > 0.0, "zone area must be positive");
    require(truck_unit_cost > 0.0, "truck unit cost must be positive");
    require(drone_unit_cost > 0.0, "drone unit cost must be positive");
    require(truck_stop_time > 0.0, "truck stop time must be positive");
    require(truck_stop_cost >= 0.0, "truck stop cost must be non-negative");
    require(drone_stop_cost >= 0.0, "drone stop cost must be non-negative");
    require(route_time > 0.0, "route time must be positive");
    require(linehaul_speed > 0.0 && truck_speed > 0.0 && drone_speed > 0.0,
            "speeds must be positive");
    require(circuity > 0.0 && linehaul_adjust > 0.0, "linehaul factors must be positive");
    require(wait_value >= 0.0, "wait value must be non-negative");
    require(drones_per_truck >= 1, "drones per truck must be at least 1");
}

FleetMode FleetMode::truck_only() { return FleetMode{FleetKind::TruckOnly, 0, {}}; }

FleetMode FleetMode::drone_assisted(int n) {
    FleetMode m{FleetKind::DroneAssisted, n, {}};
    m.validate();
    return m;
}

FleetMode FleetMode::hybrid(std::vector<std::pair<FleetMode, double>> mix) {
    FleetMode m{FleetKind::Hybrid, 0, std::move(mix)};
    m.validate();
    return m;
}

FleetMode FleetMode::default_hybrid() {
    return hybrid({{truck_only(), 0.25},
                   {drone_assisted(2), 0.25},
                   {drone_assisted(5), 0.25},
                   {drone_assisted(10), 0.25}});
}

void FleetMode::validate() const {
    switch (kind) {
        case FleetKind::TruckOnly:
            return;
        case FleetKind::DroneAssisted:
            require(drones >= 1, "drone-assisted mode requires n >= 1");
            return;
        case FleetKind::Hybrid: {
            require(!mix.empty(), "hybrid mix must not be empty");
            double sum = 0.0;
            for (const auto& [mode, eps] : mix) {
                require(mode.kind != FleetKind::Hybrid, "hybrid mix entries cannot nest");
                require(eps > 0.0 && eps <= 1.0, "mix proportion must lie in (0, 1]");
                mode.validate();
                sum += eps;
            }
            require(std::abs(sum - 1.0) <= 1e-12, "mix proportions must sum to 1");
            return;
        }
    }
}

std::string FleetMode::label() const {
    switch (kind) {
        case FleetKind::TruckOnly: return "TO";
        case FleetKind::DroneAssisted: return "DT" + std::to_string(drones);
        case FleetKind::Hybrid: return "HD";
    }
    return "?";
}

double OmegaCoeffs::eval(double q) const { return alpha * q + beta * std::sqrt(q); }

void DensityPattern::validate() const {
    require(q0 > 0.0, "central density must be positive");
    require(omega > 0.0, "spread parameter must be positive");
    require(radius > 0.0, "zone radius must be positive");
}

double DensityPattern::at(double x, double y) const {
    const double r2 = x * x + y * y;
    switch (kind) {
        case DensityKind::Uniform: return q0;
        case DensityKind::CenterPeaked: return q0 * std::exp(-r2 / (2.0 * omega * omega));
        case DensityKind::EdgePeaked: return q0 * std::exp(r2 / (2.0 * omega * omega));
    }
    return q0;
}

double linehaul_distance(const CostParams& p) {
    require(p.area > 0.0, "zone area must be positive");
    return 2.0 * p.circuity * p.linehaul_adjust * std::sqrt(p.area / std::numbers::pi);
}

double optimal_swath(const FleetMode& mode, double q, const CostParams& p,
                     DtSwath dt_variant) {
    require(q > 0.0, "demand density must be positive");
    switch (mode.kind) {
        case FleetKind::TruckOnly:
            return std::sqrt(3.0 / q);
        case FleetKind::DroneAssisted: {
            const double n = mode.drones;
            require(mode.drones >= 1, "drone-assisted mode requires n >= 1");
            if (dt_variant == DtSwath::DroneDistance)
                return std::sqrt(3.0 * (n + 1.0) / (2.0 * q));
            const double ratio =
                (p.truck_unit_cost + std::sqrt(2.0 * n) * p.drone_unit_cost) /
                (p.truck_unit_cost + 2.0 * n * p.drone_unit_cost);
            return std::sqrt(n + 1.0) * std::sqrt(3.0 / q * ratio);
        }
        case FleetKind::Hybrid:
            throw std::domain_error("swath widths are defined for component modes, not HD");
    }
    throw std::domain_error("unknown fleet mode");
}

namespace {

double per_point_truck_only(double q, const CostParams& p) {
    const double L = linehaul_distance(p);
    if (p.linehaul_speed * p.route_time <= L)
        throw std::domain_error("route time does not admit the linehaul leg");
    const double d_to = 2.0 / std::sqrt(3.0 * q);
    const double m_to = (p.route_time - L / p.linehaul_speed) /
                        (d_to / p.truck_speed + p.truck_stop_time);
    return p.truck_unit_cost * (d_to + L / m_to) + p.truck_stop_cost;
}

double per_point_drone_assisted(double q, int drones, const CostParams& p) {
    if (drones < 1) throw std::domain_error("drone-assisted mode requires n >= 1");
    const double L = linehaul_distance(p);
    if (p.linehaul_speed * p.route_time <= L)
        throw std::domain_error("route time does not admit the linehaul leg");

    const double n = drones;
    const double r = p.drone_unit_cost / p.truck_unit_cost;
    const double k = k_dt(drones, r);
    const double gk = k / (n + 1.0) + 1.0 / k;
    const double sq3q = std::sqrt(3.0 * q);

    // truck and drone travel at the k-swath
    const double d_truck = gk / sq3q;
    const double drone_root = std::sqrt(k * k + (n + 1.0) * (n + 1.0) / (4.0 * k * k));
    const double d_drone = (2.0 * n / (n + 1.0)) * drone_root / sq3q;

    // points per route at the combined optimal swath
    const double w7 = optimal_swath(FleetMode::drone_assisted(drones), q, p, DtSwath::Combined);
    const double d_truck7 = w7 / (3.0 * (n + 1.0)) + 1.0 / (q * w7);
    const double m_dt = (p.route_time - L / p.linehaul_speed) /
                        (d_truck7 / p.truck_speed + p.truck_stop_time / (n + 1.0));

    // synchronization time, monetized at the waiting rate
    const double sync_root =
        std::sqrt(k * k + (n + 1.0) * (n + 1.0) / 4.0 * (n + 1.0) / (n * k * k));
    const double sync = (p.wait_value / sq3q) *
                        ((2.0 * n / (n + 1.0)) * sync_root / p.drone_speed -
                         gk * (n + 1.0) / p.truck_speed);

    return p.truck_unit_cost * (d_truck + L / m_dt) + p.drone_unit_cost * d_drone +
           n / (n + 1.0) * p.drone_stop_cost + p.truck_stop_cost + sync;
}

}  // namespace

double per_point_cost(const FleetMode& mode, double q, const CostParams& p) {
    require(q > 0.0, "demand density must be positive");
    switch (mode.kind) {
        case FleetKind::TruckOnly: return per_point_truck_only(q, p);
        case FleetKind::DroneAssisted: return per_point_drone_assisted(q, mode.drones, p);
        case FleetKind::Hybrid:
            throw std::domain_error("per-point cost is defined for component modes, not HD");
    }
    throw std::domain_error("unknown fleet mode");
}

double total_cost(const FleetMode& mode, double q, const CostParams& p) {
    require(q > 0.0, "demand density must be positive");
    if (mode.kind == FleetKind::Hybrid) {
        if (mode.mix.empty()) throw std::domain_error("hybrid mix must not be empty");
        double sum = 0.0;
        for (const auto& [component, eps] : mode.mix)
            sum += eps * total_cost(component, q, p);
        return sum;
    }
    return per_point_cost(mode, q, p) * p.area * q;
}

double region_total_cost(const FleetMode& mode, double q, const CostParams& p,
                         double area_ratio) {
    require(area_ratio >= 1.0, "area ratio must be at least 1");
    return area_ratio * total_cost(mode, q, p);
}

namespace {

template <typename F>
OmegaCoeffs fit_and_validate(F&& f, const char* what) {
    // exact two-point fit: f(1) = a + b, f(4) = 4a + 2b
    const double f1 = f(1.0);
    const double f4 = f(4.0);
    OmegaCoeffs c;
    c.alpha = (f4 - 2.0 * f1) / 2.0;
    c.beta = f1 - c.alpha;
    for (int i = 0; i < 20; ++i) {
        const double q = 1.0 + (200.0 - 1.0) * i / 19.0;
        const double direct = f(q);
        const double fitted = c.eval(q);
        const double scale = std::max({1.0, std::abs(direct), std::abs(fitted)});
        if (std::abs(fitted - direct) / scale >= 1e-9)
            throw FunctionalFormError(std::string("fitted coefficients do not reproduce ") +
                                      what + " on the validation grid");
    }
    return c;
}

}  // namespace

OmegaCoeffs mode_coeffs(const FleetMode& mode, const CostParams& p) {
    mode.validate();
    return fit_and_validate([&](double q) { return total_cost(mode, q, p); },
                            "the mode total cost");
}

OmegaCoeffs omega_coeffs(const FleetMode& first, const FleetMode& second,
                         const CostParams& p) {
    first.validate();
    second.validate();
    return fit_and_validate(
        [&](double q) { return total_cost(first, q, p) - total_cost(second, q, p); },
        "the cost difference");
}

double break_even(const OmegaCoeffs& c) {
    if (!(c.alpha * c.beta < 0.0))
        throw std::domain_error("no positive crossover: coefficients must have opposite signs");
    const double root = -c.beta / c.alpha;
    return root * root;
}

namespace {

// Adaptive Simpson on [a, b] with absolute tolerance.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double fa, double fm, double fb,
                        double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(F&& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, 40);
}

}  // namespace

double average_density(const DensityPattern& pattern) {
    pattern.validate();
    const double R = pattern.radius;
    const double disc_area = std::numbers::pi * R * R;
    const double tol = 1e-6 * pattern.q0 * disc_area;  // tolerance on the integral
    // nested adaptive quadrature over the disc in polar coordinates
    auto ring = [&](double r) {
        auto along = [&](double th) {
            return pattern.at(r * std::cos(th), r * std::sin(th));
        };
        return r * integrate(along, 0.0, 2.0 * std::numbers::pi, tol / (R * 10.0));
    };
    const double mass = integrate(ring, 0.0, R, tol);
    return mass / disc_area;
}

PrintedCoefficients printed_coefficients(const CostParams& p) {
    p.validate();
    const double L = linehaul_distance(p);
    const double n = p.drones_per_truck;
    const double A = p.area;
    const double ct = p.truck_unit_cost, cd = p.drone_unit_cost;
    const double denom = p.linehaul_speed * p.route_time - L;
    const double k = k_dt(p.drones_per_truck, cd / ct);
    const double gk = k / (n + 1.0) + 1.0 / k;
    const double root = std::sqrt(k * k + (n + 1.0) * (n + 1.0) / (4.0 * k * k));
    const double lh_share = L * p.linehaul_speed / (p.drone_speed * denom);

    PrintedCoefficients out;
    out.alpha2 = (L * ct * p.truck_stop_time * p.linehaul_speed / (denom * (n + 1.0)) +
                  n / (n + 1.0) * p.drone_stop_cost + p.truck_stop_cost) * A;
    out.beta2 = ((1.0 + lh_share - (n + 1.0) * p.wait_value / p.truck_speed) * gk +
                 (2.0 * n * cd / (ct * (n + 1.0)) + 2.0 * p.wait_value / p.drone_speed) * root) *
                ct / kSqrt3 * A;
    out.alpha3 = n / (n + 1.0) *
                 (L * p.truck_stop_time * p.linehaul_speed * ct / denom - p.drone_stop_cost) * A;
    out.beta3 = ((1.0 + lh_share) * (2.0 - gk) +
                 (n + 1.0) * p.wait_value / p.truck_speed * gk -
                 (2.0 * n * cd / (ct * (n + 1.0)) + 2.0 * p.wait_value / p.drone_speed) * root) *
                ct / kSqrt3 * A;
    return out;
}

}  // namespace lastmile::cost
