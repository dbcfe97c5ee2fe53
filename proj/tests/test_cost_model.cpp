#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "lastmile/cost_model.hpp"
#include "lastmile/errors.hpp"

using namespace lastmile;
using cost::CostParams;
using cost::DensityKind;
using cost::DensityPattern;
using cost::DtSwath;
using cost::FleetMode;

namespace {

// brute-force argmin over w in [0.01, 5], step 1e-4
template <typename F>
double grid_argmin(F&& objective) {
    double best_w = 0.01, best_v = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 49900; ++i) {
        const double w = 0.01 + 1e-4 * i;
        const double v = objective(w);
        if (v < best_v) {
            best_v = v;
            best_w = w;
        }
    }
    return best_w;
}

double truck_distance(double w, double q) { return w / 3.0 + 1.0 / (q * w); }

double drone_distance(double w, double q, int n) {
    return 2.0 * n / (n + 1.0) *
           std::sqrt(w * w / 9.0 + (n + 1.0) * (n + 1.0) / (4.0 * q * q * w * w));
}

// cost-weighted per-point distance with the drone leg linearized, the form
// whose exact minimizer is the combined closed-form swath
double combined_objective(double w, double q, int n, const CostParams& p) {
    return w * (p.truck_unit_cost + 2.0 * n * p.drone_unit_cost) / (3.0 * (n + 1.0)) +
           (p.truck_unit_cost + std::sqrt(2.0 * n) * p.drone_unit_cost) / (q * w);
}

}  // namespace

TEST_CASE("linehaul distance") {
    CostParams p;
    CHECK(std::abs(cost::linehaul_distance(p) - 31.915) <= 1e-3);

    CostParams unit;
    unit.area = std::numbers::pi;
    unit.circuity = 0.5;
    unit.linehaul_adjust = 1.0;
    CHECK(std::abs(cost::linehaul_distance(unit) - 1.0) <= 1e-12);

    CostParams big = p;
    big.area = 4.0 * p.area;
    CHECK(cost::linehaul_distance(big) == 2.0 * cost::linehaul_distance(p));

    CostParams bad = p;
    bad.area = -1.0;
    CHECK_THROWS_AS(cost::linehaul_distance(bad), std::domain_error);
}

TEST_CASE("optimal swath closed forms and grid-search oracle") {
    CostParams p;
    const FleetMode to = FleetMode::truck_only();
    const FleetMode dt = FleetMode::drone_assisted(10);

    CHECK(std::abs(cost::optimal_swath(to, 50.0, p) - 0.24495) <= 1e-5);
    CHECK(std::abs(cost::optimal_swath(to, 3.0, p) - 1.0) <= 1e-12);

    for (double q : {5.0, 50.0, 150.0}) {
        CAPTURE(q);
        const double w_to = cost::optimal_swath(to, q, p);
        CHECK(std::abs(w_to - grid_argmin([&](double w) { return truck_distance(w, q); })) <=
              1e-4 + 1e-12);
        const double w_drone = cost::optimal_swath(dt, q, p, DtSwath::DroneDistance);
        CHECK(std::abs(w_drone -
                       grid_argmin([&](double w) { return drone_distance(w, q, 10); })) <=
              1e-4 + 1e-12);
        const double w_comb = cost::optimal_swath(dt, q, p, DtSwath::Combined);
        CHECK(std::abs(w_comb - grid_argmin([&](double w) {
                  return combined_objective(w, q, 10, p);
              })) <= 1e-4 + 1e-12);
    }

    CHECK_THROWS_AS(cost::optimal_swath(to, 0.0, p), std::domain_error);
    CHECK_THROWS_AS(cost::optimal_swath(FleetMode::default_hybrid(), 50.0, p),
                    std::domain_error);
}

TEST_CASE("per-point cost matches a straight-line assembly of the formulas") {
    CostParams p;
    const double q = 50.0;

    // truck-only: assemble L, w*, distance, points-per-route independently
    const double L = 2.0 * p.circuity * p.linehaul_adjust * std::sqrt(p.area / std::numbers::pi);
    const double d_to = 2.0 / std::sqrt(3.0 * q);
    const double m_to =
        (p.route_time - L / p.linehaul_speed) / (d_to / p.truck_speed + p.truck_stop_time);
    const double expected_to = p.truck_unit_cost * (d_to + L / m_to) + p.truck_stop_cost;
    CHECK(cost::per_point_cost(FleetMode::truck_only(), q, p) ==
          doctest::Approx(expected_to).epsilon(1e-12));

    // drone-assisted, n = 10
    const int n = 10;
    const double r = p.drone_unit_cost / p.truck_unit_cost;
    const double k = std::sqrt(n + 1.0) * (1.0 + std::sqrt(20.0) * r) / (1.0 + 20.0 * r);
    const double d_truck = (k / (n + 1.0) + 1.0 / k) / std::sqrt(3.0 * q);
    const double d_drone = (2.0 * n / (n + 1.0)) *
                           std::sqrt(k * k + std::pow((n + 1.0) / (2.0 * k), 2)) /
                           std::sqrt(3.0 * q);
    const double w7 = std::sqrt(n + 1.0) *
                      std::sqrt(3.0 / q * (1.0 + std::sqrt(20.0) * r) / (1.0 + 20.0 * r));
    const double d7 = w7 / (3.0 * (n + 1.0)) + 1.0 / (q * w7);
    const double m_dt = (p.route_time - L / p.linehaul_speed) /
                        (d7 / p.truck_speed + p.truck_stop_time / (n + 1.0));
    const double sync =
        p.wait_value / std::sqrt(3.0 * q) *
        ((2.0 * n / (n + 1.0)) *
             std::sqrt(k * k + std::pow((n + 1.0) / 2.0, 2) * (n + 1.0) / (n * k * k)) /
             p.drone_speed -
         (k / (n + 1.0) + 1.0 / k) * (n + 1.0) / p.truck_speed);
    const double expected_dt = p.truck_unit_cost * (d_truck + L / m_dt) +
                               p.drone_unit_cost * d_drone +
                               n / (n + 1.0) * p.drone_stop_cost + p.truck_stop_cost + sync;
    CHECK(cost::per_point_cost(FleetMode::drone_assisted(10), q, p) ==
          doctest::Approx(expected_dt).epsilon(1e-12));

    // same check with a nonzero waiting value so the sync term is exercised
    CostParams pw = p;
    pw.wait_value = 12.0;
    const double sync_w =
        pw.wait_value / std::sqrt(3.0 * q) *
        ((2.0 * n / (n + 1.0)) *
             std::sqrt(k * k + std::pow((n + 1.0) / 2.0, 2) * (n + 1.0) / (n * k * k)) /
             pw.drone_speed -
         (k / (n + 1.0) + 1.0 / k) * (n + 1.0) / pw.truck_speed);
    CHECK(cost::per_point_cost(FleetMode::drone_assisted(10), q, pw) ==
          doctest::Approx(expected_dt - sync + sync_w).epsilon(1e-12));
}

TEST_CASE("per-point cost limits and error paths") {
    // local-travel limit: no linehaul, no stop time, no stop cost
    CostParams p;
    p.circuity = 1e-30;
    p.truck_stop_time = 1e-30;
    p.truck_stop_cost = 0.0;
    const double q = 1e9;
    const double expected = p.truck_unit_cost * 2.0 / std::sqrt(3.0 * q);
    CHECK(cost::per_point_cost(FleetMode::truck_only(), q, p) ==
          doctest::Approx(expected).epsilon(1e-12));

    CostParams infeasible;
    infeasible.area = 1e6;  // linehaul exceeds what the route time allows
    CHECK_THROWS_AS(cost::per_point_cost(FleetMode::truck_only(), 50.0, infeasible),
                    std::domain_error);
    CHECK_THROWS_AS(FleetMode::drone_assisted(0), std::domain_error);
    CHECK_THROWS_AS(cost::per_point_cost(FleetMode::default_hybrid(), 50.0, CostParams{}),
                    std::domain_error);
}

TEST_CASE("total cost identities") {
    CostParams p;
    const FleetMode to = FleetMode::truck_only();

    const FleetMode singleton = FleetMode::hybrid({{to, 1.0}});
    CHECK(cost::total_cost(singleton, 50.0, p) == cost::total_cost(to, 50.0, p));

    CHECK(cost::total_cost(to, 50.0, p) ==
          cost::per_point_cost(to, 50.0, p) * p.area * 50.0);

    // near the crossover the two fleets cost the same to within half a percent
    const double c_to = cost::total_cost(to, 70.2, p);
    const double c_dt = cost::total_cost(FleetMode::drone_assisted(10), 70.2, p);
    CHECK(std::abs(c_dt - c_to) / c_to < 0.005);

    FleetMode empty;
    empty.kind = cost::FleetKind::Hybrid;
    CHECK_THROWS_AS(cost::total_cost(empty, 50.0, p), std::domain_error);
}

TEST_CASE("coefficient fit reproduces direct evaluation") {
    CostParams p;
    const std::vector<FleetMode> modes{FleetMode::truck_only(), FleetMode::drone_assisted(2),
                                       FleetMode::drone_assisted(10),
                                       FleetMode::default_hybrid()};
    for (const FleetMode& mode : modes) {
        CAPTURE(mode.label());
        const cost::OmegaCoeffs c = cost::mode_coeffs(mode, p);
        for (int i = 0; i < 50; ++i) {
            const double q = 1.0 + (200.0 - 1.0) * i / 49.0;
            const double direct = cost::total_cost(mode, q, p);
            CHECK(std::abs(c.eval(q) - direct) / std::abs(direct) < 1e-9);
        }
    }
}

TEST_CASE("saving coefficients and break-even") {
    CostParams p;
    const FleetMode to = FleetMode::truck_only();
    const FleetMode dt = FleetMode::drone_assisted(10);

    const cost::OmegaCoeffs same = cost::omega_coeffs(to, to, p);
    CHECK(same.alpha == 0.0);
    CHECK(same.beta == 0.0);

    const cost::OmegaCoeffs omega = cost::omega_coeffs(to, dt, p);
    CHECK(std::abs(cost::break_even(omega) - 70.2) <= 0.5);

    // saving function equals the direct cost difference
    for (double q : {10.0, 50.0, 70.0, 120.0}) {
        const double direct = cost::total_cost(to, q, p) - cost::total_cost(dt, q, p);
        CHECK(omega.eval(q) == doctest::Approx(direct).epsilon(1e-9));
    }

    // sign changes exactly once on a dense grid
    int sign_changes = 0;
    double prev = omega.eval(0.5);
    for (int i = 1; i <= 2000; ++i) {
        const double q = 0.5 + 0.25 * i;
        const double v = omega.eval(q);
        if ((prev < 0.0 && v >= 0.0) || (prev > 0.0 && v <= 0.0)) ++sign_changes;
        prev = v;
    }
    CHECK(sign_changes == 1);

    CHECK(std::abs(cost::break_even({-1.0, 2.0}) - 4.0) <= 1e-12);
    CHECK_THROWS_AS(cost::break_even({1.0, 1.0}), std::domain_error);
}

TEST_CASE("break-even is non-decreasing in the number of drones") {
    CostParams p;
    const FleetMode to = FleetMode::truck_only();
    double prev = 0.0;
    for (int n : {1, 2, 5, 10, 15}) {
        CAPTURE(n);
        const cost::OmegaCoeffs omega = cost::omega_coeffs(to, FleetMode::drone_assisted(n), p);
        // a mode that saves at every density has its crossover at zero
        const double be = omega.alpha > 0.0 && omega.beta > 0.0 ? 0.0 : cost::break_even(omega);
        CHECK(be >= prev);
        prev = be;
    }
}

TEST_CASE("hybrid cost is sandwiched by its components") {
    CostParams p;
    const FleetMode hd = FleetMode::default_hybrid();
    for (int i = 0; i < 40; ++i) {
        const double q = 1.0 + i * 5.0;
        const double c_hd = cost::total_cost(hd, q, p);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& [mode, eps] : hd.mix) {
            const double c = cost::total_cost(mode, q, p);
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        CHECK(c_hd >= lo - 1e-9 * hi);
        CHECK(c_hd <= hi + 1e-9 * hi);
    }
}

TEST_CASE("average density over the zone") {
    DensityPattern uniform{DensityKind::Uniform, 50.0, 10.0, 20.0};
    CHECK(cost::average_density(uniform) == doctest::Approx(50.0).epsilon(1e-9));

    DensityPattern flat{DensityKind::CenterPeaked, 50.0, 1e6, 20.0};
    CHECK(std::abs(cost::average_density(flat) - 50.0) <= 1e-3);

    // closed form of the radial integral as a second, independent reference
    DensityPattern center{DensityKind::CenterPeaked, 50.0, 10.0, 20.0};
    const double w2 = center.omega * center.omega, r2 = center.radius * center.radius;
    const double closed_center =
        2.0 * center.q0 * w2 / r2 * (1.0 - std::exp(-r2 / (2.0 * w2)));
    const double quad_center = cost::average_density(center);
    CHECK(quad_center == doctest::Approx(closed_center).epsilon(1e-7));

    DensityPattern edge{DensityKind::EdgePeaked, 50.0, 10.0, 20.0};
    const double closed_edge = 2.0 * edge.q0 * w2 / r2 * (std::exp(r2 / (2.0 * w2)) - 1.0);
    CHECK(cost::average_density(edge) == doctest::Approx(closed_edge).epsilon(1e-7));

    // Monte Carlo oracle: uniform samples over the disc, agreement within 3
    // standard errors
    std::mt19937_64 eng(20240501ULL);
    auto canon = [&] { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
    const int samples = 10'000'000;
    double sum = 0.0, sumsq = 0.0;
    int kept = 0;
    while (kept < samples) {
        const double x = (2.0 * canon() - 1.0) * center.radius;
        const double y = (2.0 * canon() - 1.0) * center.radius;
        if (x * x + y * y > r2) continue;
        const double v = center.at(x, y);
        sum += v;
        sumsq += v * v;
        ++kept;
    }
    const double mc_mean = sum / samples;
    const double mc_sd = std::sqrt((sumsq - samples * mc_mean * mc_mean) / (samples - 1));
    const double se = mc_sd / std::sqrt(static_cast<double>(samples));
    CHECK(std::abs(quad_center - mc_mean) < 3.0 * se);

    DensityPattern bad = uniform;
    bad.q0 = -1.0;
    CHECK_THROWS_AS(cost::average_density(bad), std::domain_error);
}

TEST_CASE("region total cost") {
    CostParams p;
    const FleetMode to = FleetMode::truck_only();
    CHECK(cost::region_total_cost(to, 50.0, p, 1.0) == cost::total_cost(to, 50.0, p));
    CHECK(cost::region_total_cost(to, 50.0, p, 5.0) == 5.0 * cost::total_cost(to, 50.0, p));

    // whole-region case: five zones tiling 2431 sq mi
    CostParams mdc = p;
    mdc.area = 2431.0 / 5.0;
    CHECK(cost::region_total_cost(to, 50.0, mdc, 5.0) ==
          doctest::Approx(5.0 * cost::total_cost(to, 50.0, mdc)).epsilon(1e-15));

    CHECK_THROWS_AS(cost::region_total_cost(to, 50.0, p, 0.5), std::domain_error);
}

TEST_CASE("printed closed forms logged against the fitted coefficients") {
    CostParams p;
    const cost::PrintedCoefficients printed = cost::printed_coefficients(p);
    const cost::OmegaCoeffs dt = cost::mode_coeffs(FleetMode::drone_assisted(10), p);
    const cost::OmegaCoeffs omega =
        cost::omega_coeffs(FleetMode::truck_only(), FleetMode::drone_assisted(10), p);

    // the constant-coefficient columns agree exactly; the sqrt-coefficient
    // columns differ through the points-per-route swath, so only log them
    CHECK(printed.alpha2 == doctest::Approx(dt.alpha).epsilon(1e-9));
    CHECK(printed.alpha3 == doctest::Approx(omega.alpha).epsilon(1e-9));
    MESSAGE("beta2 fitted ", dt.beta, " printed ", printed.beta2);
    MESSAGE("beta3 fitted ", omega.beta, " printed ", printed.beta3);
}

TEST_CASE("fleet mode validation") {
    CHECK_THROWS_AS(FleetMode::hybrid({{FleetMode::truck_only(), 0.5},
                                       {FleetMode::drone_assisted(10), 0.4}}),
                    std::domain_error);
    CHECK_THROWS_AS(FleetMode::hybrid({{FleetMode::default_hybrid(), 1.0}}),
                    std::domain_error);
    CHECK_THROWS_AS(FleetMode::hybrid({}), std::domain_error);
    CHECK_NOTHROW(FleetMode::hybrid({{FleetMode::truck_only(), 0.5},
                                     {FleetMode::drone_assisted(3), 0.5}}));
}
