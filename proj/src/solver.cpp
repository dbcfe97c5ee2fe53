#include "lastmile/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lastmile/errors.hpp"

namespace lastmile::solver {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::domain_error(msg);
}

// ---- dense damped Newton with forward-difference Jacobian ----

struct NewtonResult {
    std::vector<double> x;
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;
};

// Solves J dx = -f in place; returns false on a singular pivot.
bool solve_linear(std::vector<double>& jac, std::vector<double>& rhs, int n) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(jac[row * n + col]) > std::abs(jac[pivot * n + col])) pivot = row;
        if (std::abs(jac[pivot * n + col]) < 1e-300) return false;
        if (pivot != col) {
            for (int j = 0; j < n; ++j) std::swap(jac[col * n + j], jac[pivot * n + j]);
            std::swap(rhs[col], rhs[pivot]);
        }
        for (int row = col + 1; row < n; ++row) {
            const double f = jac[row * n + col] / jac[col * n + col];
            for (int j = col; j < n; ++j) jac[row * n + j] -= f * jac[col * n + j];
            rhs[row] -= f * rhs[col];
        }
    }
    for (int row = n - 1; row >= 0; --row) {
        double s = rhs[row];
        for (int j = row + 1; j < n; ++j) s -= jac[row * n + j] * rhs[j];
        rhs[row] = s / jac[row * n + row];
    }
    return true;
}

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
        m = std::max(m, std::abs(x));
    }
    return m;
}

NewtonResult damped_newton(const std::function<std::vector<double>(const std::vector<double>&)>& f,
                           std::vector<double> x, double tol, int max_iter = 120) {
    const int n = static_cast<int>(x.size());
    NewtonResult best;
    best.x = x;
    std::vector<double> fx = f(x);
    best.residual = inf_norm(fx);
    for (int iter = 0; iter < max_iter; ++iter) {
        const double fnorm = inf_norm(fx);
        if (fnorm < best.residual) {
            best.residual = fnorm;
            best.x = x;
        }
        if (fnorm < tol) {
            best.converged = true;
            return best;
        }
        // forward-difference Jacobian, relative perturbation 1e-7
        std::vector<double> jac(n * n);
        for (int j = 0; j < n; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
            std::vector<double> xp = x;
            xp[j] += h;
            const std::vector<double> fp = f(xp);
            for (int i = 0; i < n; ++i) jac[i * n + j] = (fp[i] - fx[i]) / h;
        }
        std::vector<double> step = fx;
        for (double& s : step) s = -s;
        if (!solve_linear(jac, step, n)) return best;
        double lambda = 1.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half) {
            std::vector<double> xn = x;
            for (int j = 0; j < n; ++j) xn[j] += lambda * step[j];
            std::vector<double> fn = f(xn);
            if (inf_norm(fn) < (1.0 - 1e-4 * lambda) * fnorm) {
                x = std::move(xn);
                fx = std::move(fn);
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) return best;  // stagnated at the attainable floor
    }
    return best;
}

// ---- model pieces ----

struct KFactors {
    double k1;  // K1(Q) = k1 * alpha * Q
    double k2;  // K2(Q) = k2 * beta * sqrt(Q)
};

KFactors k_factors(const EconParams& e) {
    return {-1.0 / (e.mu - e.rho),
            -1.0 / (0.5 * (e.mu - e.sigma * e.sigma / 4.0) - e.rho)};
}

// Elimination weights of the smooth-fit reductions:
//   X-relations carry (1 - g0) K1 + (1/2 - g0) K2 [+/- g0 * cost],
//   Y-relations carry (1 - g1) K1 + (1/2 - g1) K2 [+/- g1 * cost].
struct Reduction {
    GammaRoots g;
    KFactors k;
    double span;  // g1 - g0
};

Reduction reduction(const EconParams& econ) {
    const GammaRoots g = gamma_roots(econ);
    return {g, k_factors(econ), g.upper - g.lower};
}

}  // namespace

void EconParams::validate() const {
    require(rho > 0.0, "discount rate must be positive");
    require(rho > mu, "discount rate must exceed the drift");
    require(rho > 0.5 * (mu - sigma * sigma / 4.0),
            "discount rate too small for the sqrt-term integral");
}

void SwitchCosts::validate() const {
    require(up >= 0.0 && down >= 0.0, "switch costs must be non-negative");
}

void MultiOptionCosts::validate() const {
    require(entry >= 0.0 && mothball >= 0.0 && reactivate >= 0.0 && abandon >= 0.0,
            "option costs must be non-negative");
}

GammaRoots gamma_roots(const EconParams& econ) {
    require(econ.sigma > 0.0, "degenerate process: sigma must be positive");
    const double half_s2 = 0.5 * econ.sigma * econ.sigma;
    const double b = econ.mu - half_s2;
    const double disc = std::sqrt(b * b + 4.0 * half_s2 * econ.rho);
    return {(-b - disc) / (2.0 * half_s2), (-b + disc) / (2.0 * half_s2)};
}

std::pair<double, double> k_terms(double q, const cost::OmegaCoeffs& coeffs,
                                  const EconParams& econ) {
    require(q > 0.0, "demand density must be positive");
    if (!(econ.rho > econ.mu) ||
        !(econ.rho > 0.5 * (econ.mu - econ.sigma * econ.sigma / 4.0)))
        throw std::domain_error("divergent perpetual integral: discount rate too small");
    const KFactors k = k_factors(econ);
    return {k.k1 * coeffs.alpha * q, k.k2 * coeffs.beta * std::sqrt(q)};
}

double solve_single_threshold(const cost::OmegaCoeffs& coeffs, const EconParams& econ) {
    econ.validate();
    const Reduction r = reduction(econ);
    const double g0 = r.g.lower, g1 = r.g.upper;
    // weights of K1(Q*) and K2(Q*) in the second-derivative matching condition
    const double ca = (g1 * (g1 - 1.0) * (1.0 - g0) - g0 * (g0 - 1.0) * (1.0 - g1)) / r.span;
    const double cb =
        (g1 * (g1 - 1.0) * (0.5 - g0) - g0 * (g0 - 1.0) * (0.5 - g1)) / r.span + 0.25;
    const double wa = ca * r.k.k1 * coeffs.alpha;   // coefficient of Q*
    const double wb = cb * r.k.k2 * coeffs.beta;    // coefficient of sqrt(Q*)
    if (!(wa * wb < 0.0))
        throw std::domain_error("no positive threshold: condition has no positive root");
    const double root = -wb / wa;
    const double qs = root * root;

    // cross-check: bracketed bisection of the same condition
    auto condition = [&](double q) { return wa * q + wb * std::sqrt(q); };
    double lo = qs / 4.0, hi = qs * 4.0;
    if (condition(lo) * condition(hi) > 0.0)
        throw SolverFailure("threshold cross-check bracket failed", std::abs(condition(qs)));
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (condition(lo) * condition(mid) <= 0.0)
            hi = mid;
        else
            lo = mid;
        if ((hi - lo) / qs < 1e-13) break;
    }
    const double numeric = 0.5 * (lo + hi);
    if (std::abs(numeric - qs) / qs > 1e-9)
        throw SolverFailure("closed-form threshold disagrees with the numeric root",
                            std::abs(numeric - qs) / qs);
    return qs;
}

namespace {

// X-relation value (the B0-type elimination) at q given a cost with sign.
double x_relation(double q, const cost::OmegaCoeffs& c, const Reduction& r,
                  double signed_cost) {
    const double k1 = r.k.k1 * c.alpha * q;
    const double k2 = r.k.k2 * c.beta * std::sqrt(q);
    return ((1.0 - r.g.lower) * k1 + (0.5 - r.g.lower) * k2 + r.g.lower * signed_cost) /
           r.span;
}

// Y-relation value (the A1-type elimination).
double y_relation(double q, const cost::OmegaCoeffs& c, const Reduction& r,
                  double signed_cost) {
    const double k1 = r.k.k1 * c.alpha * q;
    const double k2 = r.k.k2 * c.beta * std::sqrt(q);
    return ((1.0 - r.g.upper) * k1 + (0.5 - r.g.upper) * k2 + r.g.upper * signed_cost) /
           r.span;
}

// The four entry-exit conditions in x = (a1, b0, ln q_low, ln q_high);
// smooth-pasting rows are premultiplied by Q so all rows share the value
// scale. Evaluated in extended precision: the conditions are small
// differences of terms ~1e5-1e6 and tolerances reach the double floor.
std::vector<double> threshold_conditions(const std::vector<double>& x,
                                         const cost::OmegaCoeffs& c, const Reduction& r,
                                         const SwitchCosts& costs, double scale) {
    const long double a1 = x[0], b0 = x[1];
    const long double ql = std::exp((long double)x[2]);
    const long double qh = std::exp((long double)x[3]);
    const long double g0 = r.g.lower, g1 = r.g.upper;
    auto k1 = [&](long double q) -> long double { return (long double)r.k.k1 * c.alpha * q; };
    auto k2 = [&](long double q) -> long double {
        return (long double)r.k.k2 * c.beta * sqrtl(q);
    };
    const long double pl0 = powl(ql, g0), pl1 = powl(ql, g1);
    const long double ph0 = powl(qh, g0), ph1 = powl(qh, g1);
    std::vector<double> f(4);
    f[0] = (double)((a1 * pl0 - b0 * pl1 + k1(ql) + k2(ql) + (long double)costs.down) / scale);
    f[1] = (double)((a1 * ph0 - b0 * ph1 + k1(qh) + k2(qh) - (long double)costs.up) / scale);
    f[2] = (double)((g0 * a1 * pl0 - g1 * b0 * pl1 + k1(ql) + 0.5L * k2(ql)) / scale);
    f[3] = (double)((g0 * a1 * ph0 - g1 * b0 * ph1 + k1(qh) + 0.5L * k2(qh)) / scale);
    return f;
}

}  // namespace

ThresholdSolution solve_thresholds(const cost::OmegaCoeffs& coeffs,
                                   const EconParams& econ, const SwitchCosts& costs) {
    econ.validate();
    costs.validate();
    const double qs = solve_single_threshold(coeffs, econ);
    const Reduction r = reduction(econ);

    if (costs.up == 0.0 && costs.down == 0.0) {
        // thresholds collapse; coefficients from the frictionless relations
        ThresholdSolution sol;
        sol.q_low = sol.q_high = qs;
        sol.b0 = x_relation(qs, coeffs, r, 0.0) / std::pow(qs, r.g.upper);
        sol.a1 = y_relation(qs, coeffs, r, 0.0) / std::pow(qs, r.g.lower);
        std::vector<double> f = threshold_conditions(
            {sol.a1, sol.b0, std::log(qs), std::log(qs)}, coeffs, r, costs, 1.0);
        sol.residual = inf_norm(f);
        return sol;
    }

    const double scale = std::max({1.0, costs.up, costs.down});
    auto conditions = [&](const std::vector<double>& x) {
        return threshold_conditions(x, coeffs, r, costs, scale);
    };

    constexpr std::array<std::pair<double, double>, 5> spreads{{
        {0.8, 1.25}, {0.9, 1.1}, {0.95, 1.05}, {0.7, 1.4}, {0.6, 1.6}}};
    double best_residual = std::numeric_limits<double>::infinity();
    for (const auto& [lo, hi] : spreads) {
        const double ql0 = lo * qs, qh0 = hi * qs;
        const double b0 = x_relation(ql0, coeffs, r, -costs.down) / std::pow(ql0, r.g.upper);
        const double a1 = y_relation(qh0, coeffs, r, costs.up) / std::pow(qh0, r.g.lower);
        NewtonResult res = damped_newton(conditions, {a1, b0, std::log(ql0), std::log(qh0)},
                                         1e-10);
        best_residual = std::min(best_residual, res.residual);
        if (!res.converged) continue;
        ThresholdSolution sol;
        sol.a1 = res.x[0];
        sol.b0 = res.x[1];
        sol.q_low = std::exp(res.x[2]);
        sol.q_high = std::exp(res.x[3]);
        sol.residual = res.residual;
        const bool finite = std::isfinite(sol.a1) && std::isfinite(sol.b0) &&
                            std::isfinite(sol.q_low) && std::isfinite(sol.q_high);
        if (finite && sol.q_low > 0.0 && sol.q_low <= sol.q_high && sol.residual < 1e-8)
            return sol;
    }
    throw SolverFailure("entry-exit threshold system did not converge", best_residual);
}

std::pair<double, double> option_values(double q, const ThresholdSolution& sol,
                                        const cost::OmegaCoeffs& coeffs,
                                        const EconParams& econ) {
    require(q > 0.0, "demand density must be positive");
    const Reduction r = reduction(econ);
    const auto [K1, K2] = k_terms(q, coeffs, econ);
    const double v0 = sol.b0 * std::pow(q, r.g.upper);
    const double v1 = sol.a1 * std::pow(q, r.g.lower) + K1 + K2;
    return {v0, v1};
}

double expected_transition_time(double q, double target, Direction direction,
                                double mu, double sigma) {
    require(sigma > 0.0, "degenerate process: sigma must be positive");
    require(q > 0.0 && target > 0.0, "densities must be positive");
    const double nu = mu - 0.5 * sigma * sigma;
    if (std::abs(nu) <= 1e-14 * std::max(std::abs(mu), 0.5 * sigma * sigma))
        throw std::domain_error("excluded case: mu equals sigma^2/2");
    if (direction == Direction::Up)
        require(q <= target, "up transition requires q below the target");
    else
        require(q >= target, "down transition requires q above the target");
    const double l = 1.0 - 2.0 * mu / (sigma * sigma);
    return std::log(target) / nu * std::pow(q / target, l) - std::log(q) / nu;
}

namespace {

// Residuals of all eight value-matching / smooth-pasting conditions of the
// four-threshold system, scaled; derivative rows premultiplied by Q.
double multi_option_residual(const MultiOptionSolution& s,
                             const cost::OmegaCoeffs& entry,
                             const cost::OmegaCoeffs& moth, const Reduction& r,
                             const MultiOptionCosts& costs) {
    const long double g0 = r.g.lower, g1 = r.g.upper;
    auto v0 = [&](long double q) -> long double { return (long double)s.b0 * powl(q, g1); };
    auto v0d = [&](long double q) -> long double {
        return g1 * (long double)s.b0 * powl(q, g1);
    };
    auto flow1 = [&](long double q) -> long double {
        return (long double)r.k.k1 * entry.alpha * q +
               (long double)r.k.k2 * entry.beta * sqrtl(q);
    };
    auto flow1d = [&](long double q) -> long double {
        return (long double)r.k.k1 * entry.alpha * q +
               0.5L * (long double)r.k.k2 * entry.beta * sqrtl(q);
    };
    auto flowm = [&](long double q) -> long double {
        return (long double)r.k.k1 * moth.alpha * q +
               (long double)r.k.k2 * moth.beta * sqrtl(q);
    };
    auto flowmd = [&](long double q) -> long double {
        return (long double)r.k.k1 * moth.alpha * q +
               0.5L * (long double)r.k.k2 * moth.beta * sqrtl(q);
    };
    auto v1 = [&](long double q) -> long double {
        return (long double)s.a1 * powl(q, g0) + flow1(q);
    };
    auto v1d = [&](long double q) -> long double {
        return g0 * (long double)s.a1 * powl(q, g0) + flow1d(q);
    };
    auto vm = [&](long double q) -> long double {
        return (long double)s.d0 * powl(q, g1) + (long double)s.d1 * powl(q, g0) + flowm(q);
    };
    auto vmd = [&](long double q) -> long double {
        return g1 * (long double)s.d0 * powl(q, g1) + g0 * (long double)s.d1 * powl(q, g0) +
               flowmd(q);
    };
    const long double qh = s.q_enter, qm = s.q_mothball, qr = s.q_reactivate,
                      qa = s.q_abandon;
    const std::array<long double, 8> conditions{
        v0(qh) - v1(qh) + (long double)costs.entry,      v0d(qh) - v1d(qh),
        v1(qm) - vm(qm) + (long double)costs.mothball,   v1d(qm) - vmd(qm),
        vm(qr) - v1(qr) + (long double)costs.reactivate, vmd(qr) - v1d(qr),
        vm(qa) - v0(qa) + (long double)costs.abandon,    vmd(qa) - v0d(qa)};
    const double scale = std::max({1.0, costs.entry, costs.mothball, costs.reactivate,
                                   costs.abandon});
    long double worst = 0.0;
    for (long double c : conditions) {
        if (!std::isfinite(static_cast<double>(c)))
            return std::numeric_limits<double>::infinity();
        worst = std::max(worst, fabsl(c));
    }
    return static_cast<double>(worst) / scale;
}

}  // namespace

MultiOptionSolution solve_multi_option(const cost::OmegaCoeffs& entry_coeffs,
                                       const cost::OmegaCoeffs& mothball_coeffs,
                                       const EconParams& econ,
                                       const MultiOptionCosts& costs) {
    econ.validate();
    costs.validate();
    const Reduction r = reduction(econ);

    const bool zero_costs = costs.entry == 0.0 && costs.mothball == 0.0 &&
                            costs.reactivate == 0.0 && costs.abandon == 0.0;
    const bool same_flow = entry_coeffs.alpha == mothball_coeffs.alpha &&
                           entry_coeffs.beta == mothball_coeffs.beta;
    if (zero_costs && same_flow) {
        // degenerate limit: everything collapses onto the frictionless threshold
        const double qs = solve_single_threshold(entry_coeffs, econ);
        MultiOptionSolution s;
        s.q_enter = s.q_mothball = s.q_reactivate = s.q_abandon = qs;
        s.b0 = x_relation(qs, entry_coeffs, r, 0.0) / std::pow(qs, r.g.upper);
        s.a1 = y_relation(qs, entry_coeffs, r, 0.0) / std::pow(qs, r.g.lower);
        s.d0 = 0.0;
        s.d1 = s.a1;  // mothballed state coincides with the active one
        s.residual = multi_option_residual(s, entry_coeffs, mothball_coeffs, r, costs);
        return s;
    }

    // Stage 1: mothball/reactivate subsystem on the flow difference. It has
    // the entry-exit structure with (A1-D1) and D0 as the homogeneous
    // coefficients, reactivation playing the up-switch and mothballing the
    // down-switch.
    const cost::OmegaCoeffs delta{entry_coeffs.alpha - mothball_coeffs.alpha,
                                  entry_coeffs.beta - mothball_coeffs.beta};
    ThresholdSolution stage1 =
        solve_thresholds(delta, econ, SwitchCosts{costs.reactivate, costs.mothball});
    const double d0 = stage1.b0;
    const double a1_minus_d1 = stage1.a1;

    // Stage 2: entry and abandonment coupled through B0 and D1. The two
    // elimination relations per threshold reduce the four conditions to two
    // equations in (ln q_enter, ln q_abandon).
    const double scale2 =
        std::max({1.0, costs.entry, costs.abandon, std::abs(a1_minus_d1), std::abs(d0)});
    auto stage2 = [&](const std::vector<double>& x) {
        const double qh = std::exp(x[0]), qa = std::exp(x[1]);
        const double yh = y_relation(qh, entry_coeffs, r, costs.entry);
        const double ya = y_relation(qa, mothball_coeffs, r, -costs.abandon);
        const double xh = x_relation(qh, entry_coeffs, r, costs.entry);
        const double xa = -x_relation(qa, mothball_coeffs, r, -costs.abandon);
        return std::vector<double>{
            (yh / std::pow(qh, r.g.lower) - ya / std::pow(qa, r.g.lower) - a1_minus_d1) /
                scale2,
            (xh / std::pow(qh, r.g.upper) + xa / std::pow(qa, r.g.upper) - d0) / scale2};
    };

    const double qs_entry = solve_single_threshold(entry_coeffs, econ);
    const bool moth_has_root = mothball_coeffs.alpha * mothball_coeffs.beta < 0.0;
    const double qs_moth =
        moth_has_root ? solve_single_threshold(mothball_coeffs, econ) : qs_entry;

    double best_residual = std::numeric_limits<double>::infinity();
    for (double hi : {1.25, 1.1, 1.5, 1.8, 2.2}) {
        for (double lo : {0.8, 0.65, 0.5, 0.35}) {
            NewtonResult res = damped_newton(
                stage2, {std::log(hi * qs_entry), std::log(lo * qs_moth)}, 1e-10);
            best_residual = std::min(best_residual, res.residual);
            if (!res.converged) continue;
            MultiOptionSolution s;
            s.q_enter = std::exp(res.x[0]);
            s.q_abandon = std::exp(res.x[1]);
            if (!std::isfinite(s.q_enter) || !std::isfinite(s.q_abandon) ||
                s.q_enter <= 0.0 || s.q_abandon <= 0.0)
                continue;
            s.q_mothball = stage1.q_low;
            s.q_reactivate = stage1.q_high;
            s.d0 = d0;
            s.b0 = x_relation(s.q_enter, entry_coeffs, r, costs.entry) /
                   std::pow(s.q_enter, r.g.upper);
            s.d1 = y_relation(s.q_abandon, mothball_coeffs, r, -costs.abandon) /
                   std::pow(s.q_abandon, r.g.lower);
            s.a1 = a1_minus_d1 + s.d1;
            s.residual = multi_option_residual(s, entry_coeffs, mothball_coeffs, r, costs);
            if (s.residual >= 1e-8) continue;
            const bool all_positive = costs.entry > 0.0 && costs.mothball > 0.0 &&
                                      costs.reactivate > 0.0 && costs.abandon > 0.0;
            if (all_positive &&
                !(s.q_abandon < s.q_mothball && s.q_mothball <= s.q_reactivate &&
                  s.q_reactivate < s.q_enter))
                throw InfeasibleRegime(
                    "multi-option thresholds violate the switching order (abandon < "
                    "mothball <= reactivate < enter)");
            return s;
        }
    }
    throw SolverFailure("multi-option entry/abandon system did not converge",
                        best_residual);
}

StagewiseThresholds stagewise_thresholds(const cost::CostParams& params,
                                         const cost::FleetMode& hybrid,
                                         const cost::FleetMode& full_dt,
                                         const EconParams& econ,
                                         const SwitchCosts& stage1,
                                         const SwitchCosts& stage2) {
    const cost::FleetMode to = cost::FleetMode::truck_only();
    const cost::OmegaCoeffs first = cost::omega_coeffs(to, hybrid, params);
    const cost::OmegaCoeffs second = cost::omega_coeffs(hybrid, full_dt, params);
    StagewiseThresholds out;
    out.to_hybrid = solve_thresholds(first, econ, stage1);
    out.hybrid_full = solve_thresholds(second, econ, stage2);
    return out;
}

}  // namespace lastmile::solver
