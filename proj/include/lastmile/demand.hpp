#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace lastmile::demand {

struct GbmParams {
    double q0 = 50.0;      // initial density (pkg/mi^2/day)
    double mu = 0.005;     // drift per step
    double sigma = 0.1;    // volatility per sqrt(step)
    double dt_step = 1.0;  // step length (days)
    int horizon = 365;     // number of steps

    void validate() const;  // throws std::domain_error
};

struct DemandPath {
    std::uint64_t seed = 0;
    std::vector<double> values;  // length horizon + 1, values[0] = q0
};

// Deterministic standard-normal stream: explicit 53-bit uniforms from a
// mt19937_64 fed through the Marsaglia polar transform, so identical seeds
// give identical streams regardless of the standard library in use.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}
    double next();

private:
    double uniform();
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Per-path generator key: ensembles draw path i with derive_seed(master, i),
// so results are independent of evaluation order and stable under extension.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t path_index);

// Exact-in-distribution log-Euler scheme of the GBM solution.
DemandPath simulate_path(const GbmParams& params, std::uint64_t seed);

// mean = q0 e^{mu t}; variance = q0^2 e^{2 mu t}(e^{sigma^2 t} - 1)
std::pair<double, double> gbm_moments(const GbmParams& params, double t);

// E[Q(t)^k | Q(0)=q] for k > 0
double fractional_moment(double q, double k, double mu, double sigma, double t);

// Log-return moment estimator: sigma_hat = sd(log returns)/sqrt(dt),
// mu_hat = mean(log returns)/dt + sigma_hat^2/2. Needs >= 3 positive points.
std::pair<double, double> estimate_params(const std::vector<double>& series,
                                          double dt_step);

}  // namespace lastmile::demand
