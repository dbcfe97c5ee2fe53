#include "lastmile/demand.hpp"

#include <cmath>
#include <stdexcept>

namespace lastmile::demand {

void GbmParams::validate() const {
    if (!(q0 > 0.0)) throw std::domain_error("initial density must be positive");
    if (!(sigma >= 0.0)) throw std::domain_error("volatility must be non-negative");
    if (horizon < 1) throw std::domain_error("horizon must be at least 1 step");
    if (!(dt_step > 0.0)) throw std::domain_error("step length must be positive");
}

double NormalSampler::uniform() {
    // 53-bit mantissa uniform in [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NormalSampler::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t path_index) {
    // splitmix64 finalizer over the keyed input
    std::uint64_t z = master_seed + 0x9e3779b97f4a7c15ULL * (path_index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

DemandPath simulate_path(const GbmParams& params, std::uint64_t seed) {
    params.validate();
    NormalSampler normal(seed);
    DemandPath path;
    path.seed = seed;
    path.values.reserve(params.horizon + 1);
    path.values.push_back(params.q0);
    const double drift = (params.mu - 0.5 * params.sigma * params.sigma) * params.dt_step;
    const double diffusion = params.sigma * std::sqrt(params.dt_step);
    double q = params.q0;
    for (int k = 0; k < params.horizon; ++k) {
        q *= std::exp(drift + diffusion * normal.next());
        path.values.push_back(q);
    }
    return path;
}

std::pair<double, double> gbm_moments(const GbmParams& params, double t) {
    params.validate();
    if (!(t >= 0.0)) throw std::domain_error("elapsed time must be non-negative");
    const double mean = params.q0 * std::exp(params.mu * t);
    const double variance =
        params.q0 * params.q0 * std::exp(2.0 * params.mu * t) *
        std::expm1(params.sigma * params.sigma * t);
    return {mean, variance};
}

double fractional_moment(double q, double k, double mu, double sigma, double t) {
    if (!(q > 0.0)) throw std::domain_error("density must be positive");
    if (!(k > 0.0)) throw std::domain_error("moment order must be positive");
    if (!(t >= 0.0)) throw std::domain_error("elapsed time must be non-negative");
    return std::pow(q, k) * std::exp((k * mu + 0.5 * sigma * sigma * k * (k - 1.0)) * t);
}

std::pair<double, double> estimate_params(const std::vector<double>& series,
                                          double dt_step) {
    if (series.size() < 3) throw std::domain_error("series must have at least 3 points");
    if (!(dt_step > 0.0)) throw std::domain_error("step length must be positive");
    for (double v : series)
        if (!(v > 0.0)) throw std::domain_error("series entries must be positive");

    std::vector<double> returns(series.size() - 1);
    for (std::size_t i = 0; i + 1 < series.size(); ++i)
        returns[i] = std::log(series[i + 1] / series[i]);

    double mean = 0.0;
    for (double r : returns) mean += r;
    mean /= static_cast<double>(returns.size());
    double ss = 0.0;
    for (double r : returns) ss += (r - mean) * (r - mean);
    const double sd = std::sqrt(ss / static_cast<double>(returns.size() - 1));

    const double sigma_hat = sd / std::sqrt(dt_step);
    const double mu_hat = mean / dt_step + 0.5 * sigma_hat * sigma_hat;
    return {mu_hat, sigma_hat};
}

}  // namespace lastmile::demand
