#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lastmile/demand.hpp"

using namespace lastmile;
using demand::DemandPath;
using demand::GbmParams;

TEST_CASE("identical seed and params give identical paths") {
    GbmParams p;
    p.horizon = 200;
    const DemandPath a = demand::simulate_path(p, 123456789ULL);
    const DemandPath b = demand::simulate_path(p, 123456789ULL);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
    const DemandPath c = demand::simulate_path(p, 987654321ULL);
    CHECK(a.values.back() != c.values.back());
}

TEST_CASE("paths stay positive and start at q0") {
    GbmParams p;
    p.sigma = 0.4;
    p.horizon = 500;
    for (std::uint64_t master : {1ULL, 99ULL}) {
        for (int i = 0; i < 50; ++i) {
            const DemandPath path = demand::simulate_path(p, demand::derive_seed(master, i));
            CHECK(path.values.front() == p.q0);
            for (double v : path.values) CHECK(v > 0.0);
        }
    }
}

TEST_CASE("zero volatility reduces to the deterministic exponential") {
    GbmParams p;
    p.sigma = 0.0;
    p.mu = 0.005;
    p.horizon = 10;
    const DemandPath path = demand::simulate_path(p, 7ULL);
    CHECK(std::abs(path.values.back() - 50.0 * std::exp(0.05)) <= 1e-4);
    for (int k = 0; k <= 10; ++k) {
        const double expected = 50.0 * std::exp(0.005 * k);
        CHECK(std::abs(path.values[k] - expected) / expected < 1e-12);
    }
}

TEST_CASE("ensemble mean matches the driftless expectation") {
    GbmParams p;
    p.mu = 0.0;
    p.sigma = 0.1;
    p.horizon = 10;
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = demand::simulate_path(p, demand::derive_seed(11ULL, i)).values.back();
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sumsq - n * mean * mean) / (n - 1));
    CHECK(std::abs(mean - 50.0) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("ensemble variance at t=100 matches the closed form") {
    GbmParams p;  // baseline mu=0.005, sigma=0.1
    p.horizon = 100;
    const int n = 100000;
    std::vector<double> finals(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        finals[i] = demand::simulate_path(p, demand::derive_seed(5ULL, i)).values.back();
        sum += finals[i];
    }
    const double mean = sum / n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : finals) {
        const double d = v - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    const double sample_var = m2 * n / (n - 1.0);
    const double se_var = std::sqrt((m4 - m2 * m2) / n);
    const auto [emean, evar] = demand::gbm_moments(p, 100.0);
    CHECK(std::abs(sample_var - evar) < 3.0 * se_var);
}

TEST_CASE("moments at t=0 and closed-form values") {
    GbmParams p;
    const auto [m0, v0] = demand::gbm_moments(p, 0.0);
    CHECK(m0 == 50.0);
    CHECK(v0 == 0.0);

    const auto [m10, v10] = demand::gbm_moments(p, 10.0);
    CHECK(std::abs(m10 - 52.5636) <= 1e-4);
    CHECK(v10 > 0.0);

    GbmParams frozen = p;
    frozen.sigma = 0.0;
    for (double t : {0.0, 1.0, 55.5, 400.0})
        CHECK(demand::gbm_moments(frozen, t).second == 0.0);
}

TEST_CASE("fractional moments") {
    GbmParams p;
    const double t = 7.0;
    const auto [mean, var] = demand::gbm_moments(p, t);
    CHECK(demand::fractional_moment(p.q0, 1.0, p.mu, p.sigma, t) ==
          doctest::Approx(mean).epsilon(1e-12));
    CHECK(demand::fractional_moment(p.q0, 2.0, p.mu, p.sigma, t) ==
          doctest::Approx(var + mean * mean).epsilon(1e-12));

    // Monte Carlo oracle for the half moment at t=5
    const double tt = 5.0;
    const int n = 1000000;
    demand::NormalSampler normal(314159ULL);
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = normal.next();
        const double q = p.q0 * std::exp((p.mu - 0.5 * p.sigma * p.sigma) * tt +
                                         p.sigma * std::sqrt(tt) * z);
        const double v = std::sqrt(q);
        sum += v;
        sumsq += v * v;
    }
    const double mc = sum / n;
    const double se = std::sqrt((sumsq / n - mc * mc) / n);
    const double expected = demand::fractional_moment(p.q0, 0.5, p.mu, p.sigma, tt);
    CHECK(std::abs(mc - expected) < 3.0 * se);
}

TEST_CASE("parameter estimation from series") {
    SUBCASE("constant series") {
        const std::vector<double> series(10, 42.0);
        const auto [mu, sigma] = demand::estimate_params(series, 1.0);
        CHECK(mu == 0.0);
        CHECK(sigma == 0.0);
    }
    SUBCASE("exact exponential series") {
        std::vector<double> series;
        for (int k = 0; k < 100; ++k) series.push_back(50.0 * std::exp(0.001 * k));
        const auto [mu, sigma] = demand::estimate_params(series, 1.0);
        CHECK(std::abs(mu - 0.001) <= 1e-12);
        CHECK(std::abs(sigma) <= 1e-12);
    }
    SUBCASE("recovers generating parameters") {
        GbmParams p;
        p.mu = 0.0003;
        p.sigma = 0.08;
        p.horizon = 100000;
        const DemandPath path = demand::simulate_path(p, 2024ULL);
        const auto [mu, sigma] = demand::estimate_params(path.values, 1.0);
        const double n = p.horizon;
        const double se_sigma = p.sigma / std::sqrt(2.0 * n);
        const double se_mu = p.sigma / std::sqrt(n);
        CHECK(std::abs(sigma - p.sigma) < 3.0 * se_sigma);
        CHECK(std::abs(mu - p.mu) < 3.0 * se_mu);
    }
    SUBCASE("error paths") {
        CHECK_THROWS_AS(demand::estimate_params({1.0, 2.0}, 1.0), std::domain_error);
        CHECK_THROWS_AS(demand::estimate_params({1.0, -2.0, 3.0}, 1.0), std::domain_error);
        CHECK_THROWS_AS(demand::estimate_params({1.0, 2.0, 3.0}, 0.0), std::domain_error);
    }
}

TEST_CASE("derived seeds differ across indices and masters") {
    CHECK(demand::derive_seed(42, 0) != demand::derive_seed(42, 1));
    CHECK(demand::derive_seed(42, 0) != demand::derive_seed(43, 0));
    // extending an ensemble preserves the prefix keys
    for (int i = 0; i < 100; ++i)
        CHECK(demand::derive_seed(7, i) == demand::derive_seed(7, i));
}
