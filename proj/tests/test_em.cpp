#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "judgedist/dist.hpp"
#include "judgedist/em.hpp"
#include "judgedist/rng.hpp"
#include "judgedist/simulate.hpp"

using namespace judgedist;

namespace {

std::vector<JudgmentSample> simulate_samples(const MixtureParams& prm, int k,
                                             long n, std::uint64_t seed) {
    GeneratorSpec spec{prm, k, n, seed};
    std::vector<JudgmentSample> out;
    for (const auto& rec : sample_judgments(spec)) out.push_back(to_sample(rec));
    return out;
}

// density-ratio oracle on the plain (non-log) scale
double direct_responsibility(double p, const MixtureParams& prm) {
    auto pdf = [](double x, double a, double b) {
        return std::pow(x, a - 1) * std::pow(1 - x, b - 1) /
               std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
    };
    double d1 = prm.w * pdf(p, prm.alpha1, prm.beta1);
    double d2 = (1 - prm.w) * pdf(p, prm.alpha2, prm.beta2);
    return d1 / (d1 + d2);
}

bool params_equal(const MixtureParams& a, const MixtureParams& b) {
    return std::memcmp(&a, &b, sizeof(MixtureParams)) == 0;
}

}  // namespace

TEST_CASE("success_fraction clamping") {
    CHECK(success_fraction({5, 10}, 0.02) == 0.5);
    CHECK(success_fraction({0, 11}, 0.02) == 0.02);
    CHECK(success_fraction({11, 11}, 0.02) == 0.98);
    CHECK_THROWS_AS(success_fraction({5, 3}, 0.02), std::domain_error);
}

TEST_CASE("responsibility closed forms") {
    MixtureParams same{0.37, 3, 4, 3, 4};
    for (double p : {0.1, 0.5, 0.93}) {
        CHECK(std::abs(responsibility(p, same) - 0.37) < 1e-12);
    }
    MixtureParams sure{1.0, 3, 4, 1, 1};
    CHECK(responsibility(0.5, sure) == 1.0);

    MixtureParams split{0.5, 8, 2, 2, 8};
    double got = responsibility(0.9, split);
    CHECK(got > 0.99);
    CHECK(std::abs(got - direct_responsibility(0.9, split)) < 1e-12);

    CHECK_THROWS_AS(responsibility(0.0, split), std::domain_error);
    CHECK_THROWS_AS(responsibility(1.0, split), std::domain_error);
}

TEST_CASE("responsibility is monotone in w") {
    MixtureParams prm{0.0, 8, 2, 2, 8};
    double prev = -1.0;
    for (double w : {0.05, 0.2, 0.5, 0.8, 0.95}) {
        prm.w = w;
        double g = responsibility(0.3, prm);
        CHECK(g > prev);
        prev = g;
    }
}

TEST_CASE("em_step pseudo-count hand example") {
    EmConfig cfg;
    cfg.update = EmUpdate::pseudo_counts;
    std::vector<JudgmentSample> one{{3, 5}};
    MixtureParams sure{1.0, 2, 2, 2, 2};  // gamma1 = 1 for every sample
    MixtureParams next = em_step(one, sure, cfg);
    CHECK(next.w == 1.0);
    CHECK(next.alpha1 == 3.0);
    CHECK(next.beta1 == 2.0);
    CHECK(next.alpha2 == cfg.param_floor);
    CHECK(next.beta2 == cfg.param_floor);
    // normalized agrees here: component 1 has unit total responsibility
    cfg.update = EmUpdate::normalized;
    MixtureParams nrm = em_step(one, sure, cfg);
    CHECK(nrm.alpha1 == 3.0);
    CHECK(nrm.beta1 == 2.0);
}

TEST_CASE("em_step keeps invariants on random inputs") {
    rng::SplitMix64 g(31);
    EmConfig cfg;
    for (int rep = 0; rep < 40; ++rep) {
        int k = 1 + static_cast<int>(g.next_below(20));
        std::vector<JudgmentSample> samples;
        for (int i = 0; i < 25; ++i) {
            samples.push_back({static_cast<int>(g.next_below(k + 1)), k});
        }
        MixtureParams prm{g.next_double(), std::exp(2 * g.next_double()),
                          std::exp(2 * g.next_double()),
                          std::exp(2 * g.next_double()),
                          std::exp(2 * g.next_double())};
        cfg.update = rep % 2 == 0 ? EmUpdate::normalized : EmUpdate::pseudo_counts;
        MixtureParams next = em_step(samples, prm, cfg);
        CHECK(next.w >= 0.0);
        CHECK(next.w <= 1.0);
        CHECK(next.alpha1 >= cfg.param_floor);
        CHECK(next.beta1 >= cfg.param_floor);
        CHECK(next.alpha2 >= cfg.param_floor);
        CHECK(next.beta2 >= cfg.param_floor);
    }
}

TEST_CASE("em_step symmetric data keeps w at one half") {
    EmConfig cfg;
    std::vector<JudgmentSample> samples{{2, 10}, {8, 10}};
    MixtureParams init{0.5, 2, 1, 1, 2};
    MixtureParams next = em_step(samples, init, cfg);
    CHECK(std::abs(next.w - 0.5) < 1e-12);
}

TEST_CASE("blocked parallel step matches the serial reference") {
    MixtureParams gen{0.7, 8, 2, 1.5, 6};
    auto samples = simulate_samples(gen, 11, 20000, 5);
    EmConfig cfg;
    MixtureParams init{0.6, 5, 2, 1, 4};
    MixtureParams parallel = em_step(samples, init, cfg);
    MixtureParams serial = em_step_serial(samples, init, cfg);
    // order-independence requirement: differences far below tol/10
    CHECK(std::abs(parallel.w - serial.w) < cfg.tol / 10);
    CHECK(std::abs(parallel.alpha1 - serial.alpha1) < cfg.tol / 10);
    CHECK(std::abs(parallel.beta1 - serial.beta1) < cfg.tol / 10);
    CHECK(std::abs(parallel.alpha2 - serial.alpha2) < cfg.tol / 10);
    CHECK(std::abs(parallel.beta2 - serial.beta2) < cfg.tol / 10);
}

TEST_CASE("fit_mixture is deterministic") {
    MixtureParams gen{0.7, 8, 2, 1.5, 6};
    auto samples = simulate_samples(gen, 11, 500, 77);
    EmConfig cfg;
    auto [p1, t1] = fit_mixture(samples, cfg);
    auto [p2, t2] = fit_mixture(samples, cfg);
    CHECK(params_equal(p1, p2));
    REQUIRE(t1.params.size() == t2.params.size());
    for (std::size_t i = 0; i < t1.params.size(); ++i) {
        CHECK(params_equal(t1.params[i], t2.params[i]));
        CHECK(t1.log_likelihood[i] == t2.log_likelihood[i]);
    }
}

TEST_CASE("fit_mixture label-swap closure") {
    MixtureParams gen{0.7, 8, 2, 1.5, 6};
    auto samples = simulate_samples(gen, 11, 400, 13);
    EmConfig cfg;
    MixtureParams init{0.5, 5, 2, 1, 4};
    MixtureParams swapped_init{0.5, 1, 4, 5, 2};
    auto [fit, tr1] = fit_mixture(samples, cfg, init);
    auto [swapped, tr2] = fit_mixture(samples, cfg, swapped_init);
    CHECK(std::abs(fit.w - (1.0 - swapped.w)) < 1e-9);
    CHECK(std::abs(fit.alpha1 - swapped.alpha2) < 1e-7);
    CHECK(std::abs(fit.beta1 - swapped.beta2) < 1e-7);
    CHECK(std::abs(fit.alpha2 - swapped.alpha1) < 1e-7);
    CHECK(std::abs(fit.beta2 - swapped.beta1) < 1e-7);
    for (int s = 0; s <= 11; ++s) {
        CHECK(std::abs(mixture_pmf(s, 11, fit) - mixture_pmf(s, 11, swapped)) <=
              1e-10);
    }
}

TEST_CASE("fit_mixture handles degenerate all-correct data") {
    std::vector<JudgmentSample> samples(20, JudgmentSample{11, 11});
    EmConfig cfg;
    auto [fit, trace] = fit_mixture(samples, cfg);
    double delta = 1.0 / 22.0;
    double accuracy = 1.0 - mixture_error_rate(1, fit);
    CHECK(accuracy >= 1.0 - 2.0 * delta);
}

TEST_CASE("fit_mixture minimal sample count") {
    std::vector<JudgmentSample> two{{3, 11}, {9, 11}};
    EmConfig cfg;
    CHECK_NOTHROW(fit_mixture(two, cfg));
    std::vector<JudgmentSample> one{{3, 11}};
    CHECK_THROWS_AS(fit_mixture(one, cfg), std::invalid_argument);
}

TEST_CASE("fit_mixture reports non-convergence without failing") {
    MixtureParams gen{0.7, 8, 2, 1.5, 6};
    auto samples = simulate_samples(gen, 11, 300, 3);
    EmConfig cfg;
    cfg.max_iter = 2;  // far too few
    auto [fit, trace] = fit_mixture(samples, cfg);
    CHECK_FALSE(trace.converged);
    CHECK(trace.iterations() == 2);
    validate(fit);  // still usable parameters
}

TEST_CASE("fit_mixture recovers generator error rates") {
    MixtureParams gen{0.7, 8, 2, 1.5, 6};
    auto samples = simulate_samples(gen, 11, 2000, 21);
    EmConfig cfg;
    auto [fit, trace] = fit_mixture(samples, cfg);
    CHECK(trace.converged);
    for (int k : {1, 3, 5, 7, 9, 11}) {
        CHECK(std::abs(mixture_error_rate(k, fit) - mixture_error_rate(k, gen)) <
              0.05);
    }
}

TEST_CASE("fixed init strategy works") {
    MixtureParams gen{0.7, 8, 2, 1.5, 6};
    auto samples = simulate_samples(gen, 11, 1000, 9);
    EmConfig cfg;
    cfg.init = EmInit::fixed;
    auto [fit, trace] = fit_mixture(samples, cfg);
    CHECK(trace.converged);
    CHECK(std::abs(mixture_error_rate(11, fit) - mixture_error_rate(11, gen)) <
          0.06);
}

TEST_CASE("log_likelihood") {
    std::vector<JudgmentSample> one{{2, 3}};
    MixtureParams uniform{1.0, 1, 1, 1, 1};
    CHECK(std::abs(log_likelihood(one, uniform) - std::log(0.25)) < 1e-12);

    std::vector<JudgmentSample> twice{{2, 3}, {2, 3}};
    CHECK(log_likelihood(twice, uniform) == 2.0 * log_likelihood(one, uniform));

    rng::SplitMix64 g(4);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<JudgmentSample> samples;
        for (int i = 0; i < 5; ++i) {
            samples.push_back({static_cast<int>(g.next_below(12)), 11});
        }
        MixtureParams prm{g.next_double(), 1 + g.next_double() * 5,
                          1 + g.next_double() * 5, 1 + g.next_double() * 5,
                          1 + g.next_double() * 5};
        CHECK(log_likelihood(samples, prm) <= 0.0);
    }
}

TEST_CASE("EmConfig validation") {
    EmConfig cfg;
    cfg.tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = EmConfig{};
    cfg.boundary_smoothing = 0.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = EmConfig{};
    cfg.param_floor = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
