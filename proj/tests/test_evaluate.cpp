#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "judgedist/dist.hpp"
#include "judgedist/evaluate.hpp"
#include "judgedist/numerics.hpp"
#include "judgedist/simulate.hpp"

using namespace judgedist;

namespace {

const MixtureParams kGen{0.7, 8, 2, 1.5, 6};
const std::vector<int> kList{1, 3, 5, 7, 9, 11};

}  // namespace

TEST_CASE("subset_count_pmf sums to one") {
    for (int k_max : {3, 11}) {
        for (int s = 0; s <= k_max; ++s) {
            for (int k = 1; k <= k_max; ++k) {
                auto pmf = subset_count_pmf(s, k_max, k);
                NeumaierSum sum;
                for (double v : pmf) {
                    CHECK(v >= 0.0);
                    CHECK(v <= 1.0 + 1e-12);
                    sum.add(v);
                }
                CHECK(std::abs(sum.value() - 1.0) <= 1e-10);
            }
        }
    }
}

TEST_CASE("subset_failure_probability hand cases") {
    // pool of 3 with 2 correct: picking 1 wrong judge has chance 1/3
    CHECK(std::abs(subset_failure_probability(2, 3, 1) - 1.0 / 3.0) < 1e-12);
    // full pool reduces to the indicator
    CHECK(subset_failure_probability(5, 11, 11) == 1.0);
    CHECK(subset_failure_probability(6, 11, 11) == 0.0);
    // all-correct pool can never fail
    CHECK(subset_failure_probability(11, 11, 5) == 0.0);
    CHECK_THROWS_AS(subset_failure_probability(4, 3, 1), std::domain_error);
}

TEST_CASE("actual_error_rate at the full pool equals direct counting") {
    GeneratorSpec spec{kGen, 11, 1000, 77};
    auto records = sample_judgments(spec);
    long below = 0;
    for (const auto& rec : records) {
        if (rec.s < 6) ++below;
    }
    double direct = static_cast<double>(below) / 1000.0;
    CHECK(actual_error_rate(records, 11) == direct);
    CHECK(actual_error_rate_serial(records, 11) == direct);
}

TEST_CASE("actual_error_rate parallel equals serial") {
    GeneratorSpec spec{kGen, 11, 20000, 3};
    auto records = sample_judgments(spec);
    for (int k : {1, 5, 11}) {
        CHECK(std::abs(actual_error_rate(records, k) -
                       actual_error_rate_serial(records, k)) < 1e-13);
    }
}

TEST_CASE("actual_error_rate input checks") {
    GeneratorSpec spec{kGen, 11, 10, 5};
    auto records = sample_judgments(spec);
    CHECK_THROWS_AS(actual_error_rate(records, 4), std::domain_error);   // even
    CHECK_THROWS_AS(actual_error_rate(records, 13), std::domain_error);  // > pool
    CHECK_THROWS_AS(actual_error_rate({}, 3), std::invalid_argument);
}

TEST_CASE("all-correct records never fail") {
    std::vector<JudgmentRecord> records(50, {"x", 11, 11, std::nullopt});
    CHECK(actual_error_rate(records, 11) == 0.0);
    CHECK(actual_error_rate(records, 3) == 0.0);
}

TEST_CASE("error_margin against itself is zero") {
    MarginReport report = error_margin(kGen, kGen, kList);
    for (const auto& row : report.rows) CHECK(row.margin == 0.0);
    CHECK(report.mean_margin == 0.0);
}

TEST_CASE("error_margin of a shifted estimate is the shift") {
    // against record references, a constant rate offset shows up directly
    MarginReport base = error_margin(kGen, kGen, kList);
    MixtureParams off = kGen;
    off.w = 0.6;  // moves every per-k rate
    MarginReport shifted = error_margin(off, kGen, kList);
    for (std::size_t i = 0; i < shifted.rows.size(); ++i) {
        int k = shifted.rows[i].k;
        double expected =
            std::abs(mixture_error_rate(k, off) - mixture_error_rate(k, kGen));
        CHECK(std::abs(shifted.rows[i].margin - expected) < 1e-15);
    }
    CHECK(base.mean_margin == 0.0);
    // symmetric in the sign of the error
    MixtureParams up = kGen, down = kGen;
    up.alpha1 += 0.5;
    down.alpha1 -= 0.5;
    MarginReport m_up = error_margin(up, kGen, kList);
    MarginReport m_down = error_margin(down, kGen, kList);
    for (const auto& row : m_up.rows) CHECK(row.margin >= 0.0);
    for (const auto& row : m_down.rows) CHECK(row.margin >= 0.0);
}

TEST_CASE("error_margin takes record references") {
    GeneratorSpec spec{kGen, 11, 3000, 9};
    auto records = sample_judgments(spec);
    MarginReport report = error_margin(kGen, records, kList);
    REQUIRE(report.rows.size() == kList.size());
    for (const auto& row : report.rows) {
        CHECK(row.actual == actual_error_rate(records, row.k));
        CHECK(row.margin == std::abs(row.estimated - row.actual));
    }
    std::vector<int> bad{2};
    CHECK_THROWS_AS(error_margin(kGen, records, bad), std::domain_error);
}

TEST_CASE("run_experiment determinism and aggregation") {
    GeneratorSpec spec{kGen, 11, 2000, 55};
    auto records = sample_judgments(spec);

    ExperimentConfig cfg;
    cfg.protocol = Protocol::fixed_r;
    cfg.fixed_r = 200;
    cfg.repetitions = 8;
    cfg.seed = 42;
    ExperimentReport r1 = run_experiment(cfg, records, kGen);
    ExperimentReport r2 = run_experiment(cfg, records, kGen);
    REQUIRE(r1.runs.size() == 8);
    CHECK(experiment_csv(r1, "cfg") == experiment_csv(r2, "cfg"));

    // reported mean equals the arithmetic mean of per-run margins
    NeumaierSum acc;
    for (const auto& run : r1.runs) acc.add(run.report.mean_margin);
    CHECK(std::abs(r1.margin_mean - acc.value() / 8.0) <= 1e-12);

    // single repetition has zero std
    cfg.repetitions = 1;
    ExperimentReport single = run_experiment(cfg, records, kGen);
    CHECK(single.margin_std == 0.0);
    CHECK(single.samples_mean == 200.0);
}

TEST_CASE("run_experiment adaptive protocol uses the stopping rule") {
    GeneratorSpec spec{kGen, 11, 3000, 8};
    auto records = sample_judgments(spec);
    ExperimentConfig cfg;
    cfg.protocol = Protocol::adaptive_stopping;
    cfg.repetitions = 3;
    cfg.stopping.min_samples = 20;
    ExperimentReport report = run_experiment(cfg, records, kGen);
    for (const auto& run : report.runs) {
        CHECK(run.samples_used >= 20);
        CHECK(run.criterion_met);
    }
}

TEST_CASE("run_experiment adaptive protocol at scale") {
    GeneratorSpec spec{kGen, 11, 5000, 2222};
    auto records = sample_judgments(spec);
    ExperimentConfig cfg;
    cfg.protocol = Protocol::adaptive_stopping;
    cfg.repetitions = 30;
    cfg.seed = 7;
    ExperimentReport report = run_experiment(cfg, records, kGen);
    CHECK(report.samples_mean >= 40.0);
    CHECK(report.samples_mean <= 75.0);
    CHECK(report.margin_mean <= 0.08);
}

TEST_CASE("run_experiment binomial estimator underperforms the mixture") {
    GeneratorSpec spec{kGen, 11, 5000, 123};
    auto records = sample_judgments(spec);
    ExperimentConfig cfg;
    cfg.protocol = Protocol::fixed_r;
    cfg.fixed_r = 5000;
    cfg.shuffle = false;
    cfg.repetitions = 1;
    ExperimentReport em_run = run_experiment(cfg, records, kGen);
    cfg.estimator = Estimator::binomial;
    ExperimentReport bin_run = run_experiment(cfg, records, kGen);
    CHECK(em_run.margin_mean < bin_run.margin_mean);
    CHECK(bin_run.runs[0].binomial_p_hat.has_value());
}

TEST_CASE("experiment_csv layout") {
    GeneratorSpec spec{kGen, 11, 500, 2};
    auto records = sample_judgments(spec);
    ExperimentConfig cfg;
    cfg.fixed_r = 100;
    cfg.repetitions = 2;
    cfg.k_list = {1, 3};
    ExperimentReport report = run_experiment(cfg, records, kGen);
    std::string csv = experiment_csv(report, "protocol=fixed_r r=100");
    CHECK(csv.rfind("# judgedist eval csv v1\n", 0) == 0);
    CHECK(csv.find("# protocol=fixed_r r=100\n") != std::string::npos);
    CHECK(csv.find("run_id,k,estimated_rate,actual_rate,margin,samples_used\n") !=
          std::string::npos);
    // percent formatting: the estimated rate of run 0 at k=1 appears x100
    char expected[64];
    std::snprintf(expected, sizeof(expected), "0,1,%.6f",
                  100.0 * report.runs[0].report.rows[0].estimated);
    CHECK(csv.find(expected) != std::string::npos);
    // one summary row per run with a blank k column
    CHECK(csv.find("\n0,,,,") != std::string::npos);
    CHECK(csv.find("\n1,,,,") != std::string::npos);
}
