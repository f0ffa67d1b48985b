#ifndef JUDGEDIST_EVALUATE_HPP
#define JUDGEDIST_EVALUATE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "judgedist/conformal.hpp"
#include "judgedist/em.hpp"
#include "judgedist/transfer.hpp"
#include "judgedist/types.hpp"

namespace judgedist {

/// Hypergeometric chance that a uniformly drawn size-k judge subset from
/// a pool of k_max judges with s correct ones fails the majority vote:
/// P(#correct drawn < ceil(k/2)). Reduces to the indicator s < ceil(k/2)
/// at k == k_max.
double subset_failure_probability(int s, int k_max, int k);

/// Full pmf over the number of correct judges drawn (index 0..k).
std::vector<double> subset_count_pmf(int s, int k_max, int k);

/// Mean subset failure probability over the records; k odd, k <= pool.
double actual_error_rate(std::span<const JudgmentRecord> records, int k);
double actual_error_rate_serial(std::span<const JudgmentRecord> records, int k);

struct MarginRow {
    int k = 0;
    double estimated = 0.0;
    double actual = 0.0;
    double margin = 0.0;
};

/// Per-k absolute gaps between estimated and reference error rates.
/// All values are fractions; the CSV layer converts to percent.
struct MarginReport {
    std::vector<MarginRow> rows;
    double mean_margin = 0.0;
};

MarginReport error_margin(const MixtureParams& estimated,
                          std::span<const JudgmentRecord> reference,
                          std::span<const int> k_list);
MarginReport error_margin(const MixtureParams& estimated,
                          const MixtureParams& reference,
                          std::span<const int> k_list);

enum class Protocol { adaptive_stopping, fixed_r, transfer };
enum class Estimator { mixture_em, binomial };

inline constexpr std::uint64_t kDefaultSeed = 1729;

struct ExperimentConfig {
    Protocol protocol = Protocol::fixed_r;
    Estimator estimator = Estimator::mixture_em;
    EmConfig em;
    StoppingConfig stopping;
    TransferConfig transfer;
    long fixed_r = 100;
    std::vector<int> k_list{1, 3, 5, 7, 9, 11};
    int repetitions = 1;
    std::uint64_t seed = kDefaultSeed;
    bool shuffle = true;
};

struct RepetitionResult {
    int run_id = 0;
    MarginReport report;
    long samples_used = 0;
    bool criterion_met = true;
    MixtureParams fitted;                    // mixture runs
    std::optional<double> binomial_p_hat;    // binomial runs
};

struct ExperimentReport {
    std::vector<RepetitionResult> runs;
    double margin_mean = 0.0;
    double margin_std = 0.0;
    double samples_mean = 0.0;
};

/// Recomputes the aggregate fields from `runs` (population std).
void aggregate_runs(ExperimentReport& report);

/// Runs the chosen pipeline (sample -> fit -> margin) `repetitions`
/// times with per-repetition derived sub-seeds. Margins are taken
/// against `reference_params` when given, otherwise against the full
/// dataset's actual rates. Repetitions run in parallel; results are
/// indexed by run id, so parallel and serial execution agree.
ExperimentReport run_experiment(
    const ExperimentConfig& config, std::span<const JudgmentRecord> dataset,
    const std::optional<MixtureParams>& reference_params = std::nullopt,
    std::span<const SourceData> sources = {},
    const EmbeddingSet* target_embeddings = nullptr);

/// CSV per the harness schema (percent values); `config_line` is echoed
/// as the second header comment so results carry their configuration.
std::string experiment_csv(const ExperimentReport& report,
                           const std::string& config_line);

}  // namespace judgedist

#endif
