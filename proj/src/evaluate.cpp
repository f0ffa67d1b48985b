#include "judgedist/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "judgedist/dist.hpp"
#include "judgedist/numerics.hpp"
#include "judgedist/rng.hpp"

namespace judgedist {

namespace {

void check_subset_args(int s, int k_max, int k) {
    if (k_max < 1 || s < 0 || s > k_max) {
        throw std::domain_error("subset evaluation: need 0 <= s <= k_max");
    }
    if (k < 1 || k > k_max) {
        throw std::domain_error("subset evaluation: need 1 <= k <= k_max");
    }
}

double margin_mean(const std::vector<MarginRow>& rows) {
    NeumaierSum acc;
    for (const auto& row : rows) acc.add(row.margin);
    return acc.value() / static_cast<double>(rows.size());
}

void check_k_list(std::span<const int> k_list) {
    if (k_list.empty()) throw std::invalid_argument("k_list must be non-empty");
    for (int k : k_list) {
        if (k < 1 || k % 2 == 0) {
            throw std::domain_error("k_list entries must be odd and >= 1");
        }
    }
}

}  // namespace

std::vector<double> subset_count_pmf(int s, int k_max, int k) {
    check_subset_args(s, k_max, k);
    std::vector<double> pmf(static_cast<std::size_t>(k) + 1, 0.0);
    if (k == k_max) {
        pmf[static_cast<std::size_t>(s)] = 1.0;
        return pmf;
    }
    int lo = std::max(0, k - (k_max - s));
    int hi = std::min(k, s);
    double denom = log_choose(k_max, k);
    for (int j = lo; j <= hi; ++j) {
        pmf[static_cast<std::size_t>(j)] =
            std::exp(log_choose(s, j) + log_choose(k_max - s, k - j) - denom);
    }
    return pmf;
}

double subset_failure_probability(int s, int k_max, int k) {
    check_subset_args(s, k_max, k);
    int cutoff = majority_cutoff(k);
    if (k == k_max) return s < cutoff ? 1.0 : 0.0;
    std::vector<double> pmf = subset_count_pmf(s, k_max, k);
    NeumaierSum acc;
    for (int j = 0; j < cutoff; ++j) acc.add(pmf[static_cast<std::size_t>(j)]);
    return acc.value();
}

double actual_error_rate(std::span<const JudgmentRecord> records, int k) {
    majority_cutoff(k);  // rejects even k
    if (records.empty()) throw std::invalid_argument("actual_error_rate: no records");
    for (const auto& rec : records) {
        if (k > rec.k || rec.s < 0 || rec.s > rec.k) {
            throw std::domain_error("actual_error_rate: record '" + rec.id +
                                    "' incompatible with subset size " +
                                    std::to_string(k));
        }
    }
    std::size_t n = records.size();
    constexpr std::size_t kBlock = 4096;
    std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
        std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        std::size_t hi = std::min(lo + kBlock, n);
        NeumaierSum acc;
        for (std::size_t i = lo; i < hi; ++i) {
            acc.add(subset_failure_probability(records[i].s, records[i].k, k));
        }
        partial[b] = acc.value();
    }
    NeumaierSum total;
    for (double v : partial) total.add(v);
    return total.value() / static_cast<double>(n);
}

double actual_error_rate_serial(std::span<const JudgmentRecord> records, int k) {
    majority_cutoff(k);
    if (records.empty()) throw std::invalid_argument("actual_error_rate: no records");
    NeumaierSum acc;
    for (const auto& rec : records) {
        if (k > rec.k) {
            throw std::domain_error("actual_error_rate: k exceeds pool size of '" +
                                    rec.id + "'");
        }
        acc.add(subset_failure_probability(rec.s, rec.k, k));
    }
    return acc.value() / static_cast<double>(records.size());
}

MarginReport error_margin(const MixtureParams& estimated,
                          std::span<const JudgmentRecord> reference,
                          std::span<const int> k_list) {
    check_k_list(k_list);
    MarginReport report;
    for (int k : k_list) {
        double est = mixture_error_rate(k, estimated);
        double act = actual_error_rate(reference, k);
        report.rows.push_back({k, est, act, std::abs(est - act)});
    }
    report.mean_margin = margin_mean(report.rows);
    return report;
}

MarginReport error_margin(const MixtureParams& estimated,
                          const MixtureParams& reference,
                          std::span<const int> k_list) {
    check_k_list(k_list);
    MarginReport report;
    for (int k : k_list) {
        double est = mixture_error_rate(k, estimated);
        double act = mixture_error_rate(k, reference);
        report.rows.push_back({k, est, act, std::abs(est - act)});
    }
    report.mean_margin = margin_mean(report.rows);
    return report;
}

namespace {

struct ReferenceRates {
    std::vector<int> k_list;
    std::vector<double> rates;

    double at(int k) const {
        for (std::size_t i = 0; i < k_list.size(); ++i) {
            if (k_list[i] == k) return rates[i];
        }
        throw std::logic_error("reference rate missing for k");
    }
};

RepetitionResult run_one(const ExperimentConfig& cfg,
                         std::span<const JudgmentRecord> dataset,
                         const ReferenceRates& reference,
                         std::span<const SourceData> sources,
                         const EmbeddingSet* target_embeddings, int rep) {
    RepetitionResult result;
    result.run_id = rep;

    std::vector<JudgmentRecord> pool(dataset.begin(), dataset.end());
    rng::SplitMix64 g(rng::derive_stream(cfg.seed, static_cast<std::uint64_t>(rep)));
    if (cfg.shuffle) rng::shuffle(pool, g);

    std::vector<JudgmentSample> samples;
    if (cfg.protocol == Protocol::adaptive_stopping) {
        std::vector<JudgmentSample> all;
        all.reserve(pool.size());
        for (const auto& rec : pool) all.push_back(to_sample(rec));
        ConformalState state =
            adaptive_sample(make_vector_stream(std::move(all)), cfg.stopping);
        samples = state.observed;
        result.criterion_met = state.criterion_met;
    } else {
        long take = std::min<long>(cfg.fixed_r, static_cast<long>(pool.size()));
        samples.reserve(static_cast<std::size_t>(take));
        for (long i = 0; i < take; ++i) {
            samples.push_back(to_sample(pool[static_cast<std::size_t>(i)]));
        }
    }
    result.samples_used = static_cast<long>(samples.size());

    std::vector<MarginRow> rows;
    if (cfg.estimator == Estimator::binomial) {
        NeumaierSum cs, ct;
        for (const auto& s : samples) {
            cs.add(static_cast<double>(s.s));
            ct.add(static_cast<double>(s.k));
        }
        double p_hat = cs.value() / ct.value();
        for (int k : cfg.k_list) {
            double est = binomial_error_rate(k, p_hat);
            double act = reference.at(k);
            rows.push_back({k, est, act, std::abs(est - act)});
        }
        result.binomial_p_hat = p_hat;
    } else {
        MixtureParams fitted;
        if (cfg.protocol == Protocol::transfer) {
            if (target_embeddings == nullptr) {
                throw std::invalid_argument(
                    "run_experiment: transfer protocol needs target embeddings");
            }
            TransferEstimate est = transfer_estimate(samples, *target_embeddings,
                                                     sources, cfg.em, cfg.transfer);
            fitted = est.blended;
        } else {
            fitted = fit_mixture(samples, cfg.em).first;
        }
        result.fitted = fitted;
        for (int k : cfg.k_list) {
            double est = mixture_error_rate(k, fitted);
            double act = reference.at(k);
            rows.push_back({k, est, act, std::abs(est - act)});
        }
    }
    result.report.rows = std::move(rows);
    result.report.mean_margin = margin_mean(result.report.rows);
    return result;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                std::span<const JudgmentRecord> dataset,
                                const std::optional<MixtureParams>& reference_params,
                                std::span<const SourceData> sources,
                                const EmbeddingSet* target_embeddings) {
    check_k_list(cfg.k_list);
    if (cfg.repetitions < 1) {
        throw std::invalid_argument("run_experiment: repetitions must be >= 1");
    }
    if (dataset.empty()) {
        throw std::invalid_argument("run_experiment: empty dataset");
    }

    ReferenceRates reference;
    reference.k_list = cfg.k_list;
    for (int k : cfg.k_list) {
        reference.rates.push_back(reference_params.has_value()
                                      ? mixture_error_rate(k, *reference_params)
                                      : actual_error_rate(dataset, k));
    }

    ExperimentReport report;
    report.runs.resize(static_cast<std::size_t>(cfg.repetitions));
    bool failed = false;
    std::string failure;
#pragma omp parallel for schedule(dynamic)
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
        try {
            report.runs[static_cast<std::size_t>(rep)] =
                run_one(cfg, dataset, reference, sources, target_embeddings, rep);
        } catch (const std::exception& e) {
#pragma omp critical
            {
                failed = true;
                failure = e.what();
            }
        }
    }
    if (failed) throw std::runtime_error("run_experiment: " + failure);
    aggregate_runs(report);
    return report;
}

void aggregate_runs(ExperimentReport& report) {
    if (report.runs.empty()) {
        throw std::invalid_argument("aggregate_runs: no runs");
    }
    NeumaierSum margins, counts;
    for (const auto& run : report.runs) {
        margins.add(run.report.mean_margin);
        counts.add(static_cast<double>(run.samples_used));
    }
    double n = static_cast<double>(report.runs.size());
    report.margin_mean = margins.value() / n;
    report.samples_mean = counts.value() / n;
    NeumaierSum sq;
    for (const auto& run : report.runs) {
        double d = run.report.mean_margin - report.margin_mean;
        sq.add(d * d);
    }
    report.margin_std = std::sqrt(sq.value() / n);
}

std::string experiment_csv(const ExperimentReport& report,
                           const std::string& config_line) {
    std::string out;
    out += "# judgedist eval csv v1\n";
    if (!config_line.empty()) out += "# " + config_line + "\n";
    out += "run_id,k,estimated_rate,actual_rate,margin,samples_used\n";
    char buf[160];
    for (const auto& run : report.runs) {
        for (const auto& row : run.report.rows) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.6f,%.6f,%.6f,%ld\n",
                          run.run_id, row.k, 100.0 * row.estimated,
                          100.0 * row.actual, 100.0 * row.margin,
                          run.samples_used);
            out += buf;
        }
        std::snprintf(buf, sizeof(buf), "%d,,,,%.6f,%ld\n", run.run_id,
                      100.0 * run.report.mean_margin, run.samples_used);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "# aggregate margin_mean=%.6f margin_std=%.6f samples_mean=%.4f\n",
                  100.0 * report.margin_mean, 100.0 * report.margin_std,
                  report.samples_mean);
    out += buf;
    return out;
}

}  // namespace judgedist
