#include "judgedist/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "judgedist/numerics.hpp"

namespace judgedist {

namespace {

double quantile_step(double tau, long r) {
    return tau * (1.0 / std::sqrt(static_cast<double>(r - 1)) -
                  1.0 / std::sqrt(static_cast<double>(r)));
}

/// Last `hits` recorded changes all within xi.
bool recent_changes_within(std::span<const double> history, double xi, int hits) {
    if (history.size() < static_cast<std::size_t>(hits) + 1) return false;
    for (int j = 0; j < hits; ++j) {
        std::size_t i = history.size() - 1 - j;
        if (std::abs(history[i] - history[i - 1]) > xi) return false;
    }
    return true;
}

}  // namespace

void StoppingConfig::validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("StoppingConfig: epsilon must be in (0, 1)");
    }
    if (!(xi > 0.0)) throw std::invalid_argument("StoppingConfig: xi must be > 0");
    if (!(tau > 0.0)) throw std::invalid_argument("StoppingConfig: tau must be > 0");
    if (min_samples != 0 && min_samples < 2) {
        throw std::invalid_argument(
            "StoppingConfig: min_samples must be >= 2 (or 0 for auto)");
    }
    if (consecutive_hits < 1) {
        throw std::invalid_argument("StoppingConfig: consecutive_hits must be >= 1");
    }
}

int StoppingConfig::resolved_min_samples() const {
    if (min_samples != 0) return min_samples;
    long auto_floor = theoretical_min_samples(xi, tau, MinSamplesMode::approximate);
    return static_cast<int>(std::max<long>(2, auto_floor));
}

std::vector<double> nonconformity_scores(std::span<const JudgmentSample> samples,
                                         double center) {
    if (samples.empty()) {
        throw std::invalid_argument("nonconformity_scores: empty sample list");
    }
    std::vector<double> scores;
    scores.reserve(samples.size());
    for (const auto& s : samples) {
        scores.push_back(std::abs(static_cast<double>(s.s) - center));
    }
    return scores;
}

double conformal_quantile(std::span<const double> scores, double epsilon) {
    if (scores.empty()) {
        throw std::invalid_argument("conformal_quantile: empty score list");
    }
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    auto r = static_cast<long>(sorted.size());
    long idx = static_cast<long>(
        std::ceil((1.0 - epsilon) * static_cast<double>(r + 1)));
    idx = std::clamp(idx, 1L, r);
    return sorted[static_cast<std::size_t>(idx - 1)];
}

bool should_stop(const ConformalState& state, const StoppingConfig& config) {
    config.validate();
    if (state.quantile_history.size() < 2) {
        throw std::invalid_argument("should_stop: need at least 2 quantiles");
    }
    auto r = static_cast<long>(state.observed.size());
    if (r < config.resolved_min_samples()) return false;
    return recent_changes_within(state.quantile_history, config.xi,
                                 config.consecutive_hits);
}

ConformalState adaptive_sample(const SampleStream& stream,
                               const StoppingConfig& config) {
    config.validate();
    ConformalState state;
    NeumaierSum total;
    while (true) {
        std::optional<JudgmentSample> next = stream();
        if (!next.has_value()) break;  // exhausted, criterion unmet
        state.observed.push_back(*next);
        total.add(static_cast<double>(next->s));
        state.running_mean = total.value() / static_cast<double>(state.observed.size());
        std::vector<double> scores =
            nonconformity_scores(state.observed, state.running_mean);
        state.quantile_history.push_back(
            conformal_quantile(scores, config.epsilon));
        if (state.quantile_history.size() >= 2 && should_stop(state, config)) {
            state.criterion_met = true;
            break;
        }
    }
    return state;
}

long theoretical_min_samples(double xi, double tau, MinSamplesMode mode) {
    if (!(xi > 0.0) || !(tau > 0.0)) {
        throw std::invalid_argument("theoretical_min_samples: xi, tau must be > 0");
    }
    if (mode == MinSamplesMode::approximate) {
        return static_cast<long>(std::ceil(std::pow(tau / (2.0 * xi), 2.0 / 3.0)));
    }
    // quantile_step is strictly decreasing in r, so bracket then bisect.
    if (quantile_step(tau, 2) <= xi) return 2;
    long lo = 2, hi = 4;
    while (quantile_step(tau, hi) > xi) {
        lo = hi;
        hi *= 2;
    }
    while (hi - lo > 1) {
        long mid = lo + (hi - lo) / 2;
        if (quantile_step(tau, mid) <= xi) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

RateBounds error_rate_bounds(double p_bb, double xi, double tau, long r) {
    if (!(p_bb >= 0.0 && p_bb <= 1.0)) {
        throw std::domain_error("error_rate_bounds: p_bb must be in [0, 1]");
    }
    if (r < 1) throw std::domain_error("error_rate_bounds: r must be >= 1");
    double m = std::min(xi, tau / std::sqrt(static_cast<double>(r)));
    return RateBounds{(1.0 - m) * p_bb, std::min(1.0, (1.0 + m) * p_bb)};
}

double variance_stopping_quantity(std::span<const JudgmentSample> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("variance_stopping_quantity: empty samples");
    }
    NeumaierSum correct, total;
    for (const auto& s : samples) {
        correct.add(static_cast<double>(s.s));
        total.add(static_cast<double>(s.k));
    }
    double a = correct.value();
    double b = total.value() - a;
    double n = a + b;
    return a * b / (n * n * (n + 1.0));
}

VarianceState variance_adaptive_sample(const SampleStream& stream,
                                       const StoppingConfig& config) {
    config.validate();
    VarianceState state;
    int floor = config.resolved_min_samples();
    while (true) {
        std::optional<JudgmentSample> next = stream();
        if (!next.has_value()) break;
        state.observed.push_back(*next);
        state.variance_history.push_back(
            variance_stopping_quantity(state.observed));
        auto r = static_cast<long>(state.observed.size());
        if (r >= floor &&
            recent_changes_within(state.variance_history, config.xi,
                                  config.consecutive_hits)) {
            state.criterion_met = true;
            break;
        }
    }
    return state;
}

SampleStream make_vector_stream(std::vector<JudgmentSample> samples) {
    auto cursor = std::make_shared<std::size_t>(0);
    auto data = std::make_shared<std::vector<JudgmentSample>>(std::move(samples));
    return [cursor, data]() -> std::optional<JudgmentSample> {
        if (*cursor >= data->size()) return std::nullopt;
        return (*data)[(*cursor)++];
    };
}

}  // namespace judgedist
