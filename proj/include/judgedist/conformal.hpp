#ifndef JUDGEDIST_CONFORMAL_HPP
#define JUDGEDIST_CONFORMAL_HPP

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "judgedist/types.hpp"

namespace judgedist {

struct StoppingConfig {
    /// Coverage complement: quantile level is 1 - epsilon.
    double epsilon = 0.1;
    /// Stop when successive quantiles move by at most xi.
    double xi = 0.03;
    /// Scale relating sample count to quantile stability.
    double tau = 25.0;
    /// Floor on the stop count; 0 selects the closed-form value
    /// theoretical_min_samples(xi, tau, approximate), never below 2.
    int min_samples = 0;
    int consecutive_hits = 1;

    void validate() const;
    int resolved_min_samples() const;
};

struct ConformalState {
    std::vector<JudgmentSample> observed;
    double running_mean = 0.0;
    std::vector<double> quantile_history;
    bool criterion_met = false;
};

/// Yields samples until exhausted (nullopt).
using SampleStream = std::function<std::optional<JudgmentSample>()>;

/// score_i = |S_i - center|, order preserving.
std::vector<double> nonconformity_scores(std::span<const JudgmentSample> samples,
                                         double center);

/// Ascending-sorted score at 1-based index ceil((1-epsilon)(r+1)),
/// clamped to r.
double conformal_quantile(std::span<const double> scores, double epsilon);

/// True iff r >= min_samples and the last consecutive_hits quantile
/// changes were all <= xi. Needs at least 2 recorded quantiles.
bool should_stop(const ConformalState& state, const StoppingConfig& config);

/// Draws one sample per iteration, recomputes the running mean, all
/// nonconformity scores and the quantile, and stops per should_stop.
/// Stream exhaustion before the criterion is met leaves
/// criterion_met == false with all consumed samples returned.
ConformalState adaptive_sample(const SampleStream& stream,
                               const StoppingConfig& config);

enum class MinSamplesMode { exact, approximate };

/// Smallest r with tau (1/sqrt(r-1) - 1/sqrt(r)) <= xi (exact mode, r >= 2),
/// or the first-order closed form ceil((tau / (2 xi))^(2/3)) (approximate).
long theoretical_min_samples(double xi, double tau, MinSamplesMode mode);

struct RateBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// With m = min(xi, tau/sqrt(r)): ((1-m) p_bb, (1+m) p_bb), upper
/// clamped to 1.
RateBounds error_rate_bounds(double p_bb, double xi, double tau, long r);

/// Beta-moment variance of the pooled judgment counts:
/// a b / ((a+b)^2 (a+b+1)) with a = total correct judgments and
/// b = total judgments - a.
double variance_stopping_quantity(std::span<const JudgmentSample> samples);

struct VarianceState {
    std::vector<JudgmentSample> observed;
    std::vector<double> variance_history;
    bool criterion_met = false;
};

/// Baseline: same loop as adaptive_sample but stops when successive
/// variance_stopping_quantity values move by at most xi.
VarianceState variance_adaptive_sample(const SampleStream& stream,
                                       const StoppingConfig& config);

/// Stream over a fixed vector, in order.
SampleStream make_vector_stream(std::vector<JudgmentSample> samples);

}  // namespace judgedist

#endif
