#ifndef JUDGEDIST_EM_HPP
#define JUDGEDIST_EM_HPP

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "judgedist/types.hpp"

namespace judgedist {

enum class EmInit { median_split, fixed };

/// Component update rule. `normalized` divides each component's
/// pseudo-counts by its total responsibility, which keeps the fitted
/// Beta shapes on the scale of a single sample's judge pool;
/// `pseudo_counts` accumulates them raw, so shapes grow with the sample
/// count and the components sharpen toward point masses.
enum class EmUpdate { normalized, pseudo_counts };

struct EmConfig {
    int max_iter = 500;
    double tol = 1e-6;
    /// Clamp for s/k away from {0,1}; 0 means auto = 1/(2 * max k in batch).
    double boundary_smoothing = 0.0;
    double param_floor = 1e-3;
    EmInit init = EmInit::median_split;
    EmUpdate update = EmUpdate::normalized;

    void validate() const;
};

struct EmTrace {
    std::vector<MixtureParams> params;
    std::vector<double> log_likelihood;
    bool converged = false;

    std::size_t iterations() const { return params.size(); }
};

/// s/k clamped into [smoothing, 1 - smoothing].
double success_fraction(const JudgmentSample& sample, double smoothing);

/// Posterior probability that an observation with success fraction p_i
/// came from component 1:
///   w Beta(p_i | a1, b1) / (w Beta(p_i | a1, b1) + (1-w) Beta(p_i | a2, b2)).
/// p_i must be strictly inside (0, 1). Throws if both densities vanish.
double responsibility(double p_i, const MixtureParams& params);

/// One EM update. With gamma1_i = responsibility(p_i) and gamma2 = 1 - gamma1:
///   alpha_j' = max(floor, sum_i gamma_j_i s_i)
///   beta_j'  = max(floor, sum_i gamma_j_i (k_i - s_i))
///   w'       = (1/r) sum_i gamma1_i
/// (each divided by sum_i gamma_j_i first under EmUpdate::normalized).
MixtureParams em_step(std::span<const JudgmentSample> samples,
                      const MixtureParams& params, const EmConfig& config);

/// Single-pass reference used to validate the blocked parallel reduction.
MixtureParams em_step_serial(std::span<const JudgmentSample> samples,
                             const MixtureParams& params,
                             const EmConfig& config);

/// Deterministic initialization: split at the median of s/k, fit each
/// half by moments, seed w with the upper-half fraction. Component 1 is
/// the upper (high-accuracy) half.
MixtureParams median_split_init(std::span<const JudgmentSample> samples,
                                const EmConfig& config);

/// Iterates em_step from the configured initialization until the largest
/// absolute parameter change drops below tol or max_iter is reached.
/// Non-convergence is reported through the trace, not an error.
/// Requires at least 2 samples.
std::pair<MixtureParams, EmTrace> fit_mixture(
    std::span<const JudgmentSample> samples, const EmConfig& config);

/// Same, from an explicit starting point.
std::pair<MixtureParams, EmTrace> fit_mixture(
    std::span<const JudgmentSample> samples, const EmConfig& config,
    const MixtureParams& init);

/// sum_i ln mixture_pmf(s_i, k_i, params).
double log_likelihood(std::span<const JudgmentSample> samples,
                      const MixtureParams& params);

}  // namespace judgedist

#endif
