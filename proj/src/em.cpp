#include "judgedist/em.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "judgedist/dist.hpp"
#include "judgedist/numerics.hpp"

namespace judgedist {

namespace {

constexpr std::size_t kBlock = 2048;
constexpr double kMomFallbackConcentration = 10.0;

double log_beta_pdf(double p, double a, double b) {
    return (a - 1.0) * std::log(p) + (b - 1.0) * std::log1p(-p) - log_beta(a, b);
}

/// Per-step constants so the inner loop avoids re-deriving log terms.
struct StepContext {
    double log_w;
    double log_1mw;
    double log_norm1;
    double log_norm2;
    double smoothing;

    StepContext(const MixtureParams& prm, double delta)
        : log_w(prm.w > 0.0 ? std::log(prm.w) : 0.0),
          log_1mw(prm.w < 1.0 ? std::log1p(-prm.w) : 0.0),
          log_norm1(log_beta(prm.alpha1, prm.beta1)),
          log_norm2(log_beta(prm.alpha2, prm.beta2)),
          smoothing(delta) {}
};

/// Both responsibilities from the shared normalizer (gamma2 is computed
/// as e2/(e1+e2), the same formula as gamma1 with the components
/// exchanged, so a label swap permutes the arithmetic exactly).
std::pair<double, double> responsibilities(const JudgmentSample& sample,
                                           const MixtureParams& prm,
                                           const StepContext& ctx) {
    if (prm.w >= 1.0) return {1.0, 0.0};
    if (prm.w <= 0.0) return {0.0, 1.0};
    double p = success_fraction(sample, ctx.smoothing);
    double l1 = ctx.log_w + (prm.alpha1 - 1.0) * std::log(p) +
                (prm.beta1 - 1.0) * std::log1p(-p) - ctx.log_norm1;
    double l2 = ctx.log_1mw + (prm.alpha2 - 1.0) * std::log(p) +
                (prm.beta2 - 1.0) * std::log1p(-p) - ctx.log_norm2;
    if (!std::isfinite(l1) && !std::isfinite(l2)) {
        throw std::domain_error(
            "responsibility: both component densities vanished (degenerate "
            "mixture parameters)");
    }
    double m = std::max(l1, l2);
    double e1 = std::exp(l1 - m);
    double e2 = std::exp(l2 - m);
    return {e1 / (e1 + e2), e2 / (e1 + e2)};
}

struct StepSums {
    NeumaierSum g1, g2, g1s, g1f, g2s, g2f;

    void accumulate(const JudgmentSample& sample, const MixtureParams& prm,
                    const StepContext& ctx) {
        auto [ga, gb] = responsibilities(sample, prm, ctx);
        double s = static_cast<double>(sample.s);
        double f = static_cast<double>(sample.k - sample.s);
        g1.add(ga);
        g2.add(gb);
        g1s.add(ga * s);
        g1f.add(ga * f);
        g2s.add(gb * s);
        g2f.add(gb * f);
    }

    void merge(const StepSums& other) {
        g1.add(other.g1.value());
        g2.add(other.g2.value());
        g1s.add(other.g1s.value());
        g1f.add(other.g1f.value());
        g2s.add(other.g2s.value());
        g2f.add(other.g2f.value());
    }
};

double auto_smoothing(std::span<const JudgmentSample> samples,
                      const EmConfig& config) {
    if (config.boundary_smoothing > 0.0) return config.boundary_smoothing;
    int k_max = 1;
    for (const auto& s : samples) k_max = std::max(k_max, s.k);
    return 1.0 / (2.0 * k_max);
}

MixtureParams finish_step(const StepSums& sums, std::size_t r,
                          const EmConfig& config) {
    double sg1 = sums.g1.value();
    double sg2 = sums.g2.value();
    double a1 = sums.g1s.value();
    double b1 = sums.g1f.value();
    double a2 = sums.g2s.value();
    double b2 = sums.g2f.value();
    if (config.update == EmUpdate::normalized) {
        a1 /= std::max(sg1, 1e-12);
        b1 /= std::max(sg1, 1e-12);
        a2 /= std::max(sg2, 1e-12);
        b2 /= std::max(sg2, 1e-12);
    }
    MixtureParams out;
    out.alpha1 = std::max(config.param_floor, a1);
    out.beta1 = std::max(config.param_floor, b1);
    out.alpha2 = std::max(config.param_floor, a2);
    out.beta2 = std::max(config.param_floor, b2);
    out.w = sg1 / static_cast<double>(r);
    out.w = std::min(std::max(out.w, 0.0), 1.0);
    return out;
}

MixtureParams step_blocked(std::span<const JudgmentSample> samples,
                           const MixtureParams& prm, const EmConfig& config) {
    StepContext ctx(prm, auto_smoothing(samples, config));
    std::size_t n = samples.size();
    std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<StepSums> partial(nblocks);
    bool degenerate = false;  // exceptions must not cross the parallel region
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
        std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        std::size_t hi = std::min(lo + kBlock, n);
        try {
            for (std::size_t i = lo; i < hi; ++i) {
                partial[b].accumulate(samples[i], prm, ctx);
            }
        } catch (const std::domain_error&) {
            degenerate = true;
        }
    }
    if (degenerate) {
        throw std::domain_error(
            "em_step: both component densities vanished (degenerate mixture "
            "parameters)");
    }
    StepSums total;
    for (const auto& p : partial) total.merge(p);
    return finish_step(total, n, config);
}

double mom_shape_sum(double mean, double variance) {
    if (variance < 1e-12) return kMomFallbackConcentration;
    double c = mean * (1.0 - mean) / variance - 1.0;
    return c > 0.0 ? c : kMomFallbackConcentration;
}

void mom_fit(std::span<const double> values, double floor, double& alpha,
             double& beta) {
    NeumaierSum sum;
    for (double v : values) sum.add(v);
    double m = sum.value() / static_cast<double>(values.size());
    NeumaierSum sq;
    for (double v : values) sq.add((v - m) * (v - m));
    double var = sq.value() / static_cast<double>(values.size());
    m = std::min(std::max(m, 1e-6), 1.0 - 1e-6);
    double c = mom_shape_sum(m, var);
    alpha = std::max(m * c, floor);
    beta = std::max((1.0 - m) * c, floor);
}

double max_abs_change(const MixtureParams& a, const MixtureParams& b) {
    double d = std::abs(a.w - b.w);
    d = std::max(d, std::abs(a.alpha1 - b.alpha1));
    d = std::max(d, std::abs(a.beta1 - b.beta1));
    d = std::max(d, std::abs(a.alpha2 - b.alpha2));
    d = std::max(d, std::abs(a.beta2 - b.beta2));
    return d;
}

}  // namespace

void EmConfig::validate() const {
    if (max_iter < 1) throw std::invalid_argument("EmConfig: max_iter must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("EmConfig: tol must be > 0");
    if (!(param_floor > 0.0)) {
        throw std::invalid_argument("EmConfig: param_floor must be > 0");
    }
    if (boundary_smoothing < 0.0 || boundary_smoothing >= 0.5) {
        throw std::invalid_argument(
            "EmConfig: boundary_smoothing must lie in [0, 0.5); 0 selects auto");
    }
}

double success_fraction(const JudgmentSample& sample, double smoothing) {
    if (sample.k < 1 || sample.s < 0 || sample.s > sample.k) {
        throw std::domain_error("JudgmentSample requires 0 <= s <= k, k >= 1");
    }
    double p = static_cast<double>(sample.s) / sample.k;
    return std::min(std::max(p, smoothing), 1.0 - smoothing);
}

double responsibility(double p_i, const MixtureParams& params) {
    validate(params);
    if (!(p_i > 0.0 && p_i < 1.0)) {
        throw std::domain_error("responsibility: p_i must lie strictly in (0, 1)");
    }
    if (params.w >= 1.0) return 1.0;
    if (params.w <= 0.0) return 0.0;
    double l1 = std::log(params.w) + log_beta_pdf(p_i, params.alpha1, params.beta1);
    double l2 =
        std::log1p(-params.w) + log_beta_pdf(p_i, params.alpha2, params.beta2);
    if (!std::isfinite(l1) && !std::isfinite(l2)) {
        throw std::domain_error(
            "responsibility: both component densities vanished (degenerate "
            "mixture parameters)");
    }
    double m = std::max(l1, l2);
    double e1 = std::exp(l1 - m);
    double e2 = std::exp(l2 - m);
    return e1 / (e1 + e2);
}

MixtureParams em_step(std::span<const JudgmentSample> samples,
                      const MixtureParams& params, const EmConfig& config) {
    config.validate();
    validate(params);
    if (samples.empty()) throw std::invalid_argument("em_step: empty sample list");
    return step_blocked(samples, params, config);
}

MixtureParams em_step_serial(std::span<const JudgmentSample> samples,
                             const MixtureParams& params,
                             const EmConfig& config) {
    config.validate();
    validate(params);
    if (samples.empty()) throw std::invalid_argument("em_step: empty sample list");
    StepContext ctx(params, auto_smoothing(samples, config));
    StepSums sums;
    for (const auto& s : samples) sums.accumulate(s, params, ctx);
    return finish_step(sums, samples.size(), config);
}

MixtureParams median_split_init(std::span<const JudgmentSample> samples,
                                const EmConfig& config) {
    config.validate();
    if (samples.size() < 2) {
        throw std::invalid_argument("median_split_init: need >= 2 samples");
    }
    double delta = auto_smoothing(samples, config);
    std::vector<double> p;
    p.reserve(samples.size());
    for (const auto& s : samples) p.push_back(success_fraction(s, delta));

    std::vector<double> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    std::size_t r = sorted.size();
    double median = (r % 2 == 1)
                        ? sorted[r / 2]
                        : 0.5 * (sorted[r / 2 - 1] + sorted[r / 2]);

    std::vector<double> upper, lower;
    for (double v : p) (v >= median ? upper : lower).push_back(v);

    MixtureParams init;
    mom_fit(upper, config.param_floor, init.alpha1, init.beta1);
    if (lower.empty()) {
        // All success fractions coincide; keep a weak low-accuracy prior so
        // the second component can pick up mass if later data warrants it.
        init.alpha2 = 1.0;
        init.beta2 = 2.0;
        init.w = 1.0 - 1e-9;
    } else {
        mom_fit(lower, config.param_floor, init.alpha2, init.beta2);
        init.w = static_cast<double>(upper.size()) / static_cast<double>(r);
    }
    return init;
}

std::pair<MixtureParams, EmTrace> fit_mixture(
    std::span<const JudgmentSample> samples, const EmConfig& config) {
    config.validate();
    MixtureParams init;
    if (config.init == EmInit::median_split) {
        init = median_split_init(samples, config);
    } else {
        init = MixtureParams{0.5, 2.0, 1.0, 1.0, 2.0};
    }
    return fit_mixture(samples, config, init);
}

std::pair<MixtureParams, EmTrace> fit_mixture(
    std::span<const JudgmentSample> samples, const EmConfig& config,
    const MixtureParams& init) {
    config.validate();
    validate(init);
    if (samples.size() < 2) {
        throw std::invalid_argument("fit_mixture: need >= 2 samples");
    }
    EmTrace trace;
    trace.params.reserve(16);
    MixtureParams current = init;
    for (int it = 0; it < config.max_iter; ++it) {
        MixtureParams next = step_blocked(samples, current, config);
        trace.params.push_back(next);
        trace.log_likelihood.push_back(log_likelihood(samples, next));
        double change = max_abs_change(current, next);
        current = next;
        if (change < config.tol) {
            trace.converged = true;
            break;
        }
    }
    return {current, trace};
}

double log_likelihood(std::span<const JudgmentSample> samples,
                      const MixtureParams& params) {
    validate(params);
    NeumaierSum acc;
    for (const auto& s : samples) {
        acc.add(std::log(mixture_pmf(s.s, s.k, params)));
    }
    return acc.value();
}

}  // namespace judgedist
