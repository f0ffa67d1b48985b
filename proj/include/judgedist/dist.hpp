#ifndef JUDGEDIST_DIST_HPP
#define JUDGEDIST_DIST_HPP

#include "judgedist/types.hpp"

namespace judgedist {

/// Throws std::domain_error unless 0 <= w <= 1 and all shapes > 0.
void validate(const MixtureParams& params);

/// Majority threshold: fewer than ceil(k/2) correct judges is a failure.
/// k must be odd so ties cannot occur.
int majority_cutoff(int k);

/// ln B(a, b); a, b > 0. Finite for a, b up to ~1e9.
double log_beta(double a, double b);

/// C(k,s) p^s (1-p)^(k-s), evaluated in log space.
double binomial_pmf(int s, int k, double p);

/// P(S < ceil(k/2)) for S ~ Binomial(k, p); k must be odd.
double binomial_error_rate(int k, double p);

/// C(k,s) B(s+alpha, k-s+beta) / B(alpha, beta), evaluated in log space.
double betabinomial_pmf(int s, int k, double alpha, double beta);

double mixture_pmf(int s, int k, const MixtureParams& params);

/// P(S < ceil(k/2)) under the mixture; k must be odd.
double mixture_error_rate(int k, const MixtureParams& params);

/// E[S] = k (w a1/(a1+b1) + (1-w) a2/(a2+b2)).
double mixture_mean(int k, const MixtureParams& params);

}  // namespace judgedist

#endif
