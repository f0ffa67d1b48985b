#include "judgedist/dist.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "judgedist/numerics.hpp"

namespace judgedist {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::domain_error(what);
}

void require_count_range(int s, int k) {
    require(k >= 1, "ensemble size k must be >= 1");
    require(s >= 0 && s <= k, "count s must satisfy 0 <= s <= k");
}

void require_odd(int k) {
    require(k >= 1, "ensemble size k must be >= 1");
    require(k % 2 == 1, "majority voting requires odd k");
}

}  // namespace

void validate(const MixtureParams& p) {
    require(p.w >= 0.0 && p.w <= 1.0, "mixture weight w must be in [0, 1]");
    require(p.alpha1 > 0.0 && p.beta1 > 0.0 && p.alpha2 > 0.0 && p.beta2 > 0.0,
            "Beta shape parameters must be strictly positive");
}

int majority_cutoff(int k) {
    require_odd(k);
    return (k + 1) / 2;  // ceil(k/2), k odd
}

double log_beta(double a, double b) {
    require(a > 0.0 && b > 0.0, "log_beta requires a > 0 and b > 0");
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double binomial_pmf(int s, int k, double p) {
    require_count_range(s, k);
    require(p >= 0.0 && p <= 1.0, "probability p must be in [0, 1]");
    if (p == 0.0) return s == 0 ? 1.0 : 0.0;
    if (p == 1.0) return s == k ? 1.0 : 0.0;
    double lp = log_choose(k, s) + s * std::log(p) + (k - s) * std::log1p(-p);
    return std::exp(lp);
}

double binomial_error_rate(int k, double p) {
    int cutoff = majority_cutoff(k);
    NeumaierSum acc;
    for (int s = 0; s < cutoff; ++s) acc.add(binomial_pmf(s, k, p));
    return acc.value();
}

double betabinomial_pmf(int s, int k, double alpha, double beta) {
    require_count_range(s, k);
    double lp = log_choose(k, s) + log_beta(s + alpha, k - s + beta) -
                log_beta(alpha, beta);
    return std::exp(lp);
}

double mixture_pmf(int s, int k, const MixtureParams& params) {
    validate(params);
    double p1 = params.w > 0.0
                    ? betabinomial_pmf(s, k, params.alpha1, params.beta1)
                    : 0.0;
    double p2 = params.w < 1.0
                    ? betabinomial_pmf(s, k, params.alpha2, params.beta2)
                    : 0.0;
    return params.w * p1 + (1.0 - params.w) * p2;
}

double mixture_error_rate(int k, const MixtureParams& params) {
    int cutoff = majority_cutoff(k);
    NeumaierSum acc;
    for (int s = 0; s < cutoff; ++s) acc.add(mixture_pmf(s, k, params));
    return acc.value();
}

double mixture_mean(int k, const MixtureParams& params) {
    validate(params);
    if (k < 1) throw std::domain_error("ensemble size k must be >= 1");
    double m1 = params.alpha1 / (params.alpha1 + params.beta1);
    double m2 = params.alpha2 / (params.alpha2 + params.beta2);
    return k * (params.w * m1 + (1.0 - params.w) * m2);
}

}  // namespace judgedist
