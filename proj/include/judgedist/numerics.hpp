#ifndef JUDGEDIST_NUMERICS_HPP
#define JUDGEDIST_NUMERICS_HPP

#include <cmath>

namespace judgedist {

/// Neumaier compensated summation. Keeps reductions order-stable enough
/// that blocked parallel sums agree with serial ones far below any
/// convergence tolerance in use.
struct NeumaierSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }

    double value() const { return sum + comp; }
};

inline double sigmoid(double x) {
    if (x >= 0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

/// ln C(n, r) via log-gamma; exact enough for n up to 10^9.
inline double log_choose(double n, double r) {
    return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

}  // namespace judgedist

#endif
