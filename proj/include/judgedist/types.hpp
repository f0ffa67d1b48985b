#ifndef JUDGEDIST_TYPES_HPP
#define JUDGEDIST_TYPES_HPP

#include <bit>
#include <cstdint>
#include <optional>
#include <string>

namespace judgedist {

/// Two-component Beta-Binomial mixture: w * BB(k, alpha1, beta1) +
/// (1 - w) * BB(k, alpha2, beta2). Component 1 is conventionally the
/// high-accuracy one (the fitters keep that orientation).
struct MixtureParams {
    double w = 0.5;
    double alpha1 = 1.0;
    double beta1 = 1.0;
    double alpha2 = 1.0;
    double beta2 = 1.0;
};

/// One labeled observation: s of k judges were correct.
struct JudgmentSample {
    int s = 0;
    int k = 1;
};

/// One dataset item with per-judge correctness. `bits` holds the
/// individual verdicts when known (bit i = judge i correct, k <= 64);
/// counts-only records carry just s.
struct JudgmentRecord {
    std::string id;
    int k = 0;
    int s = 0;
    std::optional<std::uint64_t> bits;
};

inline JudgmentSample to_sample(const JudgmentRecord& rec) {
    return JudgmentSample{rec.s, rec.k};
}

inline int popcount_bits(std::uint64_t bits) {
    return std::popcount(bits);
}

}  // namespace judgedist

#endif
