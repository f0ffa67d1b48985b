#ifndef JUDGEDIST_SIMULATE_HPP
#define JUDGEDIST_SIMULATE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "judgedist/conformal.hpp"
#include "judgedist/transfer.hpp"
#include "judgedist/types.hpp"

namespace judgedist {

/// Generative model: per record, pick a component with probability
/// (w, 1-w), draw p from its Beta, then k independent correctness bits
/// with probability p. Each record uses its own derived sub-stream, so
/// parallel generation is bit-identical to sequential.
struct GeneratorSpec {
    MixtureParams params;
    int k = 11;
    long n = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

std::vector<JudgmentRecord> sample_judgments(const GeneratorSpec& spec);

/// Sequential reference; must match sample_judgments byte for byte.
std::vector<JudgmentRecord> sample_judgments_serial(const GeneratorSpec& spec);

/// Lazy stream over the generator: yields record 0, 1, ... up to n-1,
/// then exhausts. Draws record i on demand from its derived stream, so
/// the values equal sample_judgments(spec) element-wise.
SampleStream make_generator_stream(const GeneratorSpec& spec);

/// Frequency of each s over {0..k}. All records must have pool size >= k
/// and s <= k (intended for pools of exactly k).
std::vector<double> empirical_pmf(std::span<const JudgmentRecord> records, int k);

/// Fraction of records whose majority vote fails (s < ceil(k/2), pool == k).
double empirical_majority_failure(std::span<const JudgmentRecord> records, int k);

/// Isotropic Gaussian cluster of embedding vectors around `center`.
struct EmbeddingClusterSpec {
    std::vector<double> center;
    double spread = 0.0;
    long count = 0;
    std::string id_prefix = "e";

    void validate() const;
};

EmbeddingSet sample_embeddings(const EmbeddingClusterSpec& spec,
                               std::uint64_t seed);

}  // namespace judgedist

#endif
