#ifndef JUDGEDIST_TRANSFER_HPP
#define JUDGEDIST_TRANSFER_HPP

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "judgedist/em.hpp"
#include "judgedist/types.hpp"

namespace judgedist {

/// Id-keyed embedding vectors of one dataset, kept in insertion order.
struct EmbeddingSet {
    std::size_t dim = 0;
    std::vector<std::pair<std::string, std::vector<double>>> items;

    void validate() const;
};

/// A source dataset's fitted mixture, the sample count it was fitted on,
/// and its mean embedding.
struct SourceDataset {
    MixtureParams params;
    long r = 0;
    std::vector<double> mean_embedding;
};

enum class SizeWeight { log_size, linear };
enum class SimilarityKind { cosine, inverse_euclidean };
enum class Gate { sigmoid, none };

struct TransferConfig {
    double steepness = 10.0;
    double threshold = 0.7;
    SizeWeight size_weight = SizeWeight::log_size;
    SimilarityKind similarity = SimilarityKind::cosine;
    Gate gate = Gate::sigmoid;

    void validate() const;
};

std::vector<double> mean_embedding(const EmbeddingSet& set);

/// u . v / (|u| |v|); both vectors must be non-zero and of equal length.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

double similarity(std::span<const double> u, std::span<const double> v,
                  SimilarityKind kind);

/// Transfer weight of one source against the target's mean embedding:
///   sigmoid gate: sizeterm(r) * logistic(steepness * (sim - threshold))
///   no gate:      max(0, sizeterm(r) * sim)
/// with sizeterm = ln or identity per config. Log size weighting
/// requires r >= 2.
double transfer_weight(const SourceDataset& source,
                       std::span<const double> target_mean,
                       const TransferConfig& config);

/// Weighted average of each mixture parameter over {target, sources}
/// using weights[0..m]; weights must be non-negative and not all zero.
MixtureParams blend_parameters(const SourceDataset& target,
                               std::span<const SourceDataset> sources,
                               std::span<const double> weights);

/// One source for transfer_estimate: either raw samples (fitted here)
/// or pre-fitted params with the count they were fitted on.
struct SourceData {
    std::optional<std::vector<JudgmentSample>> samples;
    std::optional<MixtureParams> params;
    std::optional<long> fitted_r;
    EmbeddingSet embeddings;
};

struct TransferEstimate {
    MixtureParams blended;
    MixtureParams target_only;
    std::vector<double> weights;       // lambda_0 .. lambda_m
    std::vector<double> similarities;  // entry 0 is the target's self-similarity
    std::vector<long> sizes;
};

/// Fits the target, fits or loads each source, computes the transfer
/// weights (lambda_0 uses self-similarity 1), and blends.
TransferEstimate transfer_estimate(std::span<const JudgmentSample> target_samples,
                                   const EmbeddingSet& target_embeddings,
                                   std::span<const SourceData> sources,
                                   const EmConfig& em_config,
                                   const TransferConfig& config);

}  // namespace judgedist

#endif
