#include "judgedist/transfer.hpp"

#include <cmath>
#include <stdexcept>

#include "judgedist/dist.hpp"
#include "judgedist/numerics.hpp"

namespace judgedist {

void EmbeddingSet::validate() const {
    if (items.empty()) throw std::domain_error("EmbeddingSet: no vectors");
    if (dim < 1) throw std::domain_error("EmbeddingSet: dim must be >= 1");
    for (const auto& [id, vec] : items) {
        if (vec.size() != dim) {
            throw std::domain_error("EmbeddingSet: vector '" + id +
                                    "' has mismatched dimension");
        }
    }
}

void TransferConfig::validate() const {
    if (!(steepness > 0.0)) {
        throw std::invalid_argument("TransferConfig: steepness must be > 0");
    }
    if (threshold < -1.0 || threshold > 1.0) {
        throw std::invalid_argument("TransferConfig: threshold must be in [-1, 1]");
    }
}

std::vector<double> mean_embedding(const EmbeddingSet& set) {
    set.validate();
    std::vector<NeumaierSum> acc(set.dim);
    for (const auto& [id, vec] : set.items) {
        for (std::size_t d = 0; d < set.dim; ++d) acc[d].add(vec[d]);
    }
    std::vector<double> mean(set.dim);
    for (std::size_t d = 0; d < set.dim; ++d) {
        mean[d] = acc[d].value() / static_cast<double>(set.items.size());
    }
    return mean;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size() || u.empty()) {
        throw std::domain_error("cosine_similarity: dimension mismatch");
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        throw std::domain_error("cosine_similarity: zero vector");
    }
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

double similarity(std::span<const double> u, std::span<const double> v,
                  SimilarityKind kind) {
    if (kind == SimilarityKind::cosine) return cosine_similarity(u, v);
    if (u.size() != v.size() || u.empty()) {
        throw std::domain_error("similarity: dimension mismatch");
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double d = u[i] - v[i];
        sq += d * d;
    }
    if (sq == 0.0) {
        throw std::domain_error(
            "similarity: zero distance in inverse-Euclidean mode");
    }
    return 1.0 / std::sqrt(sq);
}

namespace {

double size_term(long r, SizeWeight mode) {
    if (mode == SizeWeight::log_size) {
        if (r < 2) {
            throw std::domain_error("transfer_weight: log size weighting needs r >= 2");
        }
        return std::log(static_cast<double>(r));
    }
    if (r < 1) throw std::domain_error("transfer_weight: r must be >= 1");
    return static_cast<double>(r);
}

double gated_weight(double size, double sim, const TransferConfig& cfg) {
    if (cfg.gate == Gate::sigmoid) {
        return size * sigmoid(cfg.steepness * (sim - cfg.threshold));
    }
    // Ungated ablation: weight is size * similarity, clamped so the
    // contract of a non-negative weight survives negative cosines.
    return std::max(0.0, size * sim);
}

}  // namespace

double transfer_weight(const SourceDataset& source,
                       std::span<const double> target_mean,
                       const TransferConfig& config) {
    config.validate();
    double sim = similarity(target_mean, source.mean_embedding, config.similarity);
    return gated_weight(size_term(source.r, config.size_weight), sim, config);
}

MixtureParams blend_parameters(const SourceDataset& target,
                               std::span<const SourceDataset> sources,
                               std::span<const double> weights) {
    if (weights.size() != sources.size() + 1) {
        throw std::invalid_argument(
            "blend_parameters: need one weight per dataset including the target");
    }
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) {
            throw std::domain_error("blend_parameters: negative weight");
        }
        total += w;
    }
    if (total <= 0.0) {
        throw std::domain_error("blend_parameters: all weights are zero");
    }
    auto at = [&](std::size_t i) -> const MixtureParams& {
        return i == 0 ? target.params : sources[i - 1].params;
    };
    MixtureParams out{0.0, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double lam = weights[i] / total;
        const MixtureParams& p = at(i);
        out.w += lam * p.w;
        out.alpha1 += lam * p.alpha1;
        out.beta1 += lam * p.beta1;
        out.alpha2 += lam * p.alpha2;
        out.beta2 += lam * p.beta2;
    }
    validate(out);
    return out;
}

TransferEstimate transfer_estimate(std::span<const JudgmentSample> target_samples,
                                   const EmbeddingSet& target_embeddings,
                                   std::span<const SourceData> sources,
                                   const EmConfig& em_config,
                                   const TransferConfig& config) {
    config.validate();
    if (target_samples.size() < 2) {
        throw std::invalid_argument("transfer_estimate: need >= 2 target samples");
    }

    TransferEstimate result;
    auto [target_fit, trace] = fit_mixture(target_samples, em_config);
    (void)trace;
    result.target_only = target_fit;

    SourceDataset target;
    target.params = target_fit;
    target.r = static_cast<long>(target_samples.size());
    target.mean_embedding = mean_embedding(target_embeddings);

    // lambda_0: the target scored against itself, self-similarity exactly 1.
    double self_sim = 1.0;
    result.similarities.push_back(self_sim);
    result.sizes.push_back(target.r);
    result.weights.push_back(
        gated_weight(size_term(target.r, config.size_weight), self_sim, config));

    std::vector<SourceDataset> fitted;
    fitted.reserve(sources.size());
    for (const auto& src : sources) {
        SourceDataset entry;
        if (src.params.has_value()) {
            entry.params = *src.params;
            validate(entry.params);
            entry.r = src.fitted_r.value_or(2);
        } else if (src.samples.has_value()) {
            auto [prm, tr] = fit_mixture(*src.samples, em_config);
            (void)tr;
            entry.params = prm;
            entry.r = static_cast<long>(src.samples->size());
        } else {
            throw std::invalid_argument(
                "transfer_estimate: source provides neither samples nor params");
        }
        entry.mean_embedding = mean_embedding(src.embeddings);
        if (entry.mean_embedding.size() != target.mean_embedding.size()) {
            throw std::domain_error(
                "transfer_estimate: embedding dimension mismatch across datasets");
        }
        double sim =
            similarity(target.mean_embedding, entry.mean_embedding, config.similarity);
        result.similarities.push_back(sim);
        result.sizes.push_back(entry.r);
        result.weights.push_back(
            gated_weight(size_term(entry.r, config.size_weight), sim, config));
        fitted.push_back(std::move(entry));
    }

    result.blended = blend_parameters(target, fitted, result.weights);
    return result;
}

}  // namespace judgedist
