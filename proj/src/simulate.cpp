#include "judgedist/simulate.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

#include "judgedist/dist.hpp"
#include "judgedist/rng.hpp"

namespace judgedist {

namespace {

JudgmentRecord generate_record(const GeneratorSpec& spec, long index) {
    rng::SplitMix64 g(rng::derive_stream(spec.seed, static_cast<std::uint64_t>(index)));
    const MixtureParams& p = spec.params;
    bool first = g.next_double() < p.w;
    double accuracy = first ? rng::sample_beta(g, p.alpha1, p.beta1)
                            : rng::sample_beta(g, p.alpha2, p.beta2);
    std::uint64_t bits = 0;
    int s = 0;
    for (int j = 0; j < spec.k; ++j) {
        if (g.next_double() < accuracy) {
            bits |= (1ull << j);
            ++s;
        }
    }
    JudgmentRecord rec;
    rec.id = "r" + std::to_string(index);
    rec.k = spec.k;
    rec.s = s;
    rec.bits = bits;
    return rec;
}

}  // namespace

void GeneratorSpec::validate() const {
    judgedist::validate(params);
    if (k < 1 || k > 64) {
        throw std::domain_error("GeneratorSpec: k must be in [1, 64]");
    }
    if (n < 1) throw std::domain_error("GeneratorSpec: n must be >= 1");
}

std::vector<JudgmentRecord> sample_judgments(const GeneratorSpec& spec) {
    spec.validate();
    std::vector<JudgmentRecord> records(static_cast<std::size_t>(spec.n));
#pragma omp parallel for schedule(static)
    for (long i = 0; i < spec.n; ++i) {
        records[static_cast<std::size_t>(i)] = generate_record(spec, i);
    }
    return records;
}

std::vector<JudgmentRecord> sample_judgments_serial(const GeneratorSpec& spec) {
    spec.validate();
    std::vector<JudgmentRecord> records;
    records.reserve(static_cast<std::size_t>(spec.n));
    for (long i = 0; i < spec.n; ++i) {
        records.push_back(generate_record(spec, i));
    }
    return records;
}

SampleStream make_generator_stream(const GeneratorSpec& spec) {
    spec.validate();
    auto index = std::make_shared<long>(0);
    return [spec, index]() -> std::optional<JudgmentSample> {
        if (*index >= spec.n) return std::nullopt;
        return to_sample(generate_record(spec, (*index)++));
    };
}

std::vector<double> empirical_pmf(std::span<const JudgmentRecord> records, int k) {
    if (k < 1) throw std::domain_error("empirical_pmf: k must be >= 1");
    if (records.empty()) throw std::invalid_argument("empirical_pmf: no records");
    for (const auto& rec : records) {
        if (rec.k < k || rec.s > k) {
            throw std::domain_error("empirical_pmf: record '" + rec.id +
                                    "' incompatible with pool size " +
                                    std::to_string(k));
        }
    }
    std::size_t n = records.size();
    constexpr std::size_t kBlock = 8192;
    std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<std::vector<long>> partial(nblocks,
                                           std::vector<long>(k + 1, 0));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
        std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        std::size_t hi = std::min(lo + kBlock, n);
        for (std::size_t i = lo; i < hi; ++i) {
            ++partial[b][static_cast<std::size_t>(records[i].s)];
        }
    }
    std::vector<double> pmf(static_cast<std::size_t>(k) + 1, 0.0);
    for (const auto& block : partial) {
        for (int s = 0; s <= k; ++s) pmf[static_cast<std::size_t>(s)] += block[s];
    }
    for (auto& v : pmf) v /= static_cast<double>(n);
    return pmf;
}

double empirical_majority_failure(std::span<const JudgmentRecord> records, int k) {
    int cutoff = majority_cutoff(k);
    std::vector<double> pmf = empirical_pmf(records, k);
    double fail = 0.0;
    for (int s = 0; s < cutoff; ++s) fail += pmf[static_cast<std::size_t>(s)];
    return fail;
}

void EmbeddingClusterSpec::validate() const {
    if (center.empty()) {
        throw std::domain_error("EmbeddingClusterSpec: empty center");
    }
    if (spread < 0.0) {
        throw std::domain_error("EmbeddingClusterSpec: spread must be >= 0");
    }
    if (count < 1) throw std::domain_error("EmbeddingClusterSpec: count must be >= 1");
}

EmbeddingSet sample_embeddings(const EmbeddingClusterSpec& spec,
                               std::uint64_t seed) {
    spec.validate();
    EmbeddingSet set;
    set.dim = spec.center.size();
    set.items.resize(static_cast<std::size_t>(spec.count));
#pragma omp parallel for schedule(static)
    for (long i = 0; i < spec.count; ++i) {
        rng::SplitMix64 g(rng::derive_stream(seed, static_cast<std::uint64_t>(i)));
        std::vector<double> vec(set.dim);
        for (std::size_t d = 0; d < set.dim; ++d) {
            vec[d] = spec.center[d] +
                     (spec.spread > 0.0 ? spec.spread * rng::sample_normal(g) : 0.0);
        }
        set.items[static_cast<std::size_t>(i)] = {
            spec.id_prefix + std::to_string(i), std::move(vec)};
    }
    return set;
}

}  // namespace judgedist
