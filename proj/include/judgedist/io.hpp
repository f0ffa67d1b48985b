#ifndef JUDGEDIST_IO_HPP
#define JUDGEDIST_IO_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "judgedist/transfer.hpp"
#include "judgedist/types.hpp"

namespace judgedist {

/// Judgment record JSONL: one object per line, either
///   {"id": "...", "bits": [true, false, ...]}        (per-judge verdicts)
/// or {"id": "...", "k": 11, "s": 7}                  (counts only).
/// An optional first line {"_meta": {...}} carries provenance. All
/// records in a file must share the same pool size.
struct RecordFile {
    std::vector<JudgmentRecord> records;
    int k_max = 0;
    nlohmann::json meta;  // null when absent
};

RecordFile read_records_jsonl(const std::string& path);
void write_records_jsonl(const std::string& path,
                         std::span<const JudgmentRecord> records,
                         const nlohmann::json& meta);

/// Embedding JSONL: {"id": "...", "vec": [finite doubles]} per line,
/// uniform vector length; optional leading "_meta" line.
EmbeddingSet read_embeddings_jsonl(const std::string& path);
void write_embeddings_jsonl(const std::string& path, const EmbeddingSet& set,
                            const nlohmann::json& meta);

/// Params JSON: {"w", "alpha1", "beta1", "alpha2", "beta2"} plus optional
/// "r" (fit sample count) and "k"; other fields are preserved in `extra`.
struct ParamsFile {
    MixtureParams params;
    std::optional<long> r;
    std::optional<int> k;
    nlohmann::json extra;
};

ParamsFile read_params_json(const std::string& path);
void write_params_json(const std::string& path, const MixtureParams& params,
                       const nlohmann::json& extra);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace judgedist

#endif
