#include "judgedist/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace judgedist {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, std::size_t line,
                       const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

json parse_line(const std::string& path, std::size_t line_no,
                const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        fail(path, line_no, "malformed JSON object");
    }
    return j;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path + " for reading");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    return out;
}

}  // namespace

RecordFile read_records_jsonl(const std::string& path) {
    std::ifstream in = open_in(path);
    RecordFile file;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_line(path, line_no, line);
        if (j.contains("_meta")) {
            if (line_no == 1) {
                file.meta = j["_meta"];
                continue;
            }
            fail(path, line_no, "\"_meta\" only allowed on the first line");
        }
        JudgmentRecord rec;
        if (!j.contains("id") || !j["id"].is_string()) {
            fail(path, line_no, "missing string field \"id\"");
        }
        rec.id = j["id"].get<std::string>();
        if (j.contains("bits")) {
            if (!j["bits"].is_array() || j["bits"].empty() ||
                j["bits"].size() > 64) {
                fail(path, line_no, "\"bits\" must be a bool array of length 1..64");
            }
            std::uint64_t bits = 0;
            int s = 0;
            int k = static_cast<int>(j["bits"].size());
            for (int b = 0; b < k; ++b) {
                const auto& v = j["bits"][static_cast<std::size_t>(b)];
                if (!v.is_boolean()) fail(path, line_no, "\"bits\" entries must be bool");
                if (v.get<bool>()) {
                    bits |= (1ull << b);
                    ++s;
                }
            }
            rec.k = k;
            rec.s = s;
            rec.bits = bits;
        } else if (j.contains("k") && j.contains("s")) {
            if (!j["k"].is_number_integer() || !j["s"].is_number_integer()) {
                fail(path, line_no, "\"k\" and \"s\" must be integers");
            }
            rec.k = j["k"].get<int>();
            rec.s = j["s"].get<int>();
            if (rec.k < 1 || rec.k > 64 || rec.s < 0 || rec.s > rec.k) {
                fail(path, line_no, "need 1 <= k <= 64 and 0 <= s <= k");
            }
        } else {
            fail(path, line_no, "record needs either \"bits\" or \"k\"+\"s\"");
        }
        if (file.k_max == 0) {
            file.k_max = rec.k;
        } else if (rec.k != file.k_max) {
            fail(path, line_no, "pool size differs from the rest of the file");
        }
        file.records.push_back(std::move(rec));
    }
    if (file.records.empty()) {
        throw std::runtime_error(path + ": no judgment records");
    }
    return file;
}

void write_records_jsonl(const std::string& path,
                         std::span<const JudgmentRecord> records,
                         const json& meta) {
    std::ofstream out = open_out(path);
    if (!meta.is_null()) {
        out << json{{"_meta", meta}}.dump() << "\n";
    }
    for (const auto& rec : records) {
        json j;
        j["id"] = rec.id;
        if (rec.bits.has_value()) {
            std::vector<bool> bits(static_cast<std::size_t>(rec.k));
            for (int b = 0; b < rec.k; ++b) {
                bits[static_cast<std::size_t>(b)] = (*rec.bits >> b) & 1ull;
            }
            j["bits"] = bits;
        } else {
            j["k"] = rec.k;
            j["s"] = rec.s;
        }
        out << j.dump() << "\n";
    }
}

EmbeddingSet read_embeddings_jsonl(const std::string& path) {
    std::ifstream in = open_in(path);
    EmbeddingSet set;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_line(path, line_no, line);
        if (j.contains("_meta")) {
            if (line_no == 1) continue;
            fail(path, line_no, "\"_meta\" only allowed on the first line");
        }
        if (!j.contains("id") || !j["id"].is_string() || !j.contains("vec") ||
            !j["vec"].is_array() || j["vec"].empty()) {
            fail(path, line_no, "need string \"id\" and non-empty array \"vec\"");
        }
        std::vector<double> vec;
        vec.reserve(j["vec"].size());
        for (const auto& v : j["vec"]) {
            if (!v.is_number()) fail(path, line_no, "\"vec\" entries must be numbers");
            double x = v.get<double>();
            if (!std::isfinite(x)) fail(path, line_no, "\"vec\" entries must be finite");
            vec.push_back(x);
        }
        if (set.dim == 0) {
            set.dim = vec.size();
        } else if (vec.size() != set.dim) {
            fail(path, line_no, "vector length differs from the rest of the file");
        }
        set.items.emplace_back(j["id"].get<std::string>(), std::move(vec));
    }
    if (set.items.empty()) {
        throw std::runtime_error(path + ": no embedding vectors");
    }
    return set;
}

void write_embeddings_jsonl(const std::string& path, const EmbeddingSet& set,
                            const json& meta) {
    set.validate();
    std::ofstream out = open_out(path);
    if (!meta.is_null()) {
        out << json{{"_meta", meta}}.dump() << "\n";
    }
    for (const auto& [id, vec] : set.items) {
        out << json{{"id", id}, {"vec", vec}}.dump() << "\n";
    }
}

ParamsFile read_params_json(const std::string& path) {
    std::ifstream in = open_in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    json j = json::parse(buffer.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw std::runtime_error(path + ": malformed params JSON");
    }
    for (const char* field : {"w", "alpha1", "beta1", "alpha2", "beta2"}) {
        if (!j.contains(field) || !j[field].is_number()) {
            throw std::runtime_error(path + ": missing numeric field \"" +
                                     std::string(field) + "\"");
        }
    }
    ParamsFile file;
    file.params.w = j["w"].get<double>();
    file.params.alpha1 = j["alpha1"].get<double>();
    file.params.beta1 = j["beta1"].get<double>();
    file.params.alpha2 = j["alpha2"].get<double>();
    file.params.beta2 = j["beta2"].get<double>();
    if (j.contains("r") && j["r"].is_number_integer()) {
        file.r = j["r"].get<long>();
    }
    if (j.contains("k") && j["k"].is_number_integer()) {
        file.k = j["k"].get<int>();
    }
    file.extra = j;
    return file;
}

void write_params_json(const std::string& path, const MixtureParams& params,
                       const json& extra) {
    json j = extra.is_null() ? json::object() : extra;
    j["w"] = params.w;
    j["alpha1"] = params.alpha1;
    j["beta1"] = params.beta1;
    j["alpha2"] = params.alpha2;
    j["beta2"] = params.beta2;
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out = open_out(path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in = open_in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace judgedist
