#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "judgedist/io.hpp"
#include "judgedist/simulate.hpp"

using namespace judgedist;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("judgedist_io_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

void write_lines(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("record jsonl round trip preserves everything") {
    TempDir dir;
    GeneratorSpec spec{{0.7, 8, 2, 1.5, 6}, 11, 200, 4};
    auto records = sample_judgments(spec);
    nlohmann::json meta{{"seed", 4}, {"generator", "test"}};
    std::string path = dir.file("records.jsonl");
    write_records_jsonl(path, records, meta);

    RecordFile loaded = read_records_jsonl(path);
    CHECK(loaded.k_max == 11);
    CHECK(loaded.meta["seed"] == 4);
    REQUIRE(loaded.records.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded.records[i].id == records[i].id);
        CHECK(loaded.records[i].s == records[i].s);
        CHECK(loaded.records[i].bits == records[i].bits);
    }

    // writing the same content twice produces identical bytes
    std::string path2 = dir.file("records2.jsonl");
    write_records_jsonl(path2, records, meta);
    CHECK(read_text_file(path) == read_text_file(path2));
}

TEST_CASE("counts-only records are accepted") {
    TempDir dir;
    std::string path = dir.file("counts.jsonl");
    write_lines(path,
                "{\"id\":\"a\",\"k\":11,\"s\":7}\n"
                "{\"id\":\"b\",\"k\":11,\"s\":0}\n");
    RecordFile loaded = read_records_jsonl(path);
    CHECK(loaded.k_max == 11);
    CHECK(loaded.records[0].s == 7);
    CHECK_FALSE(loaded.records[0].bits.has_value());
}

TEST_CASE("malformed record lines name the line number") {
    TempDir dir;
    std::string path = dir.file("bad.jsonl");
    write_lines(path,
                "{\"id\":\"a\",\"k\":11,\"s\":7}\n"
                "{\"id\":\"b\",\"k\":11\n");
    try {
        read_records_jsonl(path);
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }

    std::string path2 = dir.file("bad2.jsonl");
    write_lines(path2, "{\"id\":\"a\",\"k\":11,\"s\":12}\n");
    CHECK_THROWS_AS(read_records_jsonl(path2), std::runtime_error);

    std::string path3 = dir.file("bad3.jsonl");
    write_lines(path3,
                "{\"id\":\"a\",\"k\":11,\"s\":3}\n"
                "{\"id\":\"b\",\"k\":9,\"s\":3}\n");
    try {
        read_records_jsonl(path3);
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("pool size") != std::string::npos);
    }
}

TEST_CASE("missing files raise errors") {
    CHECK_THROWS_AS(read_records_jsonl("/nonexistent/nowhere.jsonl"),
                    std::runtime_error);
    CHECK_THROWS_AS(read_params_json("/nonexistent/nowhere.json"),
                    std::runtime_error);
}

TEST_CASE("embedding jsonl round trip and validation") {
    TempDir dir;
    EmbeddingClusterSpec cluster{{0.5, -1.0, 2.0}, 0.1, 20, "e"};
    EmbeddingSet set = sample_embeddings(cluster, 12);
    std::string path = dir.file("emb.jsonl");
    write_embeddings_jsonl(path, set, nlohmann::json{{"cluster", "test"}});
    EmbeddingSet loaded = read_embeddings_jsonl(path);
    CHECK(loaded.dim == 3);
    REQUIRE(loaded.items.size() == set.items.size());
    CHECK(loaded.items[0].first == set.items[0].first);
    for (std::size_t d = 0; d < 3; ++d) {
        CHECK(loaded.items[0].second[d] ==
              doctest::Approx(set.items[0].second[d]).epsilon(1e-12));
    }

    std::string bad = dir.file("bad_emb.jsonl");
    write_lines(bad,
                "{\"id\":\"a\",\"vec\":[1.0,2.0]}\n"
                "{\"id\":\"b\",\"vec\":[1.0]}\n");
    CHECK_THROWS_AS(read_embeddings_jsonl(bad), std::runtime_error);

    std::string nonfinite = dir.file("nan_emb.jsonl");
    write_lines(nonfinite, "{\"id\":\"a\",\"vec\":[1.0,\"x\"]}\n");
    CHECK_THROWS_AS(read_embeddings_jsonl(nonfinite), std::runtime_error);
}

TEST_CASE("params json round trip") {
    TempDir dir;
    MixtureParams prm{0.7, 8, 2, 1.5, 6};
    std::string path = dir.file("params.json");
    nlohmann::json extra{{"r", 5000}, {"k", 11}, {"config", {{"tol", 1e-6}}}};
    write_params_json(path, prm, extra);
    ParamsFile loaded = read_params_json(path);
    CHECK(loaded.params.w == 0.7);
    CHECK(loaded.params.alpha1 == 8.0);
    CHECK(loaded.params.beta2 == 6.0);
    REQUIRE(loaded.r.has_value());
    CHECK(*loaded.r == 5000);
    REQUIRE(loaded.k.has_value());
    CHECK(*loaded.k == 11);
    CHECK(loaded.extra["config"]["tol"] == 1e-6);

    std::string missing = dir.file("missing.json");
    write_lines(missing, "{\"w\":0.5,\"alpha1\":1.0}\n");
    CHECK_THROWS_AS(read_params_json(missing), std::runtime_error);
}
