#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "midorf/commands.hpp"
#include "midorf/io.hpp"

using namespace midorf;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("midorf_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_tiny_config(const std::string& path, int levels) {
    std::ofstream out(path);
    out << R"({"num_datasets": 1, "n_train": 12, "n_test": 8, "n_val": 6,
               "length_range": [8, 14], "feature_dim": 3, "num_levels": )"
        << levels << R"(, "pool_size": 200})";
}

}  // namespace

TEST_CASE("generate/train/predict/evaluate pipeline runs end to end") {
    TempDir dir;
    write_tiny_config(dir / "cfg.json", 3);
    REQUIRE(run_cli({"generate", "--out", dir / "data", "--seed", "5", "--config",
                     dir / "cfg.json"}) == kExitOk);
    CHECK(fs::exists(dir.path / "data" / "manifest.json"));
    CHECK(fs::exists(dir.path / "data" / "ds0.train.jsonl"));

    REQUIRE(run_cli({"train", "--method", "midorf", "--train", dir / "data/ds0.train.jsonl",
                     "--out", dir / "model.json", "--seed", "3", "--alpha", "0.5",
                     "--max-iter", "40"}) == kExitOk);
    CHECK(fs::exists(dir.path / "model.json"));
    CHECK(fs::exists(dir.path / "model.json.trace.json"));

    REQUIRE(run_cli({"predict", "--model", dir / "model.json", "--data",
                     dir / "data/ds0.test.jsonl", "--out", dir / "preds.jsonl"}) == kExitOk);
    const auto preds = load_predictions(dir / "preds.jsonl");
    const auto test = load_dataset_jsonl(dir / "data/ds0.test.jsonl");
    REQUIRE(preds.size() == test.bags.size());
    for (size_t i = 0; i < preds.size(); ++i) {
        CHECK(preds[i].frame_preds.size() ==
              static_cast<size_t>(test.bags[i].length()));
        double total = 0.0;
        for (double v : preds[i].bag_posterior) total += v;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
        // MIOR support: no frame above the bag prediction
        for (Level l : preds[i].frame_preds) CHECK(l <= preds[i].bag_pred);
    }

    REQUIRE(run_cli({"evaluate", "--pred", dir / "preds.jsonl", "--data",
                     dir / "data/ds0.test.jsonl", "--out", dir / "report.json"}) == kExitOk);
    const std::string report = slurp(dir / "report.json");
    CHECK(report.find("\"sequence\"") != std::string::npos);
    CHECK(report.find("\"frame\"") != std::string::npos);
}

TEST_CASE("same seed reproduces byte-identical datasets and models") {
    TempDir dir;
    write_tiny_config(dir / "cfg.json", 3);
    REQUIRE(run_cli({"generate", "--out", dir / "a", "--seed", "9", "--config",
                     dir / "cfg.json"}) == kExitOk);
    REQUIRE(run_cli({"generate", "--out", dir / "b", "--seed", "9", "--config",
                     dir / "cfg.json"}) == kExitOk);
    CHECK(slurp(dir / "a/ds0.train.jsonl") == slurp(dir / "b/ds0.train.jsonl"));
    CHECK(slurp(dir / "a/ds0.val.jsonl") == slurp(dir / "b/ds0.val.jsonl"));

    setenv("MIDORF_THREADS", "1", 1);
    for (const char* out : {"m1.json", "m2.json"})
        REQUIRE(run_cli({"train", "--method", "sil-or", "--train", dir / "a/ds0.train.jsonl",
                         "--out", dir / out, "--seed", "4", "--alpha", "1.0"}) == kExitOk);
    unsetenv("MIDORF_THREADS");
    CHECK(slurp(dir / "m1.json") == slurp(dir / "m2.json"));
}

TEST_CASE("config overrides propagate to the emitted records") {
    TempDir dir;
    write_tiny_config(dir / "cfg.json", 3);
    REQUIRE(run_cli({"generate", "--out", dir / "d3", "--seed", "1", "--config",
                     dir / "cfg.json"}) == kExitOk);
    const Dataset ds = load_dataset_jsonl(dir / "d3/ds0.train.jsonl");
    CHECK(ds.scale.num_levels <= 3);
    for (const Bag& bag : ds.bags) CHECK(bag.bag_label <= 3);
}

TEST_CASE("exit codes distinguish usage, data and IO failures") {
    TempDir dir;
    // unknown method -> usage error
    CHECK(run_cli({"train", "--method", "bogus", "--train", "x", "--out", "y"}) == kExitUsage);
    // unknown subcommand -> usage error
    CHECK(run_cli({"frobnicate"}) == kExitUsage);
    // missing input file -> data error
    CHECK(run_cli({"train", "--method", "midorf", "--train", dir / "missing.jsonl", "--out",
                   dir / "m.json"}) == kExitData);
    // corrupt data -> data error
    std::ofstream(dir / "bad.jsonl") << "{broken\n";
    CHECK(run_cli({"train", "--method", "midorf", "--train", dir / "bad.jsonl", "--out",
                   dir / "m.json"}) == kExitData);
}

TEST_CASE("label range violations are rejected at the entry point") {
    TempDir dir;
    std::ofstream(dir / "range.jsonl")
        << R"({"id":"a","label":7,"instances":[[0.1,0.2]]})" << "\n"
        << R"({"id":"b","label":0,"instances":[[0.3,0.4]]})" << "\n";
    // forcing --levels 3 makes label 7 out of range
    CHECK(run_cli({"train", "--method", "midorf", "--train", dir / "range.jsonl", "--out",
                   dir / "m.json", "--levels", "3"}) == kExitData);
}

TEST_CASE("tiny benchmark command produces the summary artifacts") {
    TempDir dir;
    write_tiny_config(dir / "cfg.json", 3);
    REQUIRE(run_cli({"benchmark", "--seed", "2", "--out", dir / "bench", "--config",
                     dir / "cfg.json", "--methods", "sil-or", "mir", "--max-iter", "40"}) ==
            kExitOk);
    CHECK(fs::exists(dir.path / "bench" / "summary.json"));
    CHECK(fs::exists(dir.path / "bench" / "summary.txt"));
    CHECK(fs::exists(dir.path / "bench" / "ds0" / "sil-or.preds.jsonl"));
    CHECK(fs::exists(dir.path / "bench" / "ds0" / "mir.report.json"));
    const std::string table = slurp(dir / "bench/summary.txt");
    CHECK(table.find("sil-or") != std::string::npos);
    CHECK(table.find("CORR") != std::string::npos);
}
