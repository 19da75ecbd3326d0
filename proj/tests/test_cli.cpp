#include <filesystem>
#include <fstream>

#include "atlas/cli/commands.hpp"
#include "atlas/io.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace atlas;
using namespace atlas::cli;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string tiny_config_json(const std::string& out_dir) {
    return R"({
  "version": 1,
  "seed": 11,
  "out": ")" + out_dir + R"(",
  "workers": 2,
  "dataset": {"system": "lorenz63", "T": 60, "n_traj": 2},
  "models": ["mlp", "esn"],
  "seeds_per_model": 2,
  "train": {"max_epochs": 3, "batch_size": 16, "L": 4, "H": 3, "latent_dim": 4,
            "width": 8, "depth": 1, "reservoir_size": 16},
  "alignment": {"n_samples": 50, "n_anchors": 8, "seed": 5},
  "ablation": {"K_list": [2, 8], "repeats": 5, "model": "mlp", "random_baseline_K": 8},
  "probe": {"lambda": 0.001, "train_fraction": 0.7}
})";
}

fs::path fresh_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("atlas_cli_" + tag);
    fs::remove_all(p);
    return p;
}

std::uint64_t file_hash(const fs::path& p) {
    const std::string text = io::read_text(p);
    return io::fnv1a(text);
}

}  // namespace

TEST_CASE("config: unknown keys are rejected everywhere") {
    CHECK_THROWS_AS(parse_config_text(R"({"version":1,"bogus":3})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"dataset":{"system":"lorenz63","typo":1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"train":{"max_epochz":5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"models":[{"family":"mlp","wdith":3}]})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("not json"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"version":2})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"dataset":{"system":"lorenz63","params":{"zeta":1.0}}})"),
                    ConfigError);
}

TEST_CASE("config: model names parse to the paper grid") {
    CHECK(model_from_name("mlp").family == fc::Family::mlp);
    CHECK(model_from_name("k-mlp").propagator == fc::Propagator::koopman);
    CHECK(model_from_name("n-tf").family == fc::Family::transformer);
    CHECK(model_from_name("n-tf").propagator == fc::Propagator::node);
    CHECK(model_from_name("a-rnn").family == fc::Family::a_rnn);
    CHECK(model_from_name("esn").family == fc::Family::esn);
    CHECK_THROWS_AS(model_from_name("cnn"), ConfigError);
    CHECK(default_config().models.size() == 7);
}

TEST_CASE("config hash is stable and reflects content") {
    ExperimentConfig a = parse_config_text(tiny_config_json("/tmp/x"));
    ExperimentConfig b = parse_config_text(tiny_config_json("/tmp/x"));
    CHECK(config_hash(a) == config_hash(b));
    b.seed = 99;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("generate: manifest, meta.json, rerun gives identical hashes") {
    const fs::path out = fresh_dir("generate");
    ExperimentConfig cfg = parse_config_text(tiny_config_json(out.string()));
    cmd_generate(cfg);
    REQUIRE(fs::exists(out / "dataset" / "meta.json"));
    REQUIRE(fs::exists(out / "manifest_generate.json"));
    const auto h1 = file_hash(out / "dataset" / "train.bin");

    const fs::path out2 = fresh_dir("generate2");
    ExperimentConfig cfg2 = parse_config_text(tiny_config_json(out2.string()));
    cmd_generate(cfg2);
    CHECK(file_hash(out2 / "dataset" / "train.bin") == h1);
    CHECK(file_hash(out2 / "dataset" / "meta.json") != 0);
    fs::remove_all(out);
    fs::remove_all(out2);
}

TEST_CASE("full pipeline is byte-identical across reruns") {
    const fs::path out1 = fresh_dir("e2e_a");
    const fs::path out2 = fresh_dir("e2e_b");
    for (const fs::path& out : {out1, out2}) {
        ExperimentConfig cfg = parse_config_text(tiny_config_json(out.string()));
        cmd_generate(cfg);
        cmd_train(cfg);
        cmd_align(cfg);
        cmd_ablate(cfg);
        cmd_probe(cfg);
    }
    for (const char* name : {"training.csv", "alignment.csv", "ablation.csv", "probe.csv", "heatmap.json"}) {
        CAPTURE(name);
        CHECK(io::read_text(out1 / name) == io::read_text(out2 / name));
    }
    // CSVs carry the stamp line and a header row.
    const std::string align_text = io::read_text(out1 / "alignment.csv");
    CHECK(align_text.rfind("# config_hash=", 0) == 0);
    CHECK(align_text.find("model_a,model_b,seed_a,seed_b,cosine,t1,rank") != std::string::npos);

    // Alignment values are within metric bounds and the grid includes the
    // true system.
    {
        std::istringstream lines(align_text);
        std::string line;
        std::getline(lines, line);  // stamp
        std::getline(lines, line);  // header
        bool saw_true = false;
        int rows = 0;
        while (std::getline(lines, line)) {
            if (line.empty()) continue;
            ++rows;
            std::vector<std::string> cells;
            std::istringstream cs(line);
            std::string cell;
            while (std::getline(cs, cell, ',')) cells.push_back(cell);
            REQUIRE(cells.size() == 7);
            if (cells[0] == "true_system") saw_true = true;
            const double cosine = std::stod(cells[4]);
            const double t1 = std::stod(cells[5]);
            const double rank = std::stod(cells[6]);
            CHECK(cosine >= -1.0);
            CHECK(cosine <= 1.0);
            CHECK(t1 >= 0.0);
            CHECK(t1 <= 1.0);
            CHECK(rank >= -1.0);
            CHECK(rank <= 1.0);
        }
        CHECK(saw_true);
        CHECK(rows == 5 * 4 / 2);  // 4 instances + true system, all unordered pairs
    }

    // Heatmap: true_system first (figure ordering), self cells equal 1.
    const json heat = json::parse(io::read_text(out1 / "heatmap.json"));
    REQUIRE(heat.at("order").size() == 3);  // true_system, mlp, esn
    CHECK(heat.at("order")[0] == "true_system");
    CHECK(heat.at("order")[1] == "mlp");
    const auto cosine = heat.at("cosine");
    CHECK(cosine[0][0] == 1.0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(cosine[i][j] == cosine[j][i]);

    // Ablation CSV has both series.
    const std::string abl = io::read_text(out1 / "ablation.csv");
    CHECK(abl.find("shared") != std::string::npos);
    CHECK(abl.find("random") != std::string::npos);

    cmd_report(out1);
    REQUIRE(fs::exists(out1 / "report.json"));
    const json report = json::parse(io::read_text(out1 / "report.json"));
    CHECK(report.at("artifacts").size() >= 4);
    CHECK(report.at("manifests").size() >= 4);

    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("pod dataset flows through the config") {
    const fs::path out = fresh_dir("pod");
    fs::create_directories(out);
    const fs::path wake = out / "wake.csv";
    {
        std::ofstream f(wake);
        for (int i = 0; i < 3 * 2 * 30; ++i)
            f << io::fmt_double(std::sin(0.05 * i)) << " " << io::fmt_double(std::cos(0.05 * i)) << " "
              << io::fmt_double(std::sin(0.02 * i + 0.3)) << "\n";
    }
    const std::string cfg_text = R"({
      "version": 1, "seed": 2, "out": ")" + (out / "run").string() + R"(",
      "dataset": {"system": "pod_wake", "T": 30, "n_traj": 2, "dt": 0.2, "pod_path": ")" +
                                 wake.string() + R"("},
      "models": ["mlp"], "seeds_per_model": 1,
      "train": {"max_epochs": 2, "L": 4, "H": 3, "latent_dim": 4, "width": 8, "depth": 1}
    })";
    ExperimentConfig cfg = parse_config_text(cfg_text);
    cmd_generate(cfg);
    REQUIRE(fs::exists(out / "run" / "dataset" / "meta.json"));
    const json meta = json::parse(io::read_text(out / "run" / "dataset" / "meta.json"));
    CHECK(meta.at("system").at("system") == "pod_wake");
    fs::remove_all(out);
}

TEST_CASE("resolve_out falls back to the environment variable") {
    ExperimentConfig cfg;
    cfg.out.clear();
    setenv("LATENT_ATLAS_OUT", "/tmp/atlas_env_out", 1);
    CHECK(resolve_out(cfg) == fs::path("/tmp/atlas_env_out"));
    unsetenv("LATENT_ATLAS_OUT");
    CHECK(resolve_out(cfg) == fs::path("latent_atlas_runs"));
    cfg.out = "explicit";
    CHECK(resolve_out(cfg) == fs::path("explicit"));
}
