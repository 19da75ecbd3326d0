#ifndef ATLAS_CLI_CONFIG_HPP
#define ATLAS_CLI_CONFIG_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "atlas/dynsys/system.hpp"
#include "atlas/fc/spec.hpp"
#include "atlas/fc/train.hpp"

namespace atlas::cli {

// Whole-experiment configuration (JSON file, schema version 1). Unknown keys
// anywhere are a ConfigError.
struct ExperimentConfig {
    int version = 1;
    std::uint64_t seed = 0;
    std::string out;
    int workers = 1;

    dynsys::SystemSpec system = dynsys::SystemSpec::with_defaults(dynsys::SystemId::lorenz63);
    std::string pod_path;

    std::vector<fc::ForecasterSpec> models;  // one entry per model in the grid
    int seeds_per_model = 3;
    fc::TrainOptions train;

    // alignment
    int align_samples = 1000;
    int align_anchors = 80;
    std::uint64_t align_seed = 0;
    bool include_true_system = true;

    // ablation
    std::vector<int> ablation_K{2, 8, 16, 64, 256};
    int ablation_repeats = 30;
    std::string ablation_model = "mlp";
    int random_baseline_K = 80;

    // perturbation
    std::vector<double> noise_list{0.0, 0.05, 0.1};
    std::vector<int> L_list{5, 20, 40};
    std::vector<std::string> perturb_families{"mlp", "a-rnn", "tf"};
    int perturb_seeds = 3;

    // stitching
    int stitch_anchors = 32;
    std::vector<std::string> stitch_families{"mlp", "tf"};
    int stitch_seeds = 2;

    // probing
    double probe_lambda = 1e-3;
    double probe_train_fraction = 0.7;
};

// Parses a model name in the paper's short form: mlp, k-mlp, n-mlp, rnn,
// a-rnn, k-rnn, n-rnn, tf, k-tf, n-tf, esn.
fc::ForecasterSpec model_from_name(const std::string& name);

ExperimentConfig default_config();
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Hash of the canonical serialized config (stamped into every output file).
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace atlas::cli

#endif  // ATLAS_CLI_CONFIG_HPP
