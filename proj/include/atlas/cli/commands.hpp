#ifndef ATLAS_CLI_COMMANDS_HPP
#define ATLAS_CLI_COMMANDS_HPP

#include <filesystem>

#include "atlas/cli/config.hpp"

namespace atlas::cli {

// Pipeline commands. Each ensures its inputs (dataset, checkpoints), writes
// its artifacts under the output directory, records a manifest, and returns
// the produced file list. Module errors propagate with command context.
std::vector<std::string> cmd_generate(const ExperimentConfig& cfg);
std::vector<std::string> cmd_train(const ExperimentConfig& cfg);
std::vector<std::string> cmd_align(const ExperimentConfig& cfg);
std::vector<std::string> cmd_ablate(const ExperimentConfig& cfg);
std::vector<std::string> cmd_perturb(const ExperimentConfig& cfg);
std::vector<std::string> cmd_stitch(const ExperimentConfig& cfg);
std::vector<std::string> cmd_probe(const ExperimentConfig& cfg);
std::vector<std::string> cmd_report(const std::filesystem::path& dir);

// Output root: config value, then $LATENT_ATLAS_OUT, then ./latent_atlas_runs.
std::filesystem::path resolve_out(const ExperimentConfig& cfg);

}  // namespace atlas::cli

#endif  // ATLAS_CLI_COMMANDS_HPP
