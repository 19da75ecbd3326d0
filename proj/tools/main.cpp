#include <iostream>

#include "CLI11.hpp"
#include "atlas/cli/commands.hpp"

using atlas::cli::ExperimentConfig;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
};

ExperimentConfig make_config(const CommonOpts& opts) {
    ExperimentConfig cfg =
        opts.config_path.empty() ? atlas::cli::default_config() : atlas::cli::load_config(opts.config_path);
    if (opts.seed_set) {
        cfg.seed = opts.seed;
        cfg.system.seed = opts.seed;
    }
    if (!opts.out.empty()) cfg.out = opts.out;
    if (opts.workers > 0) cfg.workers = opts.workers;
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Experiment config file (JSON)");
    cmd->add_option("--out", opts.out, "Output directory (default: $LATENT_ATLAS_OUT)");
    cmd->add_option("--seed", opts.seed, "Master seed override")->each([&opts](const std::string&) {
        opts.seed_set = true;
    });
    cmd->add_option("--workers", opts.workers, "Concurrent training tasks");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"latent-atlas: forecaster training and latent-geometry comparison pipeline"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string report_dir;

    CLI::App* generate = app.add_subcommand("generate", "Generate (or ingest) the dataset");
    CLI::App* train = app.add_subcommand("train", "Train the model grid and write checkpoints");
    CLI::App* align = app.add_subcommand("align", "Pairwise relative-embedding alignment grid");
    CLI::App* ablate = app.add_subcommand("ablate", "Anchor-count ablation with random baseline");
    CLI::App* perturb = app.add_subcommand("perturb", "Noise and input-length sweeps (retrains per condition)");
    CLI::App* stitch = app.add_subcommand("stitch", "Relative/absolute encoder-decoder stitching grids");
    CLI::App* probe = app.add_subcommand("probe", "Linear ridge probing of latent state information");
    CLI::App* report = app.add_subcommand("report", "Consolidate artifacts of a run directory");
    for (CLI::App* cmd : {generate, train, align, ablate, perturb, stitch, probe}) add_common(cmd, opts);
    report->add_option("dir", report_dir, "Run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        std::vector<std::string> files;
        if (generate->parsed()) files = atlas::cli::cmd_generate(make_config(opts));
        if (train->parsed()) files = atlas::cli::cmd_train(make_config(opts));
        if (align->parsed()) files = atlas::cli::cmd_align(make_config(opts));
        if (ablate->parsed()) files = atlas::cli::cmd_ablate(make_config(opts));
        if (perturb->parsed()) files = atlas::cli::cmd_perturb(make_config(opts));
        if (stitch->parsed()) files = atlas::cli::cmd_stitch(make_config(opts));
        if (probe->parsed()) files = atlas::cli::cmd_probe(make_config(opts));
        if (report->parsed()) files = atlas::cli::cmd_report(report_dir);
        for (const std::string& f : files) std::cout << f << "\n";
        return 0;
    } catch (const atlas::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const atlas::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 2;
    }
}
