#include "atlas/cli/commands.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>
#include <thread>

#include "atlas/fc/checkpoint.hpp"
#include "atlas/fc/latents.hpp"
#include "atlas/io.hpp"
#include "atlas/rel/analysis.hpp"
#include "atlas/rel/relative.hpp"
#include "atlas/stitch/stitching.hpp"
#include "json.hpp"

namespace atlas::cli {

using dynsys::Split;
using dynsys::TrajectorySet;
using fc::Checkpoint;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "latent-atlas 0.1.0";

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int count = std::min(workers, n);
    pool.reserve(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::string stamp(const ExperimentConfig& cfg) {
    return "# config_hash=" + io::hex64(config_hash(cfg)) + " seed=" + std::to_string(cfg.seed) + "\n";
}

void write_csv(const fs::path& path, const ExperimentConfig& cfg, const io::CsvWriter& csv) {
    io::write_text(path, stamp(cfg) + csv.str());
}

void write_manifest(const fs::path& out, const std::string& command, const ExperimentConfig& cfg,
                    double wall_seconds, const std::vector<std::string>& files) {
    json m;
    m["command"] = command;
    m["config_hash"] = io::hex64(config_hash(cfg));
    m["seed"] = cfg.seed;
    m["source_version"] = kVersion;
    m["wall_time_seconds"] = wall_seconds;
    m["files"] = files;
    io::write_text(out / ("manifest_" + command + ".json"), m.dump(2) + "\n");
}

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

TrajectorySet ensure_dataset(const ExperimentConfig& cfg, const fs::path& out) {
    const fs::path dir = out / "dataset";
    if (fs::exists(dir / "meta.json")) return dynsys::load_dataset(dir);
    TrajectorySet set = cfg.system.system_id == dynsys::SystemId::pod_wake
                            ? dynsys::load_pod(cfg.pod_path, cfg.system.T, cfg.system.n_traj, cfg.system.dt)
                            : dynsys::generate_dataset(cfg.system);
    dynsys::save_dataset(set, dir);
    return set;
}

struct Instance {
    fc::ForecasterSpec spec;
    std::string id;  // "<name>#<seed index>"
    int seed_index = 0;
};

std::vector<Instance> instance_grid(const ExperimentConfig& cfg) {
    std::vector<Instance> out;
    for (const auto& model : cfg.models)
        for (int s = 0; s < cfg.seeds_per_model; ++s) {
            Instance inst;
            inst.spec = model;
            inst.spec.seed = cfg.seed * 1000 + static_cast<std::uint64_t>(s);
            inst.seed_index = s;
            inst.id = model.name() + "#" + std::to_string(s);
            out.push_back(inst);
        }
    return out;
}

Checkpoint train_instance(const Instance& inst, const TrajectorySet& data, const fc::TrainOptions& opts) {
    Checkpoint ckpt = fc::train(inst.spec, data, opts);
    ckpt.id = inst.id;
    return ckpt;
}

std::vector<Checkpoint> ensure_checkpoints(const ExperimentConfig& cfg, const fs::path& out,
                                           const TrajectorySet& data, std::vector<std::string>* produced) {
    const fs::path dir = out / "checkpoints";
    fs::create_directories(dir);
    const auto grid = instance_grid(cfg);
    std::vector<Checkpoint> ckpts(grid.size());
    parallel_for(static_cast<int>(grid.size()), cfg.workers, [&](int i) {
        const fs::path path = dir / (grid[static_cast<std::size_t>(i)].id + ".ckpt");
        if (fs::exists(path)) {
            ckpts[static_cast<std::size_t>(i)] = fc::load_checkpoint(path);
            return;
        }
        ckpts[static_cast<std::size_t>(i)] = train_instance(grid[static_cast<std::size_t>(i)], data, cfg.train);
        fc::save_checkpoint(ckpts[static_cast<std::size_t>(i)], path);
        if (produced) produced->push_back(path.string());
    });
    return ckpts;
}

void require_shared_window(const ExperimentConfig& cfg, const char* command) {
    for (const auto& m : cfg.models)
        if (m.L != cfg.models.front().L || m.H != cfg.models.front().H)
            throw ConfigError(std::string(command) + ": all models must share L and H for a common sample set");
}

// Heatmap model order following the paper's figure convention.
std::vector<std::string> ordered_model_names(const ExperimentConfig& cfg, bool with_true) {
    static const std::vector<std::string> canon = {"mlp",   "k-mlp", "n-mlp", "rnn", "a-rnn", "k-rnn",
                                                   "n-rnn", "tf",    "n-tf",  "k-tf", "esn"};
    std::vector<std::string> present;
    if (with_true) present.push_back("true_system");
    for (const std::string& c : canon)
        for (const auto& m : cfg.models)
            if (m.name() == c) {
                present.push_back(c);
                break;
            }
    // any models outside the canonical list keep config order at the end
    for (const auto& m : cfg.models)
        if (std::find(present.begin(), present.end(), m.name()) == present.end()) present.push_back(m.name());
    return present;
}

std::string fmt(double v) { return io::fmt_double(v); }

}  // namespace

fs::path resolve_out(const ExperimentConfig& cfg) {
    if (!cfg.out.empty()) return cfg.out;
    if (const char* env = std::getenv("LATENT_ATLAS_OUT"); env && *env) return env;
    return "latent_atlas_runs";
}

std::vector<std::string> cmd_generate(const ExperimentConfig& cfg) {
    Timer timer;
    const fs::path out = resolve_out(cfg);
    fs::create_directories(out);
    ensure_dataset(cfg, out);
    std::vector<std::string> files;
    for (const char* name : {"meta.json", "train.bin", "val.bin", "test.bin"})
        files.push_back((out / "dataset" / name).string());
    write_manifest(out, "generate", cfg, timer.seconds(), files);
    return files;
}

std::vector<std::string> cmd_train(const ExperimentConfig& cfg) {
    Timer timer;
    const fs::path out = resolve_out(cfg);
    fs::create_directories(out);
    const TrajectorySet data = ensure_dataset(cfg, out);
    std::vector<std::string> files;
    const auto ckpts = ensure_checkpoints(cfg, out, data, &files);

    io::CsvWriter csv({"model", "seed", "epochs", "best_val_mse", "test_mse", "test_rmse", "test_mae"});
    for (std::size_t i = 0; i < ckpts.size(); ++i) {
        const auto& ck = ckpts[i];
        const fc::EvalReport rep = fc::evaluate(ck, data, Split::test);
        const auto grid = instance_grid(cfg);
        csv.add_row({grid[i].spec.name(), std::to_string(grid[i].seed_index),
                     std::to_string(ck.log.size()), fmt(ck.best_val), fmt(rep.mse), fmt(rep.rmse),
                     fmt(rep.mae)});
    }
    const fs::path path = out / "training.csv";
    write_csv(path, cfg, csv);
    files.push_back(path.string());
    write_manifest(out, "train", cfg, timer.seconds(), files);
    return files;
}

std::vector<std::string> cmd_align(const ExperimentConfig& cfg) {
    Timer timer;
    require_shared_window(cfg, "align");
    const fs::path out = resolve_out(cfg);
    fs::create_directories(out);
    const TrajectorySet data = ensure_dataset(cfg, out);
    const auto ckpts = ensure_checkpoints(cfg, out, data, nullptr);
    const auto grid = instance_grid(cfg);

    const int L = cfg.models.front().L, H = cfg.models.front().H;
    const auto samples = fc::draw_sample_index(data, Split::test, L, H, cfg.align_samples, cfg.align_seed);

    struct Entry {
        std::string model;
        int seed = -1;
        Eigen::MatrixXd Z;
    };
    std::vector<Entry> entries;
    if (cfg.include_true_system)
        entries.push_back({"true_system", -1, fc::collect_true_latents(data, Split::test, samples, L).Z});
    for (std::size_t i = 0; i < ckpts.size(); ++i)
        entries.push_back({grid[i].spec.name(), grid[i].seed_index,
                           fc::collect_latents(ckpts[i], data, Split::test, samples).Z});

    rel::AnchorSet anchors;
    {
        Rng rng = Rng::derive(cfg.align_seed, 0xACC);
        auto draw = rng.sample_without_replacement(static_cast<std::size_t>(cfg.align_samples),
                                                   static_cast<std::size_t>(cfg.align_anchors));
        for (std::size_t v : draw) anchors.indices.push_back(static_cast<int>(v));
        std::sort(anchors.indices.begin(), anchors.indices.end());
    }

    // Pairwise alignment over all instances (and the true system).
    std::vector<Eigen::MatrixXd> rels(entries.size());
    parallel_for(static_cast<int>(entries.size()), cfg.workers, [&](int i) {
        rels[static_cast<std::size_t>(i)] = rel::relative_embed(entries[static_cast<std::size_t>(i)].Z, anchors, true);
    });

    io::CsvWriter csv({"model_a", "model_b", "seed_a", "seed_b", "cosine", "t1", "rank"});
    std::map<std::pair<std::string, std::string>, std::vector<double>> cell_cos, cell_t1, cell_rank;
    for (std::size_t i = 0; i < entries.size(); ++i)
        for (std::size_t j = i + 1; j < entries.size(); ++j) {
            const double c = rel::alpha_cosine(rels[i], rels[j]);
            const double t = rel::alpha_t1(rels[i], rels[j]);
            const double r = rel::alpha_rank(rels[i], rels[j]);
            csv.add_row({entries[i].model, entries[j].model, std::to_string(entries[i].seed),
                         std::to_string(entries[j].seed), fmt(c), fmt(t), fmt(r)});
            cell_cos[{entries[i].model, entries[j].model}].push_back(c);
            cell_cos[{entries[j].model, entries[i].model}].push_back(c);
            cell_t1[{entries[i].model, entries[j].model}].push_back(t);
            cell_t1[{entries[j].model, entries[i].model}].push_back(t);
            cell_rank[{entries[i].model, entries[j].model}].push_back(r);
            cell_rank[{entries[j].model, entries[i].model}].push_back(r);
        }

    const fs::path csv_path = out / "alignment.csv";
    write_csv(csv_path, cfg, csv);

    // Heatmap bundle: paper ordering, seed-pair means, self cells from
    // distinct-seed pairs (1.0 when only one instance exists).
    const auto order = ordered_model_names(cfg, cfg.include_true_system);
    auto cell_mean = [&](std::map<std::pair<std::string, std::string>, std::vector<double>>& cells,
                         const std::string& a, const std::string& b) {
        auto it = cells.find({a, b});
        if (it == cells.end() || it->second.empty()) return 1.0;  // single-instance self cell
        double s = 0.0;
        for (double v : it->second) s += v;
        return s / static_cast<double>(it->second.size());
    };
    json heat;
    heat["order"] = order;
    heat["n_samples"] = cfg.align_samples;
    heat["n_anchors"] = cfg.align_anchors;
    heat["seed"] = cfg.align_seed;
    heat["config_hash"] = io::hex64(config_hash(cfg));
    for (const char* metric : {"cosine", "t1", "rank"}) {
        auto& cells = metric == std::string("cosine") ? cell_cos : metric == std::string("t1") ? cell_t1 : cell_rank;
        json matrix = json::array();
        for (const auto& a : order) {
            json row = json::array();
            for (const auto& b : order) row.push_back(cell_mean(cells, a, b));
            matrix.push_back(row);
        }
        heat[metric] = matrix;
    }
    const fs::path heat_path = out / "heatmap.json";
    io::write_text(heat_path, heat.dump(2) + "\n");

    write_manifest(out, "align", cfg, timer.seconds(), {csv_path.string(), heat_path.string()});
    return {csv_path.string(), heat_path.string()};
}

std::vector<std::string> cmd_ablate(const ExperimentConfig& cfg) {
    Timer timer;
    require_shared_window(cfg, "ablate");
    const fs::path out = resolve_out(cfg);
    fs::create_directories(out);
    const TrajectorySet data = ensure_dataset(cfg, out);
    const auto ckpts = ensure_checkpoints(cfg, out, data, nullptr);
    const auto grid = instance_grid(cfg);

    int pick = -1;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i].spec.name() == cfg.ablation_model && grid[i].seed_index == 0) pick = static_cast<int>(i);
    if (pick < 0) throw ConfigError("ablate: model '" + cfg.ablation_model + "' not in the grid");

    const int L = cfg.models.front().L, H = cfg.models.front().H;
    const auto samples = fc::draw_sample_index(data, Split::test, L, H, cfg.align_samples, cfg.align_seed);
    const Eigen::MatrixXd Zm = fc::collect_latents(ckpts[static_cast<std::size_t>(pick)], data, Split::test, samples).Z;
    const Eigen::MatrixXd Zt = fc::collect_true_latents(data, Split::test, samples, L).Z;

    const auto sweep = rel::anchor_ablation(Zm, Zt, cfg.ablation_K, cfg.ablation_repeats,
                                            Rng::derive(cfg.align_seed, 7).next_u64());
    const auto baseline = rel::random_baseline(Zm, Zt, cfg.random_baseline_K, cfg.ablation_repeats,
                                               Rng::derive(cfg.align_seed, 8).next_u64());

    io::CsvWriter csv({"series", "model", "K", "repeats", "mean", "std"});
    for (const auto& p : sweep)
        csv.add_row({"shared", cfg.ablation_model, std::to_string(p.K), std::to_string(cfg.ablation_repeats),
                     fmt(p.mean), fmt(p.std)});
    csv.add_row({"random", cfg.ablation_model, std::to_string(baseline.K), std::to_string(cfg.ablation_repeats),
                 fmt(baseline.mean), fmt(baseline.std)});
    const fs::path path = out / "ablation.csv";
    write_csv(path, cfg, csv);
    write_manifest(out, "ablate", cfg, timer.seconds(), {path.string()});
    return {path.string()};
}

namespace {

// Mean-cosine alignment of one checkpoint against the true system.
double rss_against_truth(const ExperimentConfig& cfg, const Checkpoint& ckpt, const TrajectorySet& data) {
    const int L = ckpt.spec.L, H = ckpt.spec.H;
    const auto samples = fc::draw_sample_index(data, Split::test, L, H, cfg.align_samples, cfg.align_seed);
    const Eigen::MatrixXd Zm = fc::collect_latents(ckpt, data, Split::test, samples).Z;
    const Eigen::MatrixXd Zt = fc::collect_true_latents(data, Split::test, samples, L).Z;
    rel::AnchorSet anchors;
    Rng rng = Rng::derive(cfg.align_seed, 0xACC);
    auto draw = rng.sample_without_replacement(static_cast<std::size_t>(cfg.align_samples),
                                               static_cast<std::size_t>(cfg.align_anchors));
    for (std::size_t v : draw) anchors.indices.push_back(static_cast<int>(v));
    std::sort(anchors.indices.begin(), anchors.indices.end());
    return rel::alpha_cosine(rel::relative_embed(Zm, anchors, true), rel::relative_embed(Zt, anchors, true));
}

}  // namespace

std::vector<std::string> cmd_perturb(const ExperimentConfig& cfg) {
    Timer timer;
    const fs::path out = resolve_out(cfg);
    fs::create_directories(out);
    const TrajectorySet data = ensure_dataset(cfg, out);

    struct Condition {
        std::string kind;
        std::string family;
        int seed = 0;
        double sigma = 0.0;
        int L = 0;
    };
    std::vector<Condition> conditions;
    for (const std::string& fam : cfg.perturb_families) {
        const fc::ForecasterSpec base = [&] {
            for (const auto& m : cfg.models)
                if (m.name() == fam) return m;
            return model_from_name(fam);
        }();
        for (double sigma : cfg.noise_list)
            for (int s = 0; s < cfg.perturb_seeds; ++s)
                conditions.push_back({"noise", fam, s, sigma, base.L});
        for (int L : cfg.L_list)
            for (int s = 0; s < cfg.perturb_seeds; ++s) conditions.push_back({"length", fam, s, 0.0, L});
    }

    std::vector<std::array<double, 2>> results(conditions.size());
    parallel_for(static_cast<int>(conditions.size()), cfg.workers, [&](int i) {
        const Condition& c = conditions[static_cast<std::size_t>(i)];
        fc::ForecasterSpec spec = [&] {
            for (const auto& m : cfg.models)
                if (m.name() == c.family) return m;
            return model_from_name(c.family);
        }();
        spec.L = c.L;
        spec.seed = cfg.seed * 1000 + 500 + static_cast<std::uint64_t>(c.seed);
        fc::TrainOptions opts = cfg.train;
        opts.noise_sigma = c.sigma;  // every condition retrains from scratch
        const Checkpoint ckpt = spec.family == fc::Family::esn ? fc::esn_fit(spec, data, opts)
                                                               : fc::train(spec, data, opts);
        const fc::EvalReport rep = fc::evaluate(ckpt, data, Split::test, 1, c.sigma, spec.seed);
        const double rss = rss_against_truth(cfg, ckpt, data);
        results[static_cast<std::size_t>(i)] = {rep.mse, rss};
    });

    io::CsvWriter csv({"kind", "family", "seed", "sigma", "L", "mse", "rss"});
    for (std::size_t i = 0; i < conditions.size(); ++i) {
        const Condition& c = conditions[i];
        csv.add_row({c.kind, c.family, std::to_string(c.seed), fmt(c.sigma), std::to_string(c.L),
                     fmt(results[i][0]), fmt(results[i][1])});
    }
    const fs::path path = out / "perturb.csv";
    write_csv(path, cfg, csv);
    write_manifest(out, "perturb", cfg, timer.seconds(), {path.string()});
    return {path.string()};
}

std::vector<std::string> cmd_stitch(const ExperimentConfig& cfg) {
    Timer timer;
    const fs::path out = resolve_out(cfg);
    fs::create_directories(out);
    const TrajectorySet data = ensure_dataset(cfg, out);

    const fc::ForecasterSpec first = [&] {
        for (const auto& m : cfg.models)
            if (m.name() == cfg.stitch_families.front()) return m;
        return model_from_name(cfg.stitch_families.front());
    }();
    const auto anchor_samples = fc::draw_sample_index(data, Split::train, first.L, first.H,
                                                      cfg.stitch_anchors, Rng::derive(cfg.seed, 0x57).next_u64());

    std::vector<stitch::RelativeForecaster> instances(
        cfg.stitch_families.size() * static_cast<std::size_t>(cfg.stitch_seeds));
    std::vector<std::pair<std::string, int>> slots;
    for (const std::string& fam : cfg.stitch_families)
        for (int s = 0; s < cfg.stitch_seeds; ++s) slots.emplace_back(fam, s);

    parallel_for(static_cast<int>(slots.size()), cfg.workers, [&](int i) {
        const auto& [fam, s] = slots[static_cast<std::size_t>(i)];
        fc::ForecasterSpec spec = [&] {
            for (const auto& m : cfg.models)
                if (m.name() == fam) return m;
            return model_from_name(fam);
        }();
        spec.seed = cfg.seed * 1000 + static_cast<std::uint64_t>(s);
        instances[static_cast<std::size_t>(i)] = stitch::train_relative(spec, data, anchor_samples, cfg.train);
        instances[static_cast<std::size_t>(i)].id = fam + "#" + std::to_string(s);
    });

    const stitch::StitchTable table = stitch::stitch_grid(instances, data);

    // Table-3-style layout: encoder rows, decoder column pairs.
    std::vector<std::string> header{"enc"};
    for (const auto& fam : table.families) {
        header.push_back(fam + "_abs");
        header.push_back(fam + "_rel");
    }
    io::CsvWriter csv(header);
    for (std::size_t r = 0; r < table.families.size(); ++r) {
        std::vector<std::string> row{table.families[r]};
        for (std::size_t c = 0; c < table.families.size(); ++c) {
            const auto& cell = table.cells[r][c];
            row.push_back(cell.abs_mse ? fmt(*cell.abs_mse) : "");
            row.push_back(cell.rel_mse ? fmt(*cell.rel_mse) : "");
        }
        csv.add_row(row);
    }
    const fs::path table_path = out / "stitch_table.csv";
    write_csv(table_path, cfg, csv);

    io::CsvWriter pairs({"enc", "enc_seed", "dec", "dec_seed", "abs_mse", "rel_mse"});
    for (const auto& enc : instances)
        for (const auto& dec : instances) {
            const double rel_mse = stitch::stitch(enc, dec, data).mse;
            std::string abs_cell;
            try {
                abs_cell = fmt(stitch::stitch_absolute(enc.base, dec.base, data).mse);
            } catch (const DimMismatch&) {
                abs_cell = "";
            }
            const auto enc_fam = enc.id.substr(0, enc.id.find('#'));
            const auto dec_fam = dec.id.substr(0, dec.id.find('#'));
            pairs.add_row({enc_fam, enc.id.substr(enc.id.find('#') + 1), dec_fam,
                           dec.id.substr(dec.id.find('#') + 1), abs_cell, fmt(rel_mse)});
        }
    const fs::path pairs_path = out / "stitch_pairs.csv";
    write_csv(pairs_path, cfg, pairs);

    write_manifest(out, "stitch", cfg, timer.seconds(), {table_path.string(), pairs_path.string()});
    return {table_path.string(), pairs_path.string()};
}

std::vector<std::string> cmd_probe(const ExperimentConfig& cfg) {
    Timer timer;
    require_shared_window(cfg, "probe");
    const fs::path out = resolve_out(cfg);
    fs::create_directories(out);
    const TrajectorySet data = ensure_dataset(cfg, out);
    const auto ckpts = ensure_checkpoints(cfg, out, data, nullptr);
    const auto grid = instance_grid(cfg);

    const int L = cfg.models.front().L, H = cfg.models.front().H;
    const auto samples = fc::draw_sample_index(data, Split::test, L, H, cfg.align_samples, cfg.align_seed);
    const Eigen::MatrixXd X = fc::sample_states(data, Split::test, samples, L);

    std::vector<int> rows(static_cast<std::size_t>(cfg.align_samples));
    for (int i = 0; i < cfg.align_samples; ++i) rows[static_cast<std::size_t>(i)] = i;
    Rng rng = Rng::derive(cfg.align_seed, 0xBE);
    rng.shuffle(rows);
    const int n_train = static_cast<int>(cfg.probe_train_fraction * cfg.align_samples);
    std::vector<int> train_rows(rows.begin(), rows.begin() + n_train);
    std::vector<int> test_rows(rows.begin() + n_train, rows.end());

    rel::AnchorSet anchors;
    {
        Rng arng = Rng::derive(cfg.align_seed, 0xACC);
        auto draw = arng.sample_without_replacement(static_cast<std::size_t>(cfg.align_samples),
                                                    static_cast<std::size_t>(cfg.align_anchors));
        for (std::size_t v : draw) anchors.indices.push_back(static_cast<int>(v));
        std::sort(anchors.indices.begin(), anchors.indices.end());
    }

    io::CsvWriter csv({"model", "seed", "space", "target", "r2"});
    for (std::size_t i = 0; i < ckpts.size(); ++i) {
        const Eigen::MatrixXd Z = fc::collect_latents(ckpts[i], data, Split::test, samples).Z;
        const rel::ProbeReport abs_rep = rel::probe_ridge(Z, X, cfg.probe_lambda, train_rows, test_rows);
        const Eigen::MatrixXd R = rel::relative_embed(Z, anchors, true);
        const rel::ProbeReport rel_rep = rel::probe_ridge(R, X, cfg.probe_lambda, train_rows, test_rows);
        for (int j = 0; j < X.cols(); ++j) {
            csv.add_row({grid[i].spec.name(), std::to_string(grid[i].seed_index), "absolute",
                         "ch" + std::to_string(j), fmt(abs_rep.r2[j])});
            csv.add_row({grid[i].spec.name(), std::to_string(grid[i].seed_index), "relative",
                         "ch" + std::to_string(j), fmt(rel_rep.r2[j])});
        }
        csv.add_row({grid[i].spec.name(), std::to_string(grid[i].seed_index), "absolute", "mean",
                     fmt(abs_rep.mean_r2)});
        csv.add_row({grid[i].spec.name(), std::to_string(grid[i].seed_index), "relative", "mean",
                     fmt(rel_rep.mean_r2)});
    }
    const fs::path path = out / "probe.csv";
    write_csv(path, cfg, csv);
    write_manifest(out, "probe", cfg, timer.seconds(), {path.string()});
    return {path.string()};
}

std::vector<std::string> cmd_report(const fs::path& dir) {
    json report;
    report["directory"] = dir.string();
    json artifacts = json::array();
    for (const char* name : {"dataset/meta.json", "training.csv", "alignment.csv", "heatmap.json",
                             "ablation.csv", "perturb.csv", "stitch_table.csv", "stitch_pairs.csv",
                             "probe.csv"}) {
        const fs::path p = dir / name;
        if (!fs::exists(p)) continue;
        artifacts.push_back({{"file", name}, {"bytes", fs::file_size(p)}});
    }
    report["artifacts"] = artifacts;
    json manifests = json::array();
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string fname = entry.path().filename().string();
        if (fname.rfind("manifest_", 0) == 0) manifests.push_back(json::parse(io::read_text(entry.path())));
    }
    report["manifests"] = manifests;
    const fs::path path = dir / "report.json";
    io::write_text(path, report.dump(2) + "\n");
    return {path.string()};
}

}  // namespace atlas::cli
