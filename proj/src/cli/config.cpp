#include "atlas/cli/config.hpp"

#include <set>

#include "atlas/io.hpp"
#include "json.hpp"

namespace atlas::cli {

using json = nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& context) {
    if (!obj.is_object()) throw ConfigError(context + ": expected an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) throw ConfigError(context + ": unknown key '" + key + "'");
}

template <typename T>
void read_into(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

fc::ForecasterSpec model_from_json(const json& jm, const fc::ForecasterSpec& base) {
    if (jm.is_string()) {
        fc::ForecasterSpec s = model_from_name(jm.get<std::string>());
        s.L = base.L;
        s.H = base.H;
        s.latent_dim = base.latent_dim;
        s.width = base.width;
        s.depth = base.depth;
        s.d_model = base.d_model;
        s.heads = base.heads;
        s.layers = base.layers;
        s.reservoir_size = base.reservoir_size;
        s.spectral_radius = base.spectral_radius;
        s.input_scale = base.input_scale;
        s.ridge_lambda = base.ridge_lambda;
        s.density = base.density;
        return s;
    }
    check_keys(jm,
               {"family", "propagator", "L", "H", "latent_dim", "width", "depth", "d_model", "heads",
                "layers", "reservoir_size", "spectral_radius", "input_scale", "ridge_lambda", "density"},
               "models[]");
    fc::ForecasterSpec s = base;
    if (jm.contains("family")) {
        const std::string fam = jm.at("family").get<std::string>();
        // accept either the long family name or the short model name
        try {
            s = model_from_name(fam);
        } catch (const ConfigError&) {
            s.family = fc::family_from_string(fam);
        }
        s.L = base.L;
        s.H = base.H;
        s.latent_dim = base.latent_dim;
        s.width = base.width;
        s.depth = base.depth;
        s.d_model = base.d_model;
        s.heads = base.heads;
        s.layers = base.layers;
        s.reservoir_size = base.reservoir_size;
        s.spectral_radius = base.spectral_radius;
        s.input_scale = base.input_scale;
        s.ridge_lambda = base.ridge_lambda;
        s.density = base.density;
    }
    if (jm.contains("propagator")) s.propagator = fc::propagator_from_string(jm.at("propagator").get<std::string>());
    read_into(jm, "L", s.L);
    read_into(jm, "H", s.H);
    read_into(jm, "latent_dim", s.latent_dim);
    read_into(jm, "width", s.width);
    read_into(jm, "depth", s.depth);
    read_into(jm, "d_model", s.d_model);
    read_into(jm, "heads", s.heads);
    read_into(jm, "layers", s.layers);
    read_into(jm, "reservoir_size", s.reservoir_size);
    read_into(jm, "spectral_radius", s.spectral_radius);
    read_into(jm, "input_scale", s.input_scale);
    read_into(jm, "ridge_lambda", s.ridge_lambda);
    read_into(jm, "density", s.density);
    return s;
}

}  // namespace

fc::ForecasterSpec model_from_name(const std::string& name) {
    fc::ForecasterSpec s;
    std::string base = name;
    if (name.rfind("k-", 0) == 0) {
        s.propagator = fc::Propagator::koopman;
        base = name.substr(2);
    } else if (name.rfind("n-", 0) == 0) {
        s.propagator = fc::Propagator::node;
        base = name.substr(2);
    }
    if (base == "mlp")
        s.family = fc::Family::mlp;
    else if (base == "rnn")
        s.family = fc::Family::rnn;
    else if (base == "a-rnn" || base == "a_rnn" || base == "arnn")
        s.family = fc::Family::a_rnn;
    else if (base == "tf" || base == "transformer")
        s.family = fc::Family::transformer;
    else if (base == "esn")
        s.family = fc::Family::esn;
    else
        throw ConfigError("unknown model name '" + name + "'");
    if (s.family == fc::Family::a_rnn && s.propagator != fc::Propagator::identity && base != name)
        ;  // k-a-rnn etc. permitted by construction
    s.validate();
    return s;
}

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    for (const char* name : {"mlp", "k-mlp", "n-mlp", "rnn", "a-rnn", "tf", "esn"})
        cfg.models.push_back(model_from_name(name));
    return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(j,
               {"version", "seed", "out", "workers", "dataset", "models", "seeds_per_model", "train",
                "alignment", "ablation", "perturb", "stitching", "probe", "full_grid"},
               "config");
    ExperimentConfig cfg;
    read_into(j, "version", cfg.version);
    if (cfg.version != 1) throw ConfigError("config: unsupported version " + std::to_string(cfg.version));
    read_into(j, "seed", cfg.seed);
    read_into(j, "out", cfg.out);
    read_into(j, "workers", cfg.workers);

    if (j.contains("dataset")) {
        const json& jd = j.at("dataset");
        check_keys(jd, {"system", "params", "dt", "T", "n_traj", "pod_path"}, "dataset");
        const std::string sys = jd.value("system", std::string("lorenz63"));
        cfg.system = dynsys::SystemSpec::with_defaults(dynsys::system_from_string(sys), cfg.seed);
        if (jd.contains("params"))
            for (const auto& [k, v] : jd.at("params").items()) {
                if (!cfg.system.params.count(k))
                    throw ConfigError("dataset.params: unknown parameter '" + k + "' for " + sys);
                cfg.system.params[k] = v.get<double>();
            }
        read_into(jd, "dt", cfg.system.dt);
        read_into(jd, "T", cfg.system.T);
        read_into(jd, "n_traj", cfg.system.n_traj);
        read_into(jd, "pod_path", cfg.pod_path);
    }
    cfg.system.seed = cfg.seed;

    fc::ForecasterSpec base;
    if (j.contains("train")) {
        const json& jt = j.at("train");
        check_keys(jt,
                   {"max_epochs", "patience", "batch_size", "lr", "lr_decay", "stride",
                    "max_train_windows", "L", "H", "latent_dim", "width", "depth", "d_model", "heads",
                    "layers", "reservoir_size", "spectral_radius", "input_scale", "ridge_lambda", "density"},
                   "train");
        read_into(jt, "max_epochs", cfg.train.max_epochs);
        read_into(jt, "patience", cfg.train.patience);
        read_into(jt, "batch_size", cfg.train.batch_size);
        read_into(jt, "lr", cfg.train.lr);
        read_into(jt, "lr_decay", cfg.train.lr_decay);
        read_into(jt, "stride", cfg.train.stride);
        read_into(jt, "max_train_windows", cfg.train.max_train_windows);
        read_into(jt, "L", base.L);
        read_into(jt, "H", base.H);
        read_into(jt, "latent_dim", base.latent_dim);
        read_into(jt, "width", base.width);
        read_into(jt, "depth", base.depth);
        read_into(jt, "d_model", base.d_model);
        read_into(jt, "heads", base.heads);
        read_into(jt, "layers", base.layers);
        read_into(jt, "reservoir_size", base.reservoir_size);
        read_into(jt, "spectral_radius", base.spectral_radius);
        read_into(jt, "input_scale", base.input_scale);
        read_into(jt, "ridge_lambda", base.ridge_lambda);
        read_into(jt, "density", base.density);
    }

    if (j.contains("models")) {
        cfg.models.clear();
        for (const json& jm : j.at("models")) cfg.models.push_back(model_from_json(jm, base));
    } else {
        cfg.models.clear();
        const bool full = j.value("full_grid", false);
        std::vector<std::string> names = {"mlp", "k-mlp", "n-mlp", "rnn", "a-rnn", "tf", "esn"};
        if (full) names = {"mlp", "k-mlp", "n-mlp", "rnn", "a-rnn", "k-rnn", "n-rnn", "tf", "n-tf", "k-tf", "esn"};
        for (const std::string& n : names) cfg.models.push_back(model_from_json(json(n), base));
    }
    read_into(j, "seeds_per_model", cfg.seeds_per_model);

    if (j.contains("alignment")) {
        const json& ja = j.at("alignment");
        check_keys(ja, {"n_samples", "n_anchors", "seed", "include_true_system"}, "alignment");
        read_into(ja, "n_samples", cfg.align_samples);
        read_into(ja, "n_anchors", cfg.align_anchors);
        read_into(ja, "seed", cfg.align_seed);
        read_into(ja, "include_true_system", cfg.include_true_system);
    }
    if (j.contains("ablation")) {
        const json& ja = j.at("ablation");
        check_keys(ja, {"K_list", "repeats", "model", "random_baseline_K"}, "ablation");
        read_into(ja, "K_list", cfg.ablation_K);
        read_into(ja, "repeats", cfg.ablation_repeats);
        read_into(ja, "model", cfg.ablation_model);
        read_into(ja, "random_baseline_K", cfg.random_baseline_K);
    }
    if (j.contains("perturb")) {
        const json& jp = j.at("perturb");
        check_keys(jp, {"noise_list", "L_list", "families", "seeds"}, "perturb");
        read_into(jp, "noise_list", cfg.noise_list);
        read_into(jp, "L_list", cfg.L_list);
        read_into(jp, "families", cfg.perturb_families);
        read_into(jp, "seeds", cfg.perturb_seeds);
    }
    if (j.contains("stitching")) {
        const json& js = j.at("stitching");
        check_keys(js, {"anchors", "families", "seeds"}, "stitching");
        read_into(js, "anchors", cfg.stitch_anchors);
        read_into(js, "families", cfg.stitch_families);
        read_into(js, "seeds", cfg.stitch_seeds);
    }
    if (j.contains("probe")) {
        const json& jp = j.at("probe");
        check_keys(jp, {"lambda", "train_fraction"}, "probe");
        read_into(jp, "lambda", cfg.probe_lambda);
        read_into(jp, "train_fraction", cfg.probe_train_fraction);
    }

    cfg.system.validate();
    for (const auto& m : cfg.models) m.validate();
    if (cfg.seeds_per_model < 1) throw ConfigError("config: seeds_per_model must be >= 1");
    if (cfg.workers < 1) throw ConfigError("config: workers must be >= 1");
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    return parse_config_text(io::read_text(path));
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["version"] = cfg.version;
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    j["dataset"] = {{"system", dynsys::to_string(cfg.system.system_id)}, {"params", cfg.system.params},
                    {"dt", cfg.system.dt},   {"T", cfg.system.T},
                    {"n_traj", cfg.system.n_traj}};
    if (!cfg.pod_path.empty()) j["dataset"]["pod_path"] = cfg.pod_path;
    json models = json::array();
    for (const auto& m : cfg.models)
        models.push_back({{"family", to_string(m.family)},
                          {"propagator", to_string(m.propagator)},
                          {"L", m.L},
                          {"H", m.H},
                          {"latent_dim", m.latent_dim},
                          {"width", m.width},
                          {"depth", m.depth},
                          {"d_model", m.d_model},
                          {"heads", m.heads},
                          {"layers", m.layers},
                          {"reservoir_size", m.reservoir_size},
                          {"spectral_radius", m.spectral_radius},
                          {"input_scale", m.input_scale},
                          {"ridge_lambda", m.ridge_lambda},
                          {"density", m.density}});
    j["models"] = models;
    j["seeds_per_model"] = cfg.seeds_per_model;
    j["train"] = {{"max_epochs", cfg.train.max_epochs}, {"patience", cfg.train.patience},
                  {"batch_size", cfg.train.batch_size}, {"lr", cfg.train.lr},
                  {"lr_decay", cfg.train.lr_decay},     {"stride", cfg.train.stride},
                  {"max_train_windows", cfg.train.max_train_windows}};
    j["alignment"] = {{"n_samples", cfg.align_samples},
                      {"n_anchors", cfg.align_anchors},
                      {"seed", cfg.align_seed},
                      {"include_true_system", cfg.include_true_system}};
    j["ablation"] = {{"K_list", cfg.ablation_K},
                     {"repeats", cfg.ablation_repeats},
                     {"model", cfg.ablation_model},
                     {"random_baseline_K", cfg.random_baseline_K}};
    j["perturb"] = {{"noise_list", cfg.noise_list},
                    {"L_list", cfg.L_list},
                    {"families", cfg.perturb_families},
                    {"seeds", cfg.perturb_seeds}};
    j["stitching"] = {{"anchors", cfg.stitch_anchors}, {"families", cfg.stitch_families}, {"seeds", cfg.stitch_seeds}};
    j["probe"] = {{"lambda", cfg.probe_lambda}, {"train_fraction", cfg.probe_train_fraction}};
    return j.dump(2);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) { return io::fnv1a(config_to_json(cfg)); }

}  // namespace atlas::cli
