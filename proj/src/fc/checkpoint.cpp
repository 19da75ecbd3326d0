#include "atlas/fc/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "atlas/io.hpp"
#include "json.hpp"

namespace atlas::fc {

using json = nlohmann::json;

namespace {

constexpr char kMagic[] = "ATLASCKPT1\n";

json spec_to_json(const ForecasterSpec& s) {
    return json{{"family", to_string(s.family)},
                {"propagator", to_string(s.propagator)},
                {"L", s.L},
                {"H", s.H},
                {"latent_dim", s.latent_dim},
                {"width", s.width},
                {"depth", s.depth},
                {"d_model", s.d_model},
                {"heads", s.heads},
                {"layers", s.layers},
                {"reservoir_size", s.reservoir_size},
                {"spectral_radius", s.spectral_radius},
                {"input_scale", s.input_scale},
                {"ridge_lambda", s.ridge_lambda},
                {"density", s.density},
                {"seed", s.seed}};
}

ForecasterSpec spec_from_json(const json& j) {
    ForecasterSpec s;
    s.family = family_from_string(j.at("family").get<std::string>());
    s.propagator = propagator_from_string(j.at("propagator").get<std::string>());
    s.L = j.at("L").get<int>();
    s.H = j.at("H").get<int>();
    s.latent_dim = j.at("latent_dim").get<int>();
    s.width = j.at("width").get<int>();
    s.depth = j.at("depth").get<int>();
    s.d_model = j.at("d_model").get<int>();
    s.heads = j.at("heads").get<int>();
    s.layers = j.at("layers").get<int>();
    s.reservoir_size = j.at("reservoir_size").get<int>();
    s.spectral_radius = j.at("spectral_radius").get<double>();
    s.input_scale = j.at("input_scale").get<double>();
    s.ridge_lambda = j.at("ridge_lambda").get<double>();
    s.density = j.at("density").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    json header;
    header["format_version"] = 1;
    header["spec"] = spec_to_json(ckpt.spec);
    header["data_dim"] = ckpt.data_dim;
    header["data_dt"] = ckpt.data_dt;
    header["id"] = ckpt.id;
    header["dataset_fingerprint"] = io::hex64(ckpt.dataset_fingerprint);
    header["best_val"] = ckpt.best_val;
    header["norm"] = {
        {"mean", std::vector<double>(ckpt.norm.mean.data(), ckpt.norm.mean.data() + ckpt.norm.mean.size())},
        {"std", std::vector<double>(ckpt.norm.stddev.data(), ckpt.norm.stddev.data() + ckpt.norm.stddev.size())}};
    json log = json::array();
    for (const TrainLogEntry& e : ckpt.log)
        log.push_back({{"train_mse", e.train_mse}, {"val_mse", e.val_mse}, {"lr", e.lr}});
    header["train_log"] = log;
    json tensors = json::array();
    for (const auto& [name, t] : ckpt.params.items())
        tensors.push_back({{"name", name}, {"shape", t.shape}});
    header["tensors"] = tensors;

    const std::string js = header.dump();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("save_checkpoint: cannot open " + path.string());
    f.write(kMagic, static_cast<std::streamsize>(std::strlen(kMagic)));
    const std::uint64_t len = js.size();
    unsigned char lenbuf[8];
    for (int i = 0; i < 8; ++i) lenbuf[i] = static_cast<unsigned char>((len >> (8 * i)) & 0xff);
    f.write(reinterpret_cast<const char*>(lenbuf), 8);
    f.write(js.data(), static_cast<std::streamsize>(js.size()));
    for (const auto& [name, t] : ckpt.params.items())
        f.write(reinterpret_cast<const char*>(t.data->data()),
                static_cast<std::streamsize>(t.data->size() * sizeof(double)));
    if (!f) throw Error("save_checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("load_checkpoint: cannot open " + path.string());
    char magic[sizeof(kMagic)] = {};
    f.read(magic, static_cast<std::streamsize>(std::strlen(kMagic)));
    if (std::strncmp(magic, kMagic, std::strlen(kMagic)) != 0)
        throw ParseError("load_checkpoint: bad magic in " + path.string());
    unsigned char lenbuf[8];
    f.read(reinterpret_cast<char*>(lenbuf), 8);
    std::uint64_t len = 0;
    for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(lenbuf[i]) << (8 * i);
    std::string js(len, '\0');
    f.read(js.data(), static_cast<std::streamsize>(len));
    if (!f) throw ParseError("load_checkpoint: truncated header in " + path.string());
    const json header = json::parse(js);
    if (header.at("format_version").get<int>() != 1)
        throw ParseError("load_checkpoint: unsupported format_version");

    Checkpoint ckpt;
    ckpt.spec = spec_from_json(header.at("spec"));
    ckpt.data_dim = header.at("data_dim").get<int>();
    ckpt.data_dt = header.at("data_dt").get<double>();
    ckpt.id = header.at("id").get<std::string>();
    ckpt.dataset_fingerprint = std::stoull(header.at("dataset_fingerprint").get<std::string>(), nullptr, 16);
    ckpt.best_val = header.at("best_val").get<double>();
    const auto mean = header.at("norm").at("mean").get<std::vector<double>>();
    const auto stddev = header.at("norm").at("std").get<std::vector<double>>();
    ckpt.norm.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<long>(mean.size()));
    ckpt.norm.stddev = Eigen::Map<const Eigen::VectorXd>(stddev.data(), static_cast<long>(stddev.size()));
    for (const json& e : header.at("train_log"))
        ckpt.log.push_back({e.at("train_mse").get<double>(), e.at("val_mse").get<double>(), e.at("lr").get<double>()});

    for (const json& tj : header.at("tensors")) {
        const auto shape = tj.at("shape").get<std::vector<int>>();
        ad::Tensor t = ad::zeros(shape);
        f.read(reinterpret_cast<char*>(t.data->data()),
               static_cast<std::streamsize>(t.data->size() * sizeof(double)));
        if (!f) throw ParseError("load_checkpoint: truncated tensor data in " + path.string());
        ckpt.params.add(tj.at("name").get<std::string>(), std::move(t));
    }
    return ckpt;
}

}  // namespace atlas::fc
