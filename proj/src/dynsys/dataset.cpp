#include "atlas/dynsys/dataset.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "atlas/io.hpp"
#include "json.hpp"

namespace atlas::dynsys {

using json = nlohmann::json;

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

int TrajectorySet::dim() const {
    for (const auto& sp : splits)
        if (!sp.empty()) return static_cast<int>(sp.front().states.cols());
    return dimension_of(system.system_id);
}

namespace {

Eigen::VectorXd sample_ic(const SystemSpec& spec, Rng& rng, const SkewSystem* skew) {
    switch (spec.system_id) {
        case SystemId::lorenz63: {
            Eigen::VectorXd x(3);
            for (int i = 0; i < 3; ++i) x[i] = rng.uniform(-20.0, 20.0);
            return x;
        }
        case SystemId::limit_cycle: {
            const double r0 = rng.uniform(0.0, 20.0);
            const double th0 = rng.uniform(0.0, 2.0 * M_PI);
            Eigen::VectorXd x(2);
            x << r0 * std::cos(th0), r0 * std::sin(th0);
            return x;
        }
        case SystemId::double_pendulum: {
            const double deg = M_PI / 180.0;
            Eigen::VectorXd x(4);
            x[0] = rng.uniform(-20.0 * deg, 20.0 * deg);
            x[1] = rng.uniform(-20.0 * deg, 20.0 * deg);
            x[2] = rng.uniform(-1.0, 1.0);
            x[3] = rng.uniform(-1.0, 1.0);
            return x;
        }
        case SystemId::hopf: {
            Eigen::VectorXd x(2);
            x << rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0);
            return x;
        }
        case SystemId::logistic_map: {
            Eigen::VectorXd x(1);
            double v = rng.uniform();
            while (v <= 0.0) v = rng.uniform();  // open interval (0,1)
            x[0] = v;
            return x;
        }
        case SystemId::random_skew: {
            Eigen::VectorXd x = skew->nominal_ic;
            for (int i = 0; i < 6; ++i) x[i] += rng.normal(0.0, 0.1);
            return x;
        }
        default:
            throw ConfigError("sample_ic: pod_wake has no synthetic sampler");
    }
}

Trajectory iterate_logistic(const SystemSpec& spec, double x0) {
    Trajectory traj;
    traj.states.resize(spec.T, 1);
    traj.dt = spec.dt;
    traj.source_ic = Eigen::VectorXd::Constant(1, x0);
    double x = x0;
    traj.states(0, 0) = x;
    for (int t = 1; t < spec.T; ++t) {
        x = step_map(spec, x);
        traj.states(t, 0) = x;
    }
    return traj;
}

// One skew run: warm-up discard plus the paper's rejection gates.
// Returns nullopt when the run is rejected.
std::optional<Trajectory> skew_run(const SystemSpec& spec, const SkewSystem& sys, const Eigen::VectorXd& ic) {
    const int warm = static_cast<int>(std::ceil(spec.param("warmup_frac") * spec.T));
    const int total = warm + spec.T;
    Trajectory full;
    try {
        full = integrate_field(sys.field, ic, (total - 1) * spec.dt, spec.dt, 1e-8, 1e-6);
    } catch (const NonFiniteState&) {
        return std::nullopt;
    } catch (const StepSizeUnderflow&) {
        return std::nullopt;
    }
    Trajectory kept;
    kept.states = full.states.bottomRows(spec.T);
    kept.t0 = warm * spec.dt;
    kept.dt = spec.dt;
    kept.source_ic = ic;

    if (!kept.states.allFinite()) return std::nullopt;
    if (kept.states.rowwise().norm().maxCoeff() > 1e6) return std::nullopt;
    const Eigen::RowVectorXd mean = kept.states.colwise().mean();
    const double var_sum =
        (kept.states.rowwise() - mean).array().square().colwise().mean().sum();
    if (var_sum < 1e-6) return std::nullopt;
    return kept;
}

Trajectory generate_one(const SystemSpec& spec, int global_index, const SkewSystem* skew) {
    Rng rng = Rng::derive(spec.seed, 1 + static_cast<std::uint64_t>(global_index));
    if (spec.system_id == SystemId::logistic_map)
        return iterate_logistic(spec, sample_ic(spec, rng, nullptr)[0]);
    if (spec.system_id == SystemId::random_skew) {
        for (int attempt = 0; attempt < 2; ++attempt) {
            const Eigen::VectorXd ic = sample_ic(spec, rng, skew);
            auto traj = skew_run(spec, *skew, ic);
            if (traj) return *traj;
        }
        throw GenerationFailed("random_skew trajectory " + std::to_string(global_index) +
                               " rejected twice (non-finite, escaped, or degenerate)");
    }
    const Eigen::VectorXd ic = sample_ic(spec, rng, nullptr);
    return integrate(spec, ic, (spec.T - 1) * spec.dt, spec.dt);
}

void normalize_inplace(TrajectorySet& set) {
    const int d = set.dim();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    long count = 0;
    for (const Trajectory& tr : set.split(Split::train)) {
        mean += tr.states.colwise().sum().transpose();
        count += tr.states.rows();
    }
    mean /= static_cast<double>(count);
    Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
    for (const Trajectory& tr : set.split(Split::train))
        var += (tr.states.rowwise() - mean.transpose()).array().square().colwise().sum().matrix().transpose();
    var /= static_cast<double>(count);
    Eigen::VectorXd std = var.array().sqrt();
    for (int j = 0; j < d; ++j)
        if (std[j] < 1e-12)
            throw DegenerateChannel("channel " + std::to_string(j) + " has train std " +
                                    std::to_string(std[j]) + " < 1e-12");
    set.norm.mean = mean;
    set.norm.stddev = std;
    for (auto& split : set.splits)
        for (Trajectory& tr : split)
            tr.states = (tr.states.rowwise() - mean.transpose()).array().rowwise() /
                        std.transpose().array();
}

}  // namespace

TrajectorySet generate_dataset(const SystemSpec& spec) {
    spec.validate();
    if (spec.system_id == SystemId::pod_wake)
        throw ConfigError("generate_dataset: pod_wake is file-backed; use load_pod");

    TrajectorySet set;
    set.system = spec;

    SkewSystem skew;
    const SkewSystem* skew_ptr = nullptr;
    if (spec.system_id == SystemId::random_skew) {
        skew = sample_skew_product(spec.seed, spec.param("jitter_sigma"), spec.param("eps"));
        skew_ptr = &skew;
        set.skew_description = skew.drive_name + "->" + skew.response_name;
    }

    // Deterministic split assignment: the first n_traj initial-condition
    // streams go to train, the next n_traj to val, the last to test.
    for (int s = 0; s < 3; ++s) {
        auto& split = set.splits[static_cast<std::size_t>(s)];
        split.reserve(static_cast<std::size_t>(spec.n_traj));
        for (int i = 0; i < spec.n_traj; ++i)
            split.push_back(generate_one(spec, s * spec.n_traj + i, skew_ptr));
    }
    normalize_inplace(set);
    return set;
}

TrajectorySet load_pod(const std::filesystem::path& path, int T, int n_traj, double dt) {
    const std::string text = io::read_text(path);
    std::vector<double> values;
    int n_rows = 0;
    int line_no = 0;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        ++line_no;
        // Normalize delimiters: commas become spaces.
        for (char& c : line)
            if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
        std::istringstream cells(line);
        std::string cell;
        int col = 0;
        while (cells >> cell) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw ParseError("pod file " + path.string() + ": line " + std::to_string(line_no) +
                                 ", column " + std::to_string(col + 1) + ": cannot parse '" + cell + "'");
            if (!std::isfinite(v))
                throw ParseError("pod file " + path.string() + ": line " + std::to_string(line_no) +
                                 ", column " + std::to_string(col + 1) + ": non-finite value '" + cell + "'");
            values.push_back(v);
            ++col;
        }
        if (col == 0) continue;  // blank line
        if (col != 3)
            throw ShapeError("pod file " + path.string() + ": line " + std::to_string(line_no) + " has " +
                             std::to_string(col) + " channels, expected 3");
        ++n_rows;
    }
    if (n_rows == 0) throw ParseError("pod file " + path.string() + ": no data rows");
    const int needed = 3 * n_traj * T;
    if (n_rows < needed)
        throw ShapeError("pod file " + path.string() + ": " + std::to_string(n_rows) + " rows, need " +
                         std::to_string(needed));

    TrajectorySet set;
    set.system = SystemSpec::with_defaults(SystemId::pod_wake);
    set.system.T = T;
    set.system.n_traj = n_traj;
    set.system.dt = dt;
    int row = 0;
    for (int s = 0; s < 3; ++s) {
        for (int i = 0; i < n_traj; ++i) {
            Trajectory tr;
            tr.states.resize(T, 3);
            tr.dt = dt;
            tr.t0 = row * dt;
            for (int t = 0; t < T; ++t, ++row)
                for (int j = 0; j < 3; ++j) tr.states(t, j) = values[static_cast<std::size_t>(row) * 3 + j];
            tr.source_ic = tr.states.row(0).transpose();
            set.splits[static_cast<std::size_t>(s)].push_back(std::move(tr));
        }
    }
    normalize_inplace(set);
    return set;
}

std::array<std::vector<Window>, 3> make_windows(const TrajectorySet& set, int L, int H, int Stride) {
    if (L < 1 || H < 1) throw ConfigError("make_windows: L and H must be at least 1");
    if (Stride < 1) throw ConfigError("make_windows: stride must be at least 1");
    const int T = set.system.T;
    if (L + H > T)
        throw ShapeError("make_windows: L+H=" + std::to_string(L + H) + " exceeds T=" + std::to_string(T));
    std::array<std::vector<Window>, 3> out;
    for (int s = 0; s < 3; ++s) {
        const auto& trajs = set.splits[static_cast<std::size_t>(s)];
        auto& windows = out[static_cast<std::size_t>(s)];
        for (std::size_t ti = 0; ti < trajs.size(); ++ti) {
            const Eigen::MatrixXd& st = trajs[ti].states;
            for (int start = 0; start + L + H <= T; start += Stride) {
                Window w;
                w.input = st.middleRows(start, L);
                w.target = st.middleRows(start + L, H);
                w.traj_id = static_cast<int>(ti);
                w.start_index = start;
                windows.push_back(std::move(w));
            }
        }
    }
    return out;
}

namespace {

json spec_to_json(const SystemSpec& s) {
    return json{{"system", to_string(s.system_id)}, {"params", s.params}, {"dt", s.dt},
                {"T", s.T},       {"n_traj", s.n_traj},                  {"seed", s.seed}};
}

SystemSpec spec_from_json(const json& j) {
    SystemSpec s;
    s.system_id = system_from_string(j.at("system").get<std::string>());
    s.params = j.at("params").get<std::map<std::string, double>>();
    s.dt = j.at("dt").get<double>();
    s.T = j.at("T").get<int>();
    s.n_traj = j.at("n_traj").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

}  // namespace

void save_dataset(const TrajectorySet& set, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json meta;
    meta["format_version"] = 1;
    meta["system"] = spec_to_json(set.system);
    meta["norm"] = {{"mean", std::vector<double>(set.norm.mean.data(), set.norm.mean.data() + set.norm.mean.size())},
                    {"std", std::vector<double>(set.norm.stddev.data(), set.norm.stddev.data() + set.norm.stddev.size())}};
    if (!set.skew_description.empty()) meta["skew"] = set.skew_description;
    for (Split s : kSplits) {
        const auto& trajs = set.split(s);
        json jt = json::array();
        std::vector<double> blob;
        for (const Trajectory& tr : trajs) {
            jt.push_back({{"t0", tr.t0},
                          {"dt", tr.dt},
                          {"ic", std::vector<double>(tr.source_ic.data(), tr.source_ic.data() + tr.source_ic.size())},
                          {"rows", tr.states.rows()},
                          {"cols", tr.states.cols()}});
            for (int i = 0; i < tr.states.rows(); ++i)
                for (int j = 0; j < tr.states.cols(); ++j) blob.push_back(tr.states(i, j));
        }
        meta["splits"][to_string(s)] = jt;
        io::write_doubles(dir / (to_string(s) + ".bin"), blob);
    }
    io::write_text(dir / "meta.json", meta.dump(2) + "\n");
}

TrajectorySet load_dataset(const std::filesystem::path& dir) {
    const json meta = json::parse(io::read_text(dir / "meta.json"));
    if (meta.at("format_version").get<int>() != 1)
        throw ParseError("dataset " + dir.string() + ": unsupported format_version");
    TrajectorySet set;
    set.system = spec_from_json(meta.at("system"));
    const auto mean = meta.at("norm").at("mean").get<std::vector<double>>();
    const auto stddev = meta.at("norm").at("std").get<std::vector<double>>();
    set.norm.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<long>(mean.size()));
    set.norm.stddev = Eigen::Map<const Eigen::VectorXd>(stddev.data(), static_cast<long>(stddev.size()));
    if (meta.contains("skew")) set.skew_description = meta.at("skew").get<std::string>();
    for (Split s : kSplits) {
        const auto blob = io::read_doubles(dir / (to_string(s) + ".bin"));
        std::size_t off = 0;
        for (const json& jt : meta.at("splits").at(to_string(s))) {
            Trajectory tr;
            tr.t0 = jt.at("t0").get<double>();
            tr.dt = jt.at("dt").get<double>();
            const auto ic = jt.at("ic").get<std::vector<double>>();
            tr.source_ic = Eigen::Map<const Eigen::VectorXd>(ic.data(), static_cast<long>(ic.size()));
            const long rows = jt.at("rows").get<long>();
            const long cols = jt.at("cols").get<long>();
            tr.states.resize(rows, cols);
            for (long i = 0; i < rows; ++i)
                for (long j = 0; j < cols; ++j) tr.states(i, j) = blob.at(off++);
            set.split(s).push_back(std::move(tr));
        }
    }
    return set;
}

std::uint64_t fingerprint(const TrajectorySet& set) {
    std::uint64_t h = io::fnv1a(to_string(set.system.system_id));
    for (Split s : kSplits)
        for (const Trajectory& tr : set.split(s))
            for (int i = 0; i < tr.states.rows(); ++i)
                for (int j = 0; j < tr.states.cols(); ++j) {
                    const double v = tr.states(i, j);
                    h = io::fnv1a(&v, sizeof(v), h);
                }
    return h;
}

}  // namespace atlas::dynsys
