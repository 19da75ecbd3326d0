#include "atlas/dynsys/system.hpp"

#include <cmath>

namespace atlas::dynsys {

namespace {

const std::map<std::string, SystemId> kNames = {
    {"lorenz63", SystemId::lorenz63},       {"limit_cycle", SystemId::limit_cycle},
    {"double_pendulum", SystemId::double_pendulum}, {"hopf", SystemId::hopf},
    {"logistic_map", SystemId::logistic_map}, {"pod_wake", SystemId::pod_wake},
    {"random_skew", SystemId::random_skew},
};

std::vector<std::string> required_params(SystemId id) {
    switch (id) {
        case SystemId::lorenz63: return {"sigma", "rho", "beta"};
        case SystemId::limit_cycle: return {"mu", "R", "omega"};
        case SystemId::double_pendulum: return {"g"};
        case SystemId::hopf: return {"mu", "omega"};
        case SystemId::logistic_map: return {"r"};
        case SystemId::pod_wake: return {};
        case SystemId::random_skew: return {"eps", "jitter_sigma", "warmup_frac"};
    }
    return {};
}

}  // namespace

std::string to_string(SystemId id) {
    for (const auto& [name, sid] : kNames)
        if (sid == id) return name;
    return "?";
}

SystemId system_from_string(const std::string& name) {
    auto it = kNames.find(name);
    if (it == kNames.end()) throw ConfigError("unknown system '" + name + "'");
    return it->second;
}

int dimension_of(SystemId id) {
    switch (id) {
        case SystemId::lorenz63: return 3;
        case SystemId::limit_cycle: return 2;
        case SystemId::double_pendulum: return 4;
        case SystemId::hopf: return 2;
        case SystemId::logistic_map: return 1;
        case SystemId::pod_wake: return 3;
        case SystemId::random_skew: return 6;
    }
    return 0;
}

SystemSpec SystemSpec::with_defaults(SystemId id, std::uint64_t seed) {
    SystemSpec s;
    s.system_id = id;
    s.seed = seed;
    switch (id) {
        case SystemId::lorenz63:
            s.params = {{"sigma", 10.0}, {"rho", 28.0}, {"beta", 8.0 / 3.0}};
            break;
        case SystemId::limit_cycle:
            s.params = {{"mu", 1.0}, {"R", 1.0}, {"omega", 1.0}};
            break;
        case SystemId::double_pendulum:
            s.params = {{"g", 9.81}};
            break;
        case SystemId::hopf:
            // Supercritical form: trajectories spiral onto the unit cycle.
            s.params = {{"mu", 1.0}, {"omega", 1.0}};
            break;
        case SystemId::logistic_map:
            s.params = {{"r", 3.57}};
            s.dt = 0.1;  // effective recording step of the map
            break;
        case SystemId::pod_wake:
            s.dt = 0.2;
            break;
        case SystemId::random_skew:
            s.params = {{"eps", 0.05}, {"jitter_sigma", 0.15}, {"warmup_frac", 0.1}};
            break;
    }
    return s;
}

void SystemSpec::validate() const {
    if (!(dt > 0.0)) throw ConfigError("SystemSpec: dt must be positive");
    if (T < 2) throw ConfigError("SystemSpec: T must be at least 2");
    if (n_traj < 1) throw ConfigError("SystemSpec: n_traj must be at least 1");
    for (const std::string& p : required_params(system_id))
        if (!params.count(p))
            throw ConfigError("SystemSpec: missing parameter '" + p + "' for system " + to_string(system_id));
}

double SystemSpec::param(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end())
        throw ConfigError("SystemSpec: missing parameter '" + name + "' for system " + to_string(system_id));
    return it->second;
}

namespace {

VectorField lorenz_field(double sigma, double rho, double beta) {
    return [=](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
        dx[0] = sigma * (x[1] - x[0]);
        dx[1] = x[0] * (rho - x[2]) - x[1];
        dx[2] = x[0] * x[1] - beta * x[2];
    };
}

VectorField rossler_field(double a, double b, double c) {
    return [=](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
        dx[0] = -x[1] - x[2];
        dx[1] = x[0] + a * x[1];
        dx[2] = b + x[2] * (x[0] - c);
    };
}

VectorField chen_field(double a, double b, double c) {
    return [=](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
        dx[0] = a * (x[1] - x[0]);
        dx[1] = (c - a) * x[0] - x[0] * x[2] + c * x[1];
        dx[2] = x[0] * x[1] - b * x[2];
    };
}

}  // namespace

VectorField vector_field(const SystemSpec& spec) {
    switch (spec.system_id) {
        case SystemId::lorenz63:
            return lorenz_field(spec.param("sigma"), spec.param("rho"), spec.param("beta"));
        case SystemId::limit_cycle: {
            const double mu = spec.param("mu"), R = spec.param("R"), omega = spec.param("omega");
            return [=](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
                const double r = std::hypot(x[0], x[1]);
                const double radial = r > 1e-300 ? mu * (R - r) / r : 0.0;
                dx[0] = radial * x[0] - omega * x[1];
                dx[1] = radial * x[1] + omega * x[0];
            };
        }
        case SystemId::double_pendulum: {
            const double g = spec.param("g");
            return [=](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
                const double th1 = x[0], th2 = x[1], w1 = x[2], w2 = x[3];
                const double delta = th2 - th1;
                const double sd = std::sin(delta), cd = std::cos(delta);
                const double denom = 2.0 - cd * cd;
                dx[0] = w1;
                dx[1] = w2;
                dx[2] = (w1 * w1 * sd * cd + g * std::sin(th2) * cd + w2 * w2 * sd - 2.0 * g * std::sin(th1)) / denom;
                dx[3] = (-w2 * w2 * sd * cd + 2.0 * g * std::sin(th1) * cd - 2.0 * w1 * w1 * sd - 2.0 * g * std::sin(th2)) / denom;
            };
        }
        case SystemId::hopf: {
            const double mu = spec.param("mu"), omega = spec.param("omega");
            return [=](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
                const double r2 = x[0] * x[0] + x[1] * x[1];
                dx[0] = mu * x[0] - omega * x[1] - r2 * x[0];
                dx[1] = omega * x[0] + mu * x[1] - r2 * x[1];
            };
        }
        default:
            throw ConfigError("vector_field: " + to_string(spec.system_id) + " is not a fixed continuous-time system");
    }
}

Trajectory integrate_field(const VectorField& field, const Eigen::VectorXd& x0, double t_span,
                           double dt_record, double atol, double rtol) {
    // Dormand-Prince 5(4) pair with FSAL.
    static const double A[7][6] = {
        {0, 0, 0, 0, 0, 0},
        {1.0 / 5, 0, 0, 0, 0, 0},
        {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
        {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
        {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
    };
    static const double C[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static const double B5[7] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0};
    static const double B4[7] = {5179.0 / 57600, 0,           7571.0 / 16695, 393.0 / 640,
                                 -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

    if (!x0.allFinite()) throw NonFiniteState("integrate: initial condition is not finite");
    if (!(dt_record > 0.0)) throw ConfigError("integrate: dt_record must be positive");

    const int d = static_cast<int>(x0.size());
    const int n_samples = static_cast<int>(std::floor(t_span / dt_record + 1e-9)) + 1;

    Trajectory traj;
    traj.states.resize(n_samples, d);
    traj.dt = dt_record;
    traj.source_ic = x0;

    Eigen::VectorXd y = x0, y5(d), y4(d), stage(d);
    std::vector<Eigen::VectorXd> k(7, Eigen::VectorXd(d));
    double t = 0.0;
    double h = dt_record / 10.0;
    bool have_k1 = false;

    traj.states.row(0) = y.transpose();
    for (int s = 1; s < n_samples; ++s) {
        const double t_target = s * dt_record;
        while (t < t_target - 1e-12 * std::max(1.0, t_target)) {
            const double h_try = std::min(h, t_target - t);
            if (h_try < 1e-12) throw StepSizeUnderflow("integrate: step size fell below 1e-12 at t=" + std::to_string(t));
            if (!have_k1) field(t, y, k[0]);
            for (int i = 1; i < 7; ++i) {
                stage = y;
                for (int j = 0; j < i; ++j)
                    if (A[i][j] != 0.0) stage += (h_try * A[i][j]) * k[j];
                field(t + C[i] * h_try, stage, k[i]);
            }
            y5 = y;
            y4 = y;
            for (int i = 0; i < 7; ++i) {
                if (B5[i] != 0.0) y5 += (h_try * B5[i]) * k[i];
                if (B4[i] != 0.0) y4 += (h_try * B4[i]) * k[i];
            }
            if (!y5.allFinite()) throw NonFiniteState("integrate: state became non-finite at t=" + std::to_string(t));
            double err = 0.0;
            for (int i = 0; i < d; ++i) {
                const double sc = atol + rtol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
                const double e = (y5[i] - y4[i]) / sc;
                err += e * e;
            }
            err = std::sqrt(err / d);
            if (err <= 1.0) {
                t += h_try;
                y = y5;
                k[0] = k[6];  // FSAL
                have_k1 = true;
                const double factor = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
                h = h_try * factor;
            } else {
                h = h_try * std::max(0.2, 0.9 * std::pow(err, -0.2));
                have_k1 = false;
                if (h < 1e-12) throw StepSizeUnderflow("integrate: step size fell below 1e-12 at t=" + std::to_string(t));
            }
        }
        traj.states.row(s) = y.transpose();
    }
    return traj;
}

Trajectory integrate(const SystemSpec& spec, const Eigen::VectorXd& x0, double t_span, double dt_record) {
    const bool skew = spec.system_id == SystemId::random_skew;
    const double atol = skew ? 1e-8 : 1e-9;
    const double rtol = skew ? 1e-6 : 1e-7;
    if (skew)
        throw ConfigError("integrate: random_skew requires a sampled field; use integrate_field");
    return integrate_field(vector_field(spec), x0, t_span, dt_record, atol, rtol);
}

double step_map(const SystemSpec& spec, double x) {
    if (spec.system_id != SystemId::logistic_map)
        throw ConfigError("step_map: system is not the logistic map");
    if (!(x > 0.0 && x < 1.0))
        throw DomainError("step_map: x=" + std::to_string(x) + " outside (0,1)");
    return spec.param("r") * x * (1.0 - x);
}

SkewSystem sample_skew_product(std::uint64_t seed, double jitter_sigma, double eps) {
    Rng rng = Rng::derive(seed, 0);

    struct Founder {
        std::string name;
        std::vector<double> params;
        Eigen::Vector3d ic;
    };
    static const std::vector<Founder> founders = {
        {"lorenz", {10.0, 28.0, 8.0 / 3.0}, {1.0, 1.0, 1.0}},
        {"rossler", {0.2, 0.2, 5.7}, {0.1, 0.0, 0.0}},
        {"chen", {35.0, 3.0, 28.0}, {-10.0, 0.0, 37.0}},
    };

    const Founder& fa = founders[rng.index(3)];
    const Founder& fb = founders[rng.index(3)];

    auto jitter = [&](const std::vector<double>& p) {
        std::vector<double> out(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] * std::exp(rng.normal(0.0, jitter_sigma));
        return out;
    };

    SkewSystem sys;
    sys.drive_name = fa.name;
    sys.response_name = fb.name;
    sys.drive_params = jitter(fa.params);
    sys.response_params = jitter(fb.params);
    sys.eps = eps;
    sys.nominal_ic.resize(6);
    sys.nominal_ic << fa.ic, fb.ic;

    auto make = [](const std::string& name, const std::vector<double>& p) {
        if (name == "lorenz") return lorenz_field(p[0], p[1], p[2]);
        if (name == "rossler") return rossler_field(p[0], p[1], p[2]);
        return chen_field(p[0], p[1], p[2]);
    };
    VectorField drive = make(fa.name, sys.drive_params);
    VectorField response = make(fb.name, sys.response_params);

    sys.field = [drive, response, eps](double t, const Eigen::VectorXd& z, Eigen::VectorXd& dz) {
        Eigen::VectorXd x = z.head(3), y = z.tail(3);
        Eigen::VectorXd dx(3), dy(3);
        drive(t, x, dx);
        response(t, y, dy);
        dy[0] += eps * x[0];
        dz.head(3) = dx;
        dz.tail(3) = dy;
    };
    return sys;
}

double double_pendulum_energy(const Eigen::Vector4d& state, double g) {
    const double th1 = state[0], th2 = state[1], w1 = state[2], w2 = state[3];
    const double kinetic = w1 * w1 + 0.5 * w2 * w2 + w1 * w2 * std::cos(th2 - th1);
    const double potential = -g * (2.0 * std::cos(th1) + std::cos(th2));
    return kinetic + potential;
}

}  // namespace atlas::dynsys
