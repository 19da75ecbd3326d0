#ifndef ATLAS_DYNSYS_SYSTEM_HPP
#define ATLAS_DYNSYS_SYSTEM_HPP

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "atlas/errors.hpp"
#include "atlas/rng.hpp"

namespace atlas::dynsys {

enum class SystemId { lorenz63, limit_cycle, double_pendulum, hopf, logistic_map, pod_wake, random_skew };

std::string to_string(SystemId id);
SystemId system_from_string(const std::string& name);
int dimension_of(SystemId id);

// Benchmark system descriptor. Parameters are validated for completeness at
// construction; with_defaults() fills the nominal values.
struct SystemSpec {
    SystemId system_id = SystemId::lorenz63;
    std::map<std::string, double> params;
    double dt = 0.01;
    int T = 500;
    int n_traj = 10;  // per split
    std::uint64_t seed = 0;

    static SystemSpec with_defaults(SystemId id, std::uint64_t seed = 0);

    void validate() const;
    double param(const std::string& name) const;
};

struct Trajectory {
    Eigen::MatrixXd states;  // T x d
    double t0 = 0.0;
    double dt = 0.0;
    Eigen::VectorXd source_ic;
};

using VectorField = std::function<void(double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx)>;

// Right-hand side of the named continuous-time system.
VectorField vector_field(const SystemSpec& spec);

// Adaptive Dormand-Prince 5(4) integration of `field`, sampled every
// dt_record from t=0 to t_span (inclusive; floor(t_span/dt_record)+1 states).
Trajectory integrate_field(const VectorField& field, const Eigen::VectorXd& x0, double t_span,
                           double dt_record, double atol, double rtol);

// System-level entry point with per-system default tolerances.
Trajectory integrate(const SystemSpec& spec, const Eigen::VectorXd& x0, double t_span, double dt_record);

// One application of the logistic map x -> r x (1-x); x must lie in (0,1).
double step_map(const SystemSpec& spec, double x);

struct SkewSystem {
    VectorField field;
    std::string drive_name;
    std::string response_name;
    std::vector<double> drive_params;
    std::vector<double> response_params;
    Eigen::VectorXd nominal_ic;  // concatenated founder seeds, length 6
    double eps = 0.05;
};

// Draws the per-dataset skew-product system: two founders from
// {lorenz, rossler, chen} with log-normally jittered parameters, coupled by a
// weak injection of the first drive coordinate into the first response
// coordinate.
SkewSystem sample_skew_product(std::uint64_t seed, double jitter_sigma = 0.15, double eps = 0.05);

// Total energy of the unit-mass/unit-length double pendulum (test oracle).
double double_pendulum_energy(const Eigen::Vector4d& state, double g);

}  // namespace atlas::dynsys

#endif  // ATLAS_DYNSYS_SYSTEM_HPP
