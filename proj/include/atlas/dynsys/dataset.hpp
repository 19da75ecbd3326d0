#ifndef ATLAS_DYNSYS_DATASET_HPP
#define ATLAS_DYNSYS_DATASET_HPP

#include <array>
#include <filesystem>
#include <optional>

#include "atlas/dynsys/system.hpp"

namespace atlas::dynsys {

enum class Split { train = 0, val = 1, test = 2 };
constexpr std::array<Split, 3> kSplits{Split::train, Split::val, Split::test};
std::string to_string(Split s);

// Per-channel z-scoring statistics in raw system units, train split only.
struct NormalizationStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;
};

struct TrajectorySet {
    std::array<std::vector<Trajectory>, 3> splits;
    NormalizationStats norm;
    SystemSpec system;
    // Present for random_skew: the sampled founder pair, for provenance.
    std::string skew_description;

    const std::vector<Trajectory>& split(Split s) const { return splits[static_cast<std::size_t>(s)]; }
    std::vector<Trajectory>& split(Split s) { return splits[static_cast<std::size_t>(s)]; }
    int dim() const;
};

struct Window {
    Eigen::MatrixXd input;   // L x d
    Eigen::MatrixXd target;  // H x d
    int traj_id = 0;         // index within its split
    int start_index = 0;     // first row of `input` in the source trajectory
};

// Generates n_traj trajectories per split, normalizes with train statistics,
// and returns the z-scored set. Deterministic in spec.seed; trajectory i uses
// the derived stream (seed, 1+i) so parallel and serial generation agree.
TrajectorySet generate_dataset(const SystemSpec& spec);

// Ingests a delimited table of 3-channel POD coefficients and partitions it
// into n_traj x T trajectories per split (z-score only).
TrajectorySet load_pod(const std::filesystem::path& path, int T = 500, int n_traj = 10, double dt = 0.2);

std::array<std::vector<Window>, 3> make_windows(const TrajectorySet& set, int L, int H, int Stride = 1);

void save_dataset(const TrajectorySet& set, const std::filesystem::path& dir);
TrajectorySet load_dataset(const std::filesystem::path& dir);

// Content hash over all splits (checkpoint provenance).
std::uint64_t fingerprint(const TrajectorySet& set);

}  // namespace atlas::dynsys

#endif  // ATLAS_DYNSYS_DATASET_HPP
