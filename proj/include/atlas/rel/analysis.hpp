#ifndef ATLAS_REL_ANALYSIS_HPP
#define ATLAS_REL_ANALYSIS_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "atlas/rel/relative.hpp"

namespace atlas::rel {

struct AblationPoint {
    int K = 0;
    double mean = 0.0;
    double std = 0.0;
};

// Anchor-count sweep: for each K, `repeats` draws of shared anchors without
// replacement; alignment is the main-pipeline mean cosine over rows.
// Per-repeat RNG streams derive from (seed, K, repeat) for order independence.
std::vector<AblationPoint> anchor_ablation(const Eigen::MatrixXd& Z_model, const Eigen::MatrixXd& Z_reference,
                                           const std::vector<int>& K_list, int repeats, std::uint64_t seed);

// Control with disjoint anchor sets for the two spaces; near zero by design.
AblationPoint random_baseline(const Eigen::MatrixXd& Z_model, const Eigen::MatrixXd& Z_reference, int K,
                              int repeats, std::uint64_t seed);

// T x 3 track of anchor cosines along consecutive window latents. Z_samples
// supplies the z-scoring statistics and the anchor rows; Z_track holds the
// per-step latents of one trajectory (same encoder, same feature space).
Eigen::MatrixXd relative_track(const Eigen::MatrixXd& Z_samples, const Eigen::MatrixXd& Z_track,
                               const std::array<int, 3>& anchors3);

struct ProbeReport {
    Eigen::VectorXd r2;  // per target channel
    double mean_r2 = 0.0;
};

// Linear ridge probe from latents to the observed state: fit on train rows,
// report held-out R^2 per channel. SingularSystem at lambda=0 with
// rank-deficient features.
ProbeReport probe_ridge(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& X, double lambda,
                        const std::vector<int>& train_rows, const std::vector<int>& test_rows);

struct PcaResult {
    Eigen::MatrixXd coords;       // N x n
    Eigen::VectorXd explained;    // variance ratio per component
    Eigen::MatrixXd components;   // k x n, sign-fixed
};

// Centered SVD projection onto the top n components (n in {2,3}); components
// ordered by singular value; each component's largest-|loading| entry is
// made positive.
PcaResult pca_project(const Eigen::MatrixXd& Z, int n_components);

}  // namespace atlas::rel

#endif  // ATLAS_REL_ANALYSIS_HPP
