#ifndef ATLAS_REL_RELATIVE_HPP
#define ATLAS_REL_RELATIVE_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "atlas/errors.hpp"

namespace atlas::rel {

// Anchor rows within the shared sample-index list. Indices are distinct and
// identical across every forecaster's latent matrix.
struct AnchorSet {
    std::vector<int> indices;

    void validate(int n_rows) const;
    int size() const { return static_cast<int>(indices.size()); }
};

// Feature-wise z-scoring across the dataset (population std). Throws
// DegenerateFeature naming the first constant column.
Eigen::MatrixXd zscore_features(const Eigen::MatrixXd& Z);

// N x m matrix of cosine similarities against the anchor rows; anchors are
// rows of the (optionally z-scored) matrix itself.
Eigen::MatrixXd relative_embed(const Eigen::MatrixXd& Z, const AnchorSet& anchors, bool standardize = true);

// Mean over rows of cos(R1[j,:], R2[j,:]).
double alpha_cosine(const Eigen::MatrixXd& R1, const Eigen::MatrixXd& R2);

// Fraction of rows whose argmax anchor coincides (ties -> lowest column).
double alpha_t1(const Eigen::MatrixXd& R1, const Eigen::MatrixXd& R2);

// Mean Spearman correlation of descending anchor ranks (stable-sort ties),
// computed as Pearson correlation of the rank-transformed rows.
double alpha_rank(const Eigen::MatrixXd& R1, const Eigen::MatrixXd& R2);

// Descending ranks of one similarity row: rank 1 for the largest entry, ties
// resolved by stable order (earlier column wins).
Eigen::VectorXd rank_descending(const Eigen::VectorXd& row);

struct AlignmentReport {
    std::string id_a;
    std::string id_b;
    double cosine = 0.0;
    double t1 = 0.0;
    double rank = 0.0;
    int n_samples = 0;
    int n_anchors = 0;
    std::uint64_t seed = 0;
};

AlignmentReport align_pair(const std::string& id_a, const Eigen::MatrixXd& Za, const std::string& id_b,
                           const Eigen::MatrixXd& Zb, const AnchorSet& anchors, std::uint64_t seed);

}  // namespace atlas::rel

#endif  // ATLAS_REL_RELATIVE_HPP
