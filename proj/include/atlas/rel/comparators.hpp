#ifndef ATLAS_REL_COMPARATORS_HPP
#define ATLAS_REL_COMPARATORS_HPP

#include <Eigen/Core>

namespace atlas::rel {

// Baseline similarity measures on absolute latents. All accept N x k1 and
// N x k2 (same sample order, possibly different widths) and return a scalar.

// Linear centered kernel alignment.
double baseline_cka(const Eigen::MatrixXd& Z1, const Eigen::MatrixXd& Z2);

// Spearman correlation of upper-triangle pairwise Euclidean distances.
double baseline_rsa(const Eigen::MatrixXd& Z1, const Eigen::MatrixXd& Z2);

// 1 - normalized residual after the optimal orthogonal map with scaling;
// the narrower matrix is zero-padded to match.
double baseline_procrustes(const Eigen::MatrixXd& Z1, const Eigen::MatrixXd& Z2);

}  // namespace atlas::rel

#endif  // ATLAS_REL_COMPARATORS_HPP
