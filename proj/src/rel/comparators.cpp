#include "atlas/rel/comparators.hpp"

#include <Eigen/SVD>

#include "atlas/rel/relative.hpp"

namespace atlas::rel {

namespace {

void require_same_rows(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* op) {
    if (a.rows() != b.rows())
        throw ShapeError(std::string(op) + ": sample counts differ (" + std::to_string(a.rows()) + " vs " +
                         std::to_string(b.rows()) + ")");
}

Eigen::MatrixXd center(const Eigen::MatrixXd& Z) { return Z.rowwise() - Z.colwise().mean(); }

}  // namespace

double baseline_cka(const Eigen::MatrixXd& Z1, const Eigen::MatrixXd& Z2) {
    require_same_rows(Z1, Z2, "baseline_cka");
    const Eigen::MatrixXd X = center(Z1), Y = center(Z2);
    const double cross = (X.transpose() * Y).squaredNorm();
    const double nx = (X.transpose() * X).norm();
    const double ny = (Y.transpose() * Y).norm();
    if (nx < 1e-300 || ny < 1e-300)
        throw DegenerateFeature("baseline_cka: an input has an all-zero centered Gram matrix");
    return cross / (nx * ny);
}

double baseline_rsa(const Eigen::MatrixXd& Z1, const Eigen::MatrixXd& Z2) {
    require_same_rows(Z1, Z2, "baseline_rsa");
    const int N = static_cast<int>(Z1.rows());
    if (N < 3) throw ShapeError("baseline_rsa: need at least 3 samples");
    const long n_pairs = static_cast<long>(N) * (N - 1) / 2;
    Eigen::VectorXd d1(n_pairs), d2(n_pairs);
    long p = 0;
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j, ++p) {
            d1[p] = (Z1.row(i) - Z1.row(j)).norm();
            d2[p] = (Z2.row(i) - Z2.row(j)).norm();
        }
    // Spearman: Pearson on rank transforms (shared stable-ties convention).
    const Eigen::VectorXd r1 = rank_descending(d1), r2 = rank_descending(d2);
    const Eigen::VectorXd c1 = r1.array() - r1.mean(), c2 = r2.array() - r2.mean();
    const double denom = c1.norm() * c2.norm();
    if (denom < 1e-300) throw DegenerateFeature("baseline_rsa: constant distance structure");
    return c1.dot(c2) / denom;
}

double baseline_procrustes(const Eigen::MatrixXd& Z1, const Eigen::MatrixXd& Z2) {
    require_same_rows(Z1, Z2, "baseline_procrustes");
    const long k = std::max(Z1.cols(), Z2.cols());
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(Z1.rows(), k);
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(Z2.rows(), k);
    X.leftCols(Z1.cols()) = Z1;
    Y.leftCols(Z2.cols()) = Z2;
    X = center(X);
    Y = center(Y);
    const double nx = X.norm(), ny = Y.norm();
    if (nx < 1e-300 || ny < 1e-300)
        throw DegenerateFeature("baseline_procrustes: an input is constant after centering");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X.transpose() * Y);
    const double trace_sigma = svd.singularValues().sum();
    // Residual after optimal rotation + scaling: 1 - (tr Sigma)^2/(|X|^2 |Y|^2).
    return (trace_sigma * trace_sigma) / (nx * nx * ny * ny);
}

}  // namespace atlas::rel
