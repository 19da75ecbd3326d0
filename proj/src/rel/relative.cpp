#include "atlas/rel/relative.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace atlas::rel {

void AnchorSet::validate(int n_rows) const {
    std::set<int> seen;
    for (int i : indices) {
        if (i < 0 || i >= n_rows)
            throw IndexError("anchor index " + std::to_string(i) + " out of range [0," +
                             std::to_string(n_rows) + ")");
        if (!seen.insert(i).second) throw Error("anchor index " + std::to_string(i) + " repeated");
    }
}

Eigen::MatrixXd zscore_features(const Eigen::MatrixXd& Z) {
    const Eigen::RowVectorXd mean = Z.colwise().mean();
    const Eigen::RowVectorXd std =
        ((Z.rowwise() - mean).array().square().colwise().mean()).sqrt();
    for (int j = 0; j < Z.cols(); ++j)
        if (std[j] < 1e-12)
            throw DegenerateFeature("zscore_features: column " + std::to_string(j) + " has std " +
                                    std::to_string(std[j]) + " < 1e-12");
    return (Z.rowwise() - mean).array().rowwise() / std.array();
}

Eigen::MatrixXd relative_embed(const Eigen::MatrixXd& Z, const AnchorSet& anchors, bool standardize) {
    anchors.validate(static_cast<int>(Z.rows()));
    const Eigen::MatrixXd Zs = standardize ? zscore_features(Z) : Z;
    const int N = static_cast<int>(Zs.rows());
    const int m = anchors.size();

    Eigen::VectorXd norms(N);
    for (int j = 0; j < N; ++j) {
        norms[j] = Zs.row(j).norm();
        if (norms[j] < 1e-12)
            throw ZeroVector("relative_embed: latent row " + std::to_string(j) + " has norm < 1e-12");
    }
    Eigen::MatrixXd A(m, Zs.cols());
    Eigen::VectorXd anorms(m);
    for (int i = 0; i < m; ++i) {
        A.row(i) = Zs.row(anchors.indices[static_cast<std::size_t>(i)]);
        anorms[i] = norms[anchors.indices[static_cast<std::size_t>(i)]];
    }
    Eigen::MatrixXd R = Zs * A.transpose();
    R.array().colwise() /= norms.array();
    R.array().rowwise() /= anorms.transpose().array();
    return R;
}

namespace {

void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError(std::string(op) + ": shapes " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
}

}  // namespace

double alpha_cosine(const Eigen::MatrixXd& R1, const Eigen::MatrixXd& R2) {
    require_same_shape(R1, R2, "alpha_cosine");
    double total = 0.0;
    for (int j = 0; j < R1.rows(); ++j) {
        const double n1 = R1.row(j).norm(), n2 = R2.row(j).norm();
        if (n1 < 1e-12 || n2 < 1e-12)
            throw ZeroVector("alpha_cosine: relative embedding row " + std::to_string(j) + " has norm < 1e-12");
        total += R1.row(j).dot(R2.row(j)) / (n1 * n2);
    }
    return total / static_cast<double>(R1.rows());
}

namespace {

int stable_argmax(const Eigen::VectorXd& row) {
    int best = 0;
    for (int i = 1; i < row.size(); ++i)
        if (row[i] > row[best]) best = i;
    return best;
}

}  // namespace

double alpha_t1(const Eigen::MatrixXd& R1, const Eigen::MatrixXd& R2) {
    require_same_shape(R1, R2, "alpha_t1");
    int agree = 0;
    for (int j = 0; j < R1.rows(); ++j)
        if (stable_argmax(R1.row(j)) == stable_argmax(R2.row(j))) ++agree;
    return static_cast<double>(agree) / static_cast<double>(R1.rows());
}

Eigen::VectorXd rank_descending(const Eigen::VectorXd& row) {
    const int m = static_cast<int>(row.size());
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return row[a] > row[b]; });
    Eigen::VectorXd ranks(m);
    for (int r = 0; r < m; ++r) ranks[order[static_cast<std::size_t>(r)]] = r + 1;
    return ranks;
}

namespace {

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double ma = a.mean(), mb = b.mean();
    const Eigen::VectorXd ca = a.array() - ma, cb = b.array() - mb;
    const double denom = ca.norm() * cb.norm();
    if (denom < 1e-300) throw ZeroVector("pearson: zero-variance input");
    return ca.dot(cb) / denom;
}

}  // namespace

double alpha_rank(const Eigen::MatrixXd& R1, const Eigen::MatrixXd& R2) {
    require_same_shape(R1, R2, "alpha_rank");
    if (R1.cols() < 2) throw ShapeError("alpha_rank: needs at least 2 anchors");
    double total = 0.0;
    for (int j = 0; j < R1.rows(); ++j)
        total += pearson(rank_descending(R1.row(j)), rank_descending(R2.row(j)));
    return total / static_cast<double>(R1.rows());
}

AlignmentReport align_pair(const std::string& id_a, const Eigen::MatrixXd& Za, const std::string& id_b,
                           const Eigen::MatrixXd& Zb, const AnchorSet& anchors, std::uint64_t seed) {
    if (Za.rows() != Zb.rows())
        throw ShapeError("align_pair: sample counts differ (" + std::to_string(Za.rows()) + " vs " +
                         std::to_string(Zb.rows()) + ")");
    const Eigen::MatrixXd Ra = relative_embed(Za, anchors, true);
    const Eigen::MatrixXd Rb = relative_embed(Zb, anchors, true);
    AlignmentReport rep;
    rep.id_a = id_a;
    rep.id_b = id_b;
    rep.cosine = alpha_cosine(Ra, Rb);
    rep.t1 = alpha_t1(Ra, Rb);
    rep.rank = alpha_rank(Ra, Rb);
    rep.n_samples = static_cast<int>(Za.rows());
    rep.n_anchors = anchors.size();
    rep.seed = seed;
    return rep;
}

}  // namespace atlas::rel
