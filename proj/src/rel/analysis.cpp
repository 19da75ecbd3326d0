#include "atlas/rel/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <Eigen/SVD>
#include <cmath>

#include "atlas/rng.hpp"

namespace atlas::rel {

namespace {

// Canonical (sorted) anchor order: the draw is a set, and a fixed column
// order keeps repeated draws of the same set bit-identical.
AnchorSet to_anchor_set(const std::vector<std::size_t>& draw) {
    AnchorSet a;
    a.indices.reserve(draw.size());
    for (std::size_t i : draw) a.indices.push_back(static_cast<int>(i));
    std::sort(a.indices.begin(), a.indices.end());
    return a;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

std::vector<AblationPoint> anchor_ablation(const Eigen::MatrixXd& Z_model, const Eigen::MatrixXd& Z_reference,
                                           const std::vector<int>& K_list, int repeats, std::uint64_t seed) {
    if (Z_model.rows() != Z_reference.rows())
        throw ShapeError("anchor_ablation: sample counts differ");
    const int N = static_cast<int>(Z_model.rows());
    for (int K : K_list)
        if (K < 1 || K > N)
            throw InsufficientSamples("anchor_ablation: K=" + std::to_string(K) + " with N=" + std::to_string(N));

    // Standardize once; every repeat then embeds without re-scoring.
    const Eigen::MatrixXd Zm = zscore_features(Z_model);
    const Eigen::MatrixXd Zr = zscore_features(Z_reference);

    std::vector<AblationPoint> out;
    out.reserve(K_list.size());
    for (int K : K_list) {
        std::vector<double> vals(static_cast<std::size_t>(repeats));
        for (int rep = 0; rep < repeats; ++rep) {
            Rng rng = Rng::derive(seed, (static_cast<std::uint64_t>(K) << 32) | static_cast<std::uint64_t>(rep));
            const AnchorSet anchors = to_anchor_set(rng.sample_without_replacement(N, static_cast<std::size_t>(K)));
            const Eigen::MatrixXd R1 = relative_embed(Zm, anchors, false);
            const Eigen::MatrixXd R2 = relative_embed(Zr, anchors, false);
            vals[static_cast<std::size_t>(rep)] = alpha_cosine(R1, R2);
        }
        const double m = mean_of(vals);
        out.push_back({K, m, std_of(vals, m)});
    }
    return out;
}

AblationPoint random_baseline(const Eigen::MatrixXd& Z_model, const Eigen::MatrixXd& Z_reference, int K,
                              int repeats, std::uint64_t seed) {
    if (Z_model.rows() != Z_reference.rows())
        throw ShapeError("random_baseline: sample counts differ");
    const int N = static_cast<int>(Z_model.rows());
    if (2 * K > N)
        throw InsufficientSamples("random_baseline: 2K=" + std::to_string(2 * K) + " exceeds N=" +
                                  std::to_string(N) + " (disjoint sets impossible)");
    const Eigen::MatrixXd Zm = zscore_features(Z_model);
    const Eigen::MatrixXd Zr = zscore_features(Z_reference);

    std::vector<double> vals(static_cast<std::size_t>(repeats));
    for (int rep = 0; rep < repeats; ++rep) {
        Rng rng = Rng::derive(seed, 0x9000 + static_cast<std::uint64_t>(rep));
        const auto draw = rng.sample_without_replacement(N, static_cast<std::size_t>(2 * K));
        AnchorSet a_model, a_ref;
        for (int i = 0; i < K; ++i) a_model.indices.push_back(static_cast<int>(draw[static_cast<std::size_t>(i)]));
        for (int i = K; i < 2 * K; ++i) a_ref.indices.push_back(static_cast<int>(draw[static_cast<std::size_t>(i)]));
        std::sort(a_model.indices.begin(), a_model.indices.end());
        std::sort(a_ref.indices.begin(), a_ref.indices.end());
        const Eigen::MatrixXd R1 = relative_embed(Zm, a_model, false);
        const Eigen::MatrixXd R2 = relative_embed(Zr, a_ref, false);
        vals[static_cast<std::size_t>(rep)] = alpha_cosine(R1, R2);
    }
    const double m = mean_of(vals);
    return {K, m, std_of(vals, m)};
}

Eigen::MatrixXd relative_track(const Eigen::MatrixXd& Z_samples, const Eigen::MatrixXd& Z_track,
                               const std::array<int, 3>& anchors3) {
    if (Z_samples.cols() != Z_track.cols())
        throw ShapeError("relative_track: latent dims differ");
    for (int idx : anchors3)
        if (idx < 0 || idx >= Z_samples.rows())
            throw IndexError("relative_track: anchor index " + std::to_string(idx) + " out of range");

    const Eigen::RowVectorXd mean = Z_samples.colwise().mean();
    const Eigen::RowVectorXd std =
        ((Z_samples.rowwise() - mean).array().square().colwise().mean()).sqrt();
    for (int j = 0; j < Z_samples.cols(); ++j)
        if (std[j] < 1e-12)
            throw DegenerateFeature("relative_track: feature " + std::to_string(j) + " constant");

    const Eigen::MatrixXd Zs = (Z_samples.rowwise() - mean).array().rowwise() / std.array();
    const Eigen::MatrixXd Zt = (Z_track.rowwise() - mean).array().rowwise() / std.array();

    Eigen::MatrixXd coords(Zt.rows(), 3);
    for (int a = 0; a < 3; ++a) {
        const Eigen::RowVectorXd anchor = Zs.row(anchors3[static_cast<std::size_t>(a)]);
        const double an = anchor.norm();
        if (an < 1e-12) throw ZeroVector("relative_track: anchor has norm < 1e-12");
        for (int t = 0; t < Zt.rows(); ++t) {
            const double zn = Zt.row(t).norm();
            if (zn < 1e-12) throw ZeroVector("relative_track: track row " + std::to_string(t) + " has norm < 1e-12");
            coords(t, a) = Zt.row(t).dot(anchor) / (zn * an);
        }
    }
    return coords;
}

ProbeReport probe_ridge(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& X, double lambda,
                        const std::vector<int>& train_rows, const std::vector<int>& test_rows) {
    if (Z.rows() != X.rows()) throw ShapeError("probe_ridge: row counts differ");
    if (train_rows.empty() || test_rows.empty()) throw InsufficientSamples("probe_ridge: empty split");

    auto take = [](const Eigen::MatrixXd& M, const std::vector<int>& rows) {
        Eigen::MatrixXd out(rows.size(), M.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i] < 0 || rows[i] >= M.rows()) throw IndexError("probe_ridge: row index out of range");
            out.row(static_cast<long>(i)) = M.row(rows[i]);
        }
        return out;
    };
    const Eigen::MatrixXd Ztr = take(Z, train_rows), Xtr = take(X, train_rows);
    const Eigen::MatrixXd Zte = take(Z, test_rows), Xte = take(X, test_rows);

    const Eigen::RowVectorXd zmean = Ztr.colwise().mean();
    const Eigen::RowVectorXd xmean = Xtr.colwise().mean();
    const Eigen::MatrixXd Zc = Ztr.rowwise() - zmean;
    Eigen::MatrixXd A = Zc.transpose() * Zc;
    A.diagonal().array() += lambda;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    const Eigen::VectorXd dvec = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success || dvec.minCoeff() < 1e-12 * std::max(1.0, dvec.maxCoeff()))
        throw SingularSystem("probe_ridge: normal equations singular at lambda=" + std::to_string(lambda));
    const Eigen::MatrixXd W = ldlt.solve(Zc.transpose() * (Xtr.rowwise() - xmean));

    const Eigen::MatrixXd pred = ((Zte.rowwise() - zmean) * W).rowwise() + xmean;
    ProbeReport rep;
    rep.r2.resize(X.cols());
    const Eigen::RowVectorXd test_mean = Xte.colwise().mean();
    for (int j = 0; j < X.cols(); ++j) {
        const double ss_res = (Xte.col(j) - pred.col(j)).squaredNorm();
        const double ss_tot = (Xte.col(j).array() - test_mean[j]).square().sum();
        if (ss_tot < 1e-300) throw DegenerateFeature("probe_ridge: constant test target channel " + std::to_string(j));
        rep.r2[j] = 1.0 - ss_res / ss_tot;
    }
    rep.mean_r2 = rep.r2.mean();
    return rep;
}

PcaResult pca_project(const Eigen::MatrixXd& Z, int n_components) {
    if (n_components != 2 && n_components != 3)
        throw ShapeError("pca_project: n_components must be 2 or 3");
    if (Z.rows() <= n_components)
        throw ShapeError("pca_project: need more than " + std::to_string(n_components) + " samples");
    const Eigen::MatrixXd Zc = Z.rowwise() - Z.colwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Zc, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const int n = std::min<int>(n_components, static_cast<int>(svd.singularValues().size()));

    PcaResult res;
    res.components = svd.matrixV().leftCols(n);
    // Sign convention: the largest-|loading| entry of each component positive.
    for (int c = 0; c < n; ++c) {
        int arg = 0;
        for (int i = 1; i < res.components.rows(); ++i)
            if (std::fabs(res.components(i, c)) > std::fabs(res.components(arg, c))) arg = i;
        if (res.components(arg, c) < 0) res.components.col(c) = -res.components.col(c);
    }
    res.coords = Zc * res.components;
    const double total_var = svd.singularValues().array().square().sum();
    res.explained.resize(n);
    for (int c = 0; c < n; ++c)
        res.explained[c] = svd.singularValues()[c] * svd.singularValues()[c] / total_var;
    return res;
}

}  // namespace atlas::rel
