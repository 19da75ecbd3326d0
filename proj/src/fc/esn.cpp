#include "atlas/fc/esn.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace atlas::fc {

namespace {

Eigen::MatrixXd param_matrix(const ad::ParamStore& store, const std::string& name) {
    const ad::Tensor& t = store.get(name);
    Eigen::MatrixXd m(t.rows(), t.cols());
    for (int i = 0; i < t.rows(); ++i)
        for (int j = 0; j < t.cols(); ++j) m(i, j) = t.at(i, j);
    return m;
}

void set_param(ad::ParamStore& store, const std::string& name, const Eigen::MatrixXd& m) {
    ad::Tensor t = ad::zeros({static_cast<int>(m.rows()), static_cast<int>(m.cols())});
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) t.at(i, j) = m(i, j);
    if (store.has(name))
        store.get(name) = t;
    else
        store.add(name, t);
}

}  // namespace

double spectral_radius(const Eigen::MatrixXd& W) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(W, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

EsnModel::EsnModel(ForecasterSpec spec, int data_dim) : spec_(std::move(spec)), d_(data_dim) {
    spec_.validate();
    if (spec_.family != Family::esn) throw ConfigError("EsnModel: spec family must be esn");
    Rng rng = Rng::derive(spec_.seed, 0xE5);
    const int N = spec_.reservoir_size;

    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            if (rng.uniform() < spec_.density) W(i, j) = rng.uniform(-1.0, 1.0);
    const double rho = spectral_radius(W);
    if (rho > 1e-12) W *= spec_.spectral_radius / rho;

    Eigen::MatrixXd U(N, d_);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < d_; ++j) U(i, j) = rng.uniform(-spec_.input_scale, spec_.input_scale);

    set_param(params_, "esn.W", W);
    set_param(params_, "esn.U", U);
    set_param(params_, "esn.Wout", Eigen::MatrixXd::Zero(N + 1, spec_.H * d_));
}

EsnModel::EsnModel(ForecasterSpec spec, int data_dim, ad::ParamStore params)
    : spec_(std::move(spec)), d_(data_dim), params_(std::move(params)) {}

Eigen::MatrixXd EsnModel::reservoir_states(const Eigen::MatrixXd& X) const {
    const int N = spec_.reservoir_size;
    const int B = static_cast<int>(X.rows());
    if (X.cols() != spec_.L * d_)
        throw ShapeError("esn: window batch has " + std::to_string(X.cols()) + " cols, expected " +
                         std::to_string(spec_.L * d_));
    const Eigen::MatrixXd W = param_matrix(params_, "esn.W");
    const Eigen::MatrixXd U = param_matrix(params_, "esn.U");
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(B, N);  // zero initial state, no wash-out
    for (int t = 0; t < spec_.L; ++t) {
        const Eigen::MatrixXd xt = X.middleCols(t * d_, d_);
        R = ((R * W.transpose()) + (xt * U.transpose())).array().tanh();
    }
    return R;
}

void EsnModel::fit_readout(const Eigen::MatrixXd& states, const Eigen::MatrixXd& targets, double lambda) {
    const int n = static_cast<int>(states.rows());
    const int p = static_cast<int>(states.cols()) + 1;
    Eigen::MatrixXd G(n, p);
    G.leftCols(p - 1) = states;
    G.col(p - 1).setOnes();
    Eigen::MatrixXd A = G.transpose() * G;
    A.diagonal().array() += lambda;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    const Eigen::VectorXd dvec = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success || dvec.minCoeff() < 1e-12 * std::max(1.0, dvec.maxCoeff()))
        throw SingularSystem("esn readout: normal equations singular at lambda=" + std::to_string(lambda) +
                             "; use lambda > 0");
    const Eigen::MatrixXd Wout = ldlt.solve(G.transpose() * targets);
    set_param(params_, "esn.Wout", Wout);
}

Eigen::MatrixXd EsnModel::predict(const Eigen::MatrixXd& states) const {
    const Eigen::MatrixXd Wout = param_matrix(params_, "esn.Wout");
    const int n = static_cast<int>(states.rows());
    Eigen::MatrixXd G(n, states.cols() + 1);
    G.leftCols(states.cols()) = states;
    G.col(states.cols()).setOnes();
    return G * Wout;
}

Eigen::MatrixXd EsnModel::forward_frozen(const Eigen::MatrixXd& X) const {
    return predict(reservoir_states(X));
}

}  // namespace atlas::fc
