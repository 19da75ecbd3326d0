#ifndef ATLAS_FC_ESN_HPP
#define ATLAS_FC_ESN_HPP

#include <Eigen/Core>

#include "atlas/ad/params.hpp"
#include "atlas/fc/spec.hpp"

namespace atlas::fc {

// Echo-state network: fixed sparse random reservoir, dense random input map,
// ridge-regression readout from the final reservoir state to the flattened
// H x d target. No gradient training.
class EsnModel {
public:
    EsnModel(ForecasterSpec spec, int data_dim);
    // Wrap existing parameters (checkpoint reload).
    EsnModel(ForecasterSpec spec, int data_dim, ad::ParamStore params);

    const ForecasterSpec& spec() const { return spec_; }
    ad::ParamStore& params() { return params_; }
    const ad::ParamStore& params() const { return params_; }

    // Final reservoir state for each flattened window row:
    // r_{t+1} = tanh(W r_t + U x_t), r_0 = 0, all L inputs retained.
    Eigen::MatrixXd reservoir_states(const Eigen::MatrixXd& X) const;

    // Solves (G^T G + lambda I) w = G^T Y with G = [states, 1].
    // SingularSystem at lambda = 0 when the normal equations are singular.
    void fit_readout(const Eigen::MatrixXd& states, const Eigen::MatrixXd& targets, double lambda);

    Eigen::MatrixXd predict(const Eigen::MatrixXd& states) const;

    Eigen::MatrixXd forward_frozen(const Eigen::MatrixXd& X) const;

private:
    ForecasterSpec spec_;
    int d_ = 0;
    ad::ParamStore params_;
};

// Exact spectral radius of a dense matrix (eigenvalue moduli).
double spectral_radius(const Eigen::MatrixXd& W);

}  // namespace atlas::fc

#endif  // ATLAS_FC_ESN_HPP
