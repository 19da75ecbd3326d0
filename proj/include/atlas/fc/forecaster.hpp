#ifndef ATLAS_FC_FORECASTER_HPP
#define ATLAS_FC_FORECASTER_HPP

#include <Eigen/Core>
#include <functional>

#include "atlas/ad/ops.hpp"
#include "atlas/ad/params.hpp"
#include "atlas/fc/spec.hpp"

namespace atlas::fc {

// Supplies parameter tensors while building a forward graph: a Bound store
// during training (leaves on the tape), or the raw constants for frozen use.
using ParamFn = std::function<ad::Tensor(const std::string&)>;

ParamFn bound_params(ad::Bound& bound);
ParamFn frozen_params(const ad::ParamStore& store);

// Encoder-propagator-decoder forecaster for the gradient-trained families
// (mlp, rnn, a_rnn, transformer). All graph builders are batched: windows
// enter as B x (L*d) row-major flattened matrices and predictions leave as
// B x (H*d).
class Forecaster {
public:
    Forecaster(ForecasterSpec spec, int data_dim);

    // Propagator-decoder half only (operates on externally supplied latents;
    // no encoder parameters are created and encode_batch must not be called).
    static Forecaster prop_dec_only(ForecasterSpec spec, int data_dim);

    const ForecasterSpec& spec() const { return spec_; }
    int data_dim() const { return d_; }
    ad::ParamStore& params() { return params_; }
    const ad::ParamStore& params() const { return params_; }

    ad::Tensor encode_batch(const ParamFn& P, const ad::Tensor& X) const;
    // dt is the data recording step (the node propagator integrates H steps of it).
    ad::Tensor propagate_batch(const ParamFn& P, const ad::Tensor& Z, double dt) const;
    // teacher: training targets B x (H*d) for teacher-forced a_rnn decoding;
    // pass nullptr for autoregressive decoding.
    ad::Tensor decode_batch(const ParamFn& P, const ad::Tensor& ZH, const ad::Tensor* teacher) const;
    ad::Tensor forward_batch(const ParamFn& P, const ad::Tensor& X, const ad::Tensor* teacher, double dt) const;

    // Frozen single-window conveniences.
    Eigen::VectorXd encode(const Eigen::MatrixXd& window) const;
    Eigen::VectorXd propagate(const Eigen::VectorXd& z0, double dt) const;
    Eigen::MatrixXd decode(const Eigen::VectorXd& zH) const;
    Eigen::MatrixXd forward(const Eigen::MatrixXd& window, double dt) const;

    // Frozen batched forward over flattened windows (rows), for evaluation.
    Eigen::MatrixXd forward_frozen(const Eigen::MatrixXd& X, double dt) const;
    Eigen::MatrixXd encode_frozen(const Eigen::MatrixXd& X) const;

    // test hook: propagate with a different number of substeps per dt (node).
    ad::Tensor propagate_batch_steps(const ParamFn& P, const ad::Tensor& Z, double dt, int substeps) const;

private:
    Forecaster(ForecasterSpec spec, int data_dim, bool with_encoder);

    ad::Tensor mlp_stack(const ParamFn& P, const std::string& prefix, const ad::Tensor& in, int out_dim) const;
    ad::Tensor gru_step(const ParamFn& P, const std::string& prefix, const ad::Tensor& x, const ad::Tensor& h) const;
    ad::Tensor attention_block(const ParamFn& P, const std::string& prefix, const ad::Tensor& tokens, int batch,
                               int seq, bool causal) const;
    ad::Tensor node_field(const ParamFn& P, const ad::Tensor& z, double t) const;

    ForecasterSpec spec_;
    int d_ = 0;
    ad::ParamStore params_;
    ad::Tensor enc_pe_;  // sinusoidal positions, L x d_model
    ad::Tensor dec_pe_;  // H x d_model
};

// Flattens a window (L x d, row-major) into a length L*d row vector.
Eigen::RowVectorXd flatten_window(const Eigen::MatrixXd& window);

}  // namespace atlas::fc

#endif  // ATLAS_FC_FORECASTER_HPP
