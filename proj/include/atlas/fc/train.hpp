#ifndef ATLAS_FC_TRAIN_HPP
#define ATLAS_FC_TRAIN_HPP

#include <limits>
#include <memory>

#include "atlas/dynsys/dataset.hpp"
#include "atlas/fc/esn.hpp"
#include "atlas/fc/forecaster.hpp"

namespace atlas::fc {

struct TrainLogEntry {
    double train_mse = 0.0;
    double val_mse = 0.0;
    double lr = 0.0;
};

// Trained forecaster instance: architecture, parameters, provenance.
struct Checkpoint {
    ForecasterSpec spec;
    int data_dim = 0;
    ad::ParamStore params;
    dynsys::NormalizationStats norm;
    std::vector<TrainLogEntry> log;
    std::uint64_t dataset_fingerprint = 0;
    double best_val = std::numeric_limits<double>::quiet_NaN();
    double data_dt = 0.0;
    std::string id;  // "<name>#<seed>"
};

struct TrainOptions {
    int max_epochs = 60;
    int patience = 20;
    int batch_size = 64;
    double lr = 1e-3;
    double lr_decay = 0.95;
    int stride = 1;
    // Additive Gaussian input noise in normalized units, applied to training
    // inputs (fresh each epoch) and validation inputs (one fixed draw).
    double noise_sigma = 0.0;
    // Deterministic subsample cap on training windows (0 = use all).
    int max_train_windows = 0;
};

struct EvalReport {
    double mse = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
};

// Adam + exponential lr decay + early stopping on validation MSE; returns the
// best-validation checkpoint. Throws Diverged when the loss goes non-finite.
Checkpoint train(const ForecasterSpec& spec, const dynsys::TrajectorySet& data, const TrainOptions& opts = {});

// Reservoir + ridge readout fit (no gradients); same checkpoint contract.
Checkpoint esn_fit(const ForecasterSpec& spec, const dynsys::TrajectorySet& data, const TrainOptions& opts = {});

// Frozen checkpoint ready for inference; dispatches gradient-trained
// families and the reservoir uniformly. The "latent" of an esn is its final
// reservoir state.
class FrozenModel {
public:
    explicit FrozenModel(const Checkpoint& ckpt);
    Eigen::MatrixXd forward(const Eigen::MatrixXd& X, double dt) const;
    Eigen::MatrixXd encode(const Eigen::MatrixXd& X) const;
    int latent_dim() const;

private:
    std::shared_ptr<Forecaster> fc_;
    std::shared_ptr<EsnModel> esn_;
};

// Dispatches any family, trained or reservoir, on flattened window rows.
Eigen::MatrixXd forecast_batch(const Checkpoint& ckpt, const Eigen::MatrixXd& X, double dt);

// Per-step metrics averaged over the horizon and over windows.
EvalReport eval_metrics(const Eigen::MatrixXd& preds, const Eigen::MatrixXd& targets, int H, int d);

EvalReport evaluate(const Checkpoint& ckpt, const dynsys::TrajectorySet& data,
                    dynsys::Split split = dynsys::Split::test, int stride = 1, double noise_sigma = 0.0,
                    std::uint64_t noise_seed = 0);

// Flattens windows into (inputs, targets) row matrices.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> stack_windows(const std::vector<dynsys::Window>& windows);

}  // namespace atlas::fc

#endif  // ATLAS_FC_TRAIN_HPP
