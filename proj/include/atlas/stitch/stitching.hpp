#ifndef ATLAS_STITCH_STITCHING_HPP
#define ATLAS_STITCH_STITCHING_HPP

#include <optional>

#include "atlas/fc/latents.hpp"
#include "atlas/fc/train.hpp"

namespace atlas::stitch {

// Frozen per-anchor z-scoring transform: raw latents -> standardized cosine
// features against the anchor latents.
struct AnchorTransform {
    Eigen::MatrixXd anchor_latents;  // m x k
    Eigen::VectorXd mean;            // per anchor column (train split)
    Eigen::VectorXd stddev;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& Z) const;
    int m() const { return static_cast<int>(anchor_latents.rows()); }
};

// Raw cosine features of latent rows against anchor rows (no z-scoring).
Eigen::MatrixXd anchor_cosines(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& anchors);

// Fits the column statistics on train-split features; ZeroVariance if any
// anchor column is constant.
AnchorTransform build_anchor_transform(const Eigen::MatrixXd& Z_train, const Eigen::MatrixXd& anchor_latents);

// One stitching participant: the absolutely trained base forecaster (its
// encoder and its propagator-decoder) plus a propagator-decoder retrained in
// the m-dimensional relative space behind the frozen anchor transform.
struct RelativeForecaster {
    fc::Checkpoint base;                         // ordinary trained forecaster
    std::vector<fc::SampleIndex> anchor_samples; // global anchor windows (train split)
    AnchorTransform transform;                   // this encoder's anchor geometry
    fc::ForecasterSpec pd_spec;                  // latent_dim == m
    ad::ParamStore pd_params;
    double rel_val = std::numeric_limits<double>::quiet_NaN();
    std::string id;
};

// Trains the relative-space propagator-decoder on top of a frozen encoder.
// Non-recurrent families only. When `pretrained_base` is given its encoder is
// reused; otherwise the base forecaster is trained first with `opts`.
RelativeForecaster train_relative(const fc::ForecasterSpec& spec, const dynsys::TrajectorySet& data,
                                  const std::vector<fc::SampleIndex>& anchor_samples,
                                  const fc::TrainOptions& opts,
                                  const fc::Checkpoint* pretrained_base = nullptr);

// The relative forecaster's own forecast quality (encoder -> transform ->
// relative propagator-decoder).
fc::EvalReport evaluate_relative(const RelativeForecaster& inst, const dynsys::TrajectorySet& data,
                                 dynsys::Split split = dynsys::Split::test, int stride = 1);

// enc_from's encoder + enc_from's anchor transform into dec_from's relative
// propagator-decoder, no retraining. AnchorMismatch if the instances disagree
// on the global anchor windows.
fc::EvalReport stitch(const RelativeForecaster& enc_from, const RelativeForecaster& dec_from,
                      const dynsys::TrajectorySet& data, dynsys::Split split = dynsys::Split::test,
                      int stride = 1);

// Absolute-space stitching: enc_from's encoder feeding dec_from's base
// propagator-decoder on raw latents. DimMismatch when latent dims differ.
fc::EvalReport stitch_absolute(const fc::Checkpoint& enc_from, const fc::Checkpoint& dec_from,
                               const dynsys::TrajectorySet& data, dynsys::Split split = dynsys::Split::test,
                               int stride = 1);

struct StitchCell {
    std::optional<double> abs_mse;
    std::optional<double> rel_mse;
};

struct StitchTable {
    std::vector<std::string> families;            // row = encoder, col = decoder
    std::vector<std::vector<StitchCell>> cells;   // family x family, seed-pair means
};

// Seed-pair average per (encoder family, decoder family) cell; absolute cells
// with mismatched latent dims stay absent.
StitchTable stitch_grid(const std::vector<RelativeForecaster>& instances, const dynsys::TrajectorySet& data,
                        dynsys::Split split = dynsys::Split::test, int stride = 1);

}  // namespace atlas::stitch

#endif  // ATLAS_STITCH_STITCHING_HPP
