#include "atlas/stitch/stitching.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "atlas/ad/optim.hpp"

namespace atlas::stitch {

using dynsys::Split;
using fc::Checkpoint;
using fc::Family;
using fc::ForecasterSpec;

Eigen::MatrixXd anchor_cosines(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& anchors) {
    if (Z.cols() != anchors.cols())
        throw ShapeError("anchor_cosines: latent dims differ (" + std::to_string(Z.cols()) + " vs " +
                         std::to_string(anchors.cols()) + ")");
    Eigen::VectorXd zn(Z.rows()), an(anchors.rows());
    for (int i = 0; i < Z.rows(); ++i) {
        zn[i] = Z.row(i).norm();
        if (zn[i] < 1e-12) throw ZeroVector("anchor_cosines: latent row " + std::to_string(i) + " has norm < 1e-12");
    }
    for (int i = 0; i < anchors.rows(); ++i) {
        an[i] = anchors.row(i).norm();
        if (an[i] < 1e-12) throw ZeroVector("anchor_cosines: anchor " + std::to_string(i) + " has norm < 1e-12");
    }
    Eigen::MatrixXd R = Z * anchors.transpose();
    R.array().colwise() /= zn.array();
    R.array().rowwise() /= an.transpose().array();
    return R;
}

Eigen::MatrixXd AnchorTransform::apply(const Eigen::MatrixXd& Z) const {
    Eigen::MatrixXd R = anchor_cosines(Z, anchor_latents);
    return (R.rowwise() - mean.transpose()).array().rowwise() / stddev.transpose().array();
}

AnchorTransform build_anchor_transform(const Eigen::MatrixXd& Z_train, const Eigen::MatrixXd& anchor_latents) {
    AnchorTransform tf;
    tf.anchor_latents = anchor_latents;
    const Eigen::MatrixXd R = anchor_cosines(Z_train, anchor_latents);
    tf.mean = R.colwise().mean().transpose();
    tf.stddev = ((R.rowwise() - tf.mean.transpose()).array().square().colwise().mean()).sqrt().transpose();
    for (int i = 0; i < tf.stddev.size(); ++i)
        if (tf.stddev[i] < 1e-12)
            throw ZeroVariance("anchor column " + std::to_string(i) +
                               " has zero variance over the train split");
    return tf;
}

namespace {

// Propagator-decoder forward on externally supplied feature rows.
Eigen::MatrixXd pd_forward(const fc::Forecaster& pd, const Eigen::MatrixXd& F, double dt) {
    fc::ParamFn P = fc::frozen_params(pd.params());
    ad::Tensor Fin = ad::zeros({static_cast<int>(F.rows()), static_cast<int>(F.cols())});
    for (int i = 0; i < F.rows(); ++i)
        for (int j = 0; j < F.cols(); ++j) Fin.at(i, j) = F(i, j);
    ad::Tensor out = pd.decode_batch(P, pd.propagate_batch(P, Fin, dt), nullptr);
    Eigen::MatrixXd pred(out.rows(), out.cols());
    for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j) pred(i, j) = out.at(i, j);
    return pred;
}

Eigen::MatrixXd encode_all(const fc::FrozenModel& model, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd Z;
    const int chunk = 512;
    for (int start = 0; start < X.rows(); start += chunk) {
        const int n = std::min<int>(chunk, static_cast<int>(X.rows()) - start);
        Eigen::MatrixXd part = model.encode(X.middleRows(start, n));
        if (Z.size() == 0) Z.resize(X.rows(), part.cols());
        Z.middleRows(start, n) = part;
    }
    return Z;
}

fc::EvalReport chunked_report(const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& fwd,
                              const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, int H, int d) {
    fc::EvalReport total;
    const int chunk = 512;
    for (int start = 0; start < X.rows(); start += chunk) {
        const int n = std::min<int>(chunk, static_cast<int>(X.rows()) - start);
        const fc::EvalReport r = fc::eval_metrics(fwd(X.middleRows(start, n)), Y.middleRows(start, n), H, d);
        total.mse += r.mse * n;
        total.rmse += r.rmse * n;
        total.mae += r.mae * n;
    }
    total.mse /= static_cast<double>(X.rows());
    total.rmse /= static_cast<double>(X.rows());
    total.mae /= static_cast<double>(X.rows());
    return total;
}

}  // namespace

RelativeForecaster train_relative(const ForecasterSpec& spec, const dynsys::TrajectorySet& data,
                                  const std::vector<fc::SampleIndex>& anchor_samples,
                                  const fc::TrainOptions& opts, const Checkpoint* pretrained_base) {
    if (spec.family != Family::mlp && spec.family != Family::transformer)
        throw ConfigError("train_relative: recurrent families are excluded from stitching; got " +
                          to_string(spec.family));

    RelativeForecaster inst;
    inst.base = pretrained_base ? *pretrained_base : fc::train(spec, data, opts);
    inst.anchor_samples = anchor_samples;
    inst.id = inst.base.id;
    const double dt = data.system.dt;
    const int d = data.dim();

    const fc::FrozenModel encoder(inst.base);
    // Anchor latents are a pure function of the frozen encoder and the fixed
    // anchor windows; recomputing them is bit-identical.
    const Eigen::MatrixXd anchor_inputs = fc::sample_inputs(data, Split::train, anchor_samples, spec.L);
    const Eigen::MatrixXd anchor_latents = encoder.encode(anchor_inputs);

    auto windows = dynsys::make_windows(data, spec.L, spec.H, opts.stride);
    auto [Xtr, Ytr] = fc::stack_windows(windows[0]);
    auto [Xval, Yval] = fc::stack_windows(windows[1]);
    const Eigen::MatrixXd Ztr = encode_all(encoder, Xtr);
    const Eigen::MatrixXd Zval = encode_all(encoder, Xval);

    inst.transform = build_anchor_transform(Ztr, anchor_latents);
    const Eigen::MatrixXd Ftr = inst.transform.apply(Ztr);
    const Eigen::MatrixXd Fval = inst.transform.apply(Zval);

    inst.pd_spec = spec;
    inst.pd_spec.latent_dim = static_cast<int>(anchor_samples.size());
    fc::Forecaster pd = fc::Forecaster::prop_dec_only(inst.pd_spec, d);

    ad::AdamState adam;
    adam.lr = opts.lr;
    adam.decay = opts.lr_decay;

    double best_val = std::numeric_limits<double>::infinity();
    ad::ParamStore best_params = pd.params().deep_copy();
    int stale = 0;
    const int n_train = static_cast<int>(Ftr.rows());
    std::vector<int> order(static_cast<std::size_t>(n_train));
    for (int i = 0; i < n_train; ++i) order[static_cast<std::size_t>(i)] = i;

    for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
        Rng shuffle_rng = Rng::derive(spec.seed, 0xD000 + static_cast<std::uint64_t>(epoch));
        shuffle_rng.shuffle(order);
        try {
            for (int start = 0; start < n_train; start += opts.batch_size) {
                const int bsz = std::min(opts.batch_size, n_train - start);
                ad::Tape tape;
                ad::Bound bound(tape, pd.params());
                fc::ParamFn P = fc::bound_params(bound);
                ad::Tensor F = ad::zeros({bsz, inst.pd_spec.latent_dim});
                ad::Tensor Y = ad::zeros({bsz, static_cast<int>(Ytr.cols())});
                for (int i = 0; i < bsz; ++i) {
                    const int r = order[static_cast<std::size_t>(start + i)];
                    for (int j = 0; j < Ftr.cols(); ++j) F.at(i, j) = Ftr(r, j);
                    for (int j = 0; j < Ytr.cols(); ++j) Y.at(i, j) = Ytr(r, j);
                }
                ad::Tensor pred = pd.decode_batch(P, pd.propagate_batch(P, F, dt), nullptr);
                ad::Tensor loss = ad::mse(pred, Y);
                tape.backward(loss);
                ad::adam_step(adam, pd.params(), bound.grads());
            }
        } catch (const NonFiniteError& e) {
            throw Diverged(std::string("train_relative: loss became non-finite (") + e.what() + ")");
        }
        const double val_mse =
            chunked_report([&](const Eigen::MatrixXd& Fb) { return pd_forward(pd, Fb, dt); }, Fval, Yval,
                           spec.H, d)
                .mse;
        ad::decay_epoch(adam);
        if (val_mse < best_val) {
            best_val = val_mse;
            best_params = pd.params().deep_copy();
            stale = 0;
        } else if (++stale > opts.patience) {
            break;
        }
    }
    inst.pd_params = std::move(best_params);
    inst.rel_val = best_val;
    return inst;
}

fc::EvalReport evaluate_relative(const RelativeForecaster& inst, const dynsys::TrajectorySet& data,
                                 Split split, int stride) {
    auto windows = dynsys::make_windows(data, inst.base.spec.L, inst.base.spec.H, stride);
    auto [X, Y] = fc::stack_windows(windows[static_cast<std::size_t>(split)]);
    const fc::FrozenModel encoder(inst.base);
    fc::Forecaster pd = fc::Forecaster::prop_dec_only(inst.pd_spec, data.dim());
    pd.params() = inst.pd_params.deep_copy();
    const double dt = data.system.dt;
    auto fwd = [&](const Eigen::MatrixXd& Xb) {
        return pd_forward(pd, inst.transform.apply(encoder.encode(Xb)), dt);
    };
    return chunked_report(fwd, X, Y, inst.base.spec.H, data.dim());
}

fc::EvalReport stitch(const RelativeForecaster& enc_from, const RelativeForecaster& dec_from,
                      const dynsys::TrajectorySet& data, Split split, int stride) {
    if (enc_from.anchor_samples.size() != dec_from.anchor_samples.size())
        throw AnchorMismatch("stitch: anchor counts differ");
    for (std::size_t i = 0; i < enc_from.anchor_samples.size(); ++i)
        if (enc_from.anchor_samples[i].traj_id != dec_from.anchor_samples[i].traj_id ||
            enc_from.anchor_samples[i].start_index != dec_from.anchor_samples[i].start_index)
            throw AnchorMismatch("stitch: anchor sample indices differ at position " + std::to_string(i));

    auto windows = dynsys::make_windows(data, enc_from.base.spec.L, enc_from.base.spec.H, stride);
    auto [X, Y] = fc::stack_windows(windows[static_cast<std::size_t>(split)]);
    const fc::FrozenModel encoder(enc_from.base);
    fc::Forecaster pd = fc::Forecaster::prop_dec_only(dec_from.pd_spec, data.dim());
    pd.params() = dec_from.pd_params.deep_copy();
    const double dt = data.system.dt;

    auto fwd = [&](const Eigen::MatrixXd& Xb) {
        const Eigen::MatrixXd Z = encoder.encode(Xb);
        const Eigen::MatrixXd F = enc_from.transform.apply(Z);
        return pd_forward(pd, F, dt);
    };
    return chunked_report(fwd, X, Y, enc_from.base.spec.H, data.dim());
}

fc::EvalReport stitch_absolute(const Checkpoint& enc_from, const Checkpoint& dec_from,
                               const dynsys::TrajectorySet& data, Split split, int stride) {
    const int k_enc = enc_from.spec.family == Family::esn ? enc_from.spec.reservoir_size : enc_from.spec.latent_dim;
    const int k_dec = dec_from.spec.family == Family::esn ? dec_from.spec.reservoir_size : dec_from.spec.latent_dim;
    if (k_enc != k_dec)
        throw DimMismatch("stitch_absolute: latent dims differ (" + std::to_string(k_enc) + " vs " +
                          std::to_string(k_dec) + ")");
    auto windows = dynsys::make_windows(data, enc_from.spec.L, enc_from.spec.H, stride);
    auto [X, Y] = fc::stack_windows(windows[static_cast<std::size_t>(split)]);
    const fc::FrozenModel encoder(enc_from);
    fc::Forecaster pd = fc::Forecaster::prop_dec_only(dec_from.spec, data.dim());
    pd.params() = dec_from.params.deep_copy();
    const double dt = data.system.dt;

    auto fwd = [&](const Eigen::MatrixXd& Xb) { return pd_forward(pd, encoder.encode(Xb), dt); };
    return chunked_report(fwd, X, Y, enc_from.spec.H, data.dim());
}

StitchTable stitch_grid(const std::vector<RelativeForecaster>& instances, const dynsys::TrajectorySet& data,
                        Split split, int stride) {
    StitchTable table;
    std::vector<std::string> families;
    for (const auto& inst : instances) {
        const std::string fam = inst.base.spec.name();
        if (std::find(families.begin(), families.end(), fam) == families.end()) families.push_back(fam);
    }
    table.families = families;
    const std::size_t nf = families.size();
    table.cells.assign(nf, std::vector<StitchCell>(nf));

    std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> abs_acc, rel_acc;
    auto fam_index = [&](const std::string& f) {
        return static_cast<std::size_t>(std::find(families.begin(), families.end(), f) - families.begin());
    };
    for (const auto& enc : instances) {
        for (const auto& dec : instances) {
            const auto key = std::make_pair(fam_index(enc.base.spec.name()), fam_index(dec.base.spec.name()));
            rel_acc[key].push_back(stitch(enc, dec, data, split, stride).mse);
            try {
                abs_acc[key].push_back(stitch_absolute(enc.base, dec.base, data, split, stride).mse);
            } catch (const DimMismatch&) {
                // cell stays absent
            }
        }
    }
    for (std::size_t r = 0; r < nf; ++r)
        for (std::size_t c = 0; c < nf; ++c) {
            const auto key = std::make_pair(r, c);
            if (auto it = rel_acc.find(key); it != rel_acc.end() && !it->second.empty()) {
                double s = 0.0;
                for (double v : it->second) s += v;
                table.cells[r][c].rel_mse = s / static_cast<double>(it->second.size());
            }
            if (auto it = abs_acc.find(key); it != abs_acc.end() && !it->second.empty()) {
                double s = 0.0;
                for (double v : it->second) s += v;
                table.cells[r][c].abs_mse = s / static_cast<double>(it->second.size());
            }
        }
    return table;
}

}  // namespace atlas::stitch
