#include "atlas/fc/train.hpp"

#include <algorithm>
#include <cmath>

#include "atlas/ad/optim.hpp"

namespace atlas::fc {

using dynsys::Split;
using dynsys::Window;

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> stack_windows(const std::vector<Window>& windows) {
    if (windows.empty()) throw ConfigError("stack_windows: no windows");
    const int L = static_cast<int>(windows[0].input.rows());
    const int H = static_cast<int>(windows[0].target.rows());
    const int d = static_cast<int>(windows[0].input.cols());
    Eigen::MatrixXd X(windows.size(), L * d), Y(windows.size(), H * d);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        X.row(static_cast<int>(i)) = flatten_window(windows[i].input);
        Y.row(static_cast<int>(i)) = flatten_window(windows[i].target);
    }
    return {std::move(X), std::move(Y)};
}

namespace {

ad::Tensor tensor_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
    ad::Tensor t = ad::zeros({static_cast<int>(rows.size()), static_cast<int>(m.cols())});
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < m.cols(); ++j) t.at(static_cast<int>(i), j) = m(rows[i], j);
    return t;
}

void add_noise(Eigen::MatrixXd& m, double sigma, Rng& rng) {
    if (sigma <= 0.0) return;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m(i, j) += rng.normal(0.0, sigma);
}

// Mirrors evaluate()'s chunking and averaging exactly so that the logged val
// MSE is bit-identical to evaluate(ckpt, data, val) on the same windows.
double frozen_mse(const Forecaster& model, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double dt,
                  int H, int d) {
    const int chunk = 512;
    double total = 0.0;
    for (int start = 0; start < X.rows(); start += chunk) {
        const int n = std::min<int>(chunk, static_cast<int>(X.rows()) - start);
        const Eigen::MatrixXd pred = model.forward_frozen(X.middleRows(start, n), dt);
        total += eval_metrics(pred, Y.middleRows(start, n), H, d).mse * n;
    }
    return total / static_cast<double>(X.rows());
}

std::vector<Window> subsample_windows(std::vector<Window> windows, int cap, std::uint64_t seed) {
    if (cap <= 0 || static_cast<int>(windows.size()) <= cap) return windows;
    Rng rng = Rng::derive(seed, 0xA1);
    auto keep = rng.sample_without_replacement(windows.size(), static_cast<std::size_t>(cap));
    std::sort(keep.begin(), keep.end());
    std::vector<Window> out;
    out.reserve(keep.size());
    for (std::size_t i : keep) out.push_back(std::move(windows[i]));
    return out;
}

}  // namespace

Checkpoint train(const ForecasterSpec& spec, const dynsys::TrajectorySet& data, const TrainOptions& opts) {
    spec.validate();
    if (spec.family == Family::esn) return esn_fit(spec, data, opts);

    const int d = data.dim();
    const double dt = data.system.dt;
    auto windows = dynsys::make_windows(data, spec.L, spec.H, opts.stride);
    auto train_w = subsample_windows(std::move(windows[0]), opts.max_train_windows, spec.seed);
    const auto& val_w = windows[1];
    if (train_w.empty() || val_w.empty()) throw ConfigError("train: empty train or val window set");

    auto [Xtr, Ytr] = stack_windows(train_w);
    auto [Xval, Yval] = stack_windows(val_w);
    if (opts.noise_sigma > 0.0) {
        Rng val_rng = Rng::derive(spec.seed, 0xA2);
        add_noise(Xval, opts.noise_sigma, val_rng);
    }

    Forecaster model(spec, d);
    ad::AdamState adam;
    adam.lr = opts.lr;
    adam.decay = opts.lr_decay;

    Checkpoint best;
    best.spec = spec;
    best.data_dim = d;
    best.norm = data.norm;
    best.dataset_fingerprint = dynsys::fingerprint(data);
    best.data_dt = dt;
    best.id = spec.name() + "#" + std::to_string(spec.seed);

    double best_val = std::numeric_limits<double>::infinity();
    ad::ParamStore best_params = model.params().deep_copy();
    int stale = 0;

    const int n_train = static_cast<int>(Xtr.rows());
    std::vector<int> order(static_cast<std::size_t>(n_train));
    for (int i = 0; i < n_train; ++i) order[static_cast<std::size_t>(i)] = i;

    for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
        Rng shuffle_rng = Rng::derive(spec.seed, 0xB000 + static_cast<std::uint64_t>(epoch));
        shuffle_rng.shuffle(order);
        Rng noise_rng = Rng::derive(spec.seed, 0xC000 + static_cast<std::uint64_t>(epoch));

        double train_se = 0.0;
        try {
            for (int start = 0; start < n_train; start += opts.batch_size) {
                const int bsz = std::min(opts.batch_size, n_train - start);
                std::vector<int> rows(order.begin() + start, order.begin() + start + bsz);
                Eigen::MatrixXd Xb(bsz, Xtr.cols());
                for (int i = 0; i < bsz; ++i) Xb.row(i) = Xtr.row(rows[static_cast<std::size_t>(i)]);
                add_noise(Xb, opts.noise_sigma, noise_rng);

                ad::Tape tape;
                ad::Bound bound(tape, model.params());
                ParamFn P = bound_params(bound);
                ad::Tensor X = ad::zeros({bsz, static_cast<int>(Xtr.cols())});
                for (int i = 0; i < bsz; ++i)
                    for (int j = 0; j < Xtr.cols(); ++j) X.at(i, j) = Xb(i, j);
                ad::Tensor Y = tensor_rows(Ytr, rows);

                const bool teacher_forced = spec.family == Family::a_rnn;
                ad::Tensor pred = model.forward_batch(P, X, teacher_forced ? &Y : nullptr, dt);
                ad::Tensor loss = ad::mse(pred, Y);
                train_se += loss.scalar() * static_cast<double>(bsz);
                tape.backward(loss);
                ad::adam_step(adam, model.params(), bound.grads());
            }
        } catch (const NonFiniteError& e) {
            throw Diverged(std::string("train: loss became non-finite (") + e.what() + ")");
        }

        const double train_mse = train_se / n_train;
        const double val_mse = frozen_mse(model, Xval, Yval, dt, spec.H, d);
        best.log.push_back({train_mse, val_mse, adam.lr});
        ad::decay_epoch(adam);

        if (val_mse < best_val) {
            best_val = val_mse;
            best_params = model.params().deep_copy();
            stale = 0;
        } else {
            ++stale;
            if (stale > opts.patience) break;
        }
    }

    best.params = std::move(best_params);
    best.best_val = best_val;
    return best;
}

Checkpoint esn_fit(const ForecasterSpec& spec, const dynsys::TrajectorySet& data, const TrainOptions& opts) {
    spec.validate();
    if (spec.family != Family::esn) throw ConfigError("esn_fit: spec family must be esn");
    const int d = data.dim();
    auto windows = dynsys::make_windows(data, spec.L, spec.H, opts.stride);
    auto train_w = subsample_windows(std::move(windows[0]), opts.max_train_windows, spec.seed);
    auto [Xtr, Ytr] = stack_windows(train_w);
    if (opts.noise_sigma > 0.0) {
        Rng rng = Rng::derive(spec.seed, 0xC000);
        add_noise(Xtr, opts.noise_sigma, rng);
    }

    EsnModel model(spec, d);
    model.fit_readout(model.reservoir_states(Xtr), Ytr, spec.ridge_lambda);

    Checkpoint ckpt;
    ckpt.spec = spec;
    ckpt.data_dim = d;
    ckpt.params = model.params().deep_copy();
    ckpt.norm = data.norm;
    ckpt.dataset_fingerprint = dynsys::fingerprint(data);
    ckpt.data_dt = data.system.dt;
    ckpt.id = spec.name() + "#" + std::to_string(spec.seed);

    const Eigen::MatrixXd pred_tr = model.forward_frozen(Xtr);
    const double train_mse = (pred_tr - Ytr).array().square().mean();
    auto [Xval, Yval] = stack_windows(windows[1]);
    if (opts.noise_sigma > 0.0) {
        Rng rng = Rng::derive(spec.seed, 0xA2);
        add_noise(Xval, opts.noise_sigma, rng);
    }
    const double val_mse = (model.forward_frozen(Xval) - Yval).array().square().mean();
    ckpt.log.push_back({train_mse, val_mse, 0.0});
    ckpt.best_val = val_mse;
    return ckpt;
}

FrozenModel::FrozenModel(const Checkpoint& ckpt) {
    if (ckpt.spec.family == Family::esn) {
        esn_ = std::make_shared<EsnModel>(ckpt.spec, ckpt.data_dim, ckpt.params.deep_copy());
    } else {
        fc_ = std::make_shared<Forecaster>(ckpt.spec, ckpt.data_dim);
        fc_->params() = ckpt.params.deep_copy();
    }
}

Eigen::MatrixXd FrozenModel::forward(const Eigen::MatrixXd& X, double dt) const {
    return esn_ ? esn_->forward_frozen(X) : fc_->forward_frozen(X, dt);
}

Eigen::MatrixXd FrozenModel::encode(const Eigen::MatrixXd& X) const {
    return esn_ ? esn_->reservoir_states(X) : fc_->encode_frozen(X);
}

int FrozenModel::latent_dim() const {
    return esn_ ? esn_->spec().reservoir_size : fc_->spec().latent_dim;
}

Eigen::MatrixXd forecast_batch(const Checkpoint& ckpt, const Eigen::MatrixXd& X, double dt) {
    return FrozenModel(ckpt).forward(X, dt);
}

EvalReport eval_metrics(const Eigen::MatrixXd& preds, const Eigen::MatrixXd& targets, int H, int d) {
    if (preds.rows() != targets.rows() || preds.cols() != targets.cols())
        throw ShapeError("eval_metrics: prediction/target shape mismatch");
    if (preds.cols() != static_cast<long>(H) * d) throw ShapeError("eval_metrics: cols != H*d");
    double mse = 0.0, rmse = 0.0, mae = 0.0;
    const long n = preds.rows();
    for (long w = 0; w < n; ++w)
        for (int h = 0; h < H; ++h) {
            double se = 0.0, ae = 0.0;
            for (int j = 0; j < d; ++j) {
                const double e = preds(w, h * d + j) - targets(w, h * d + j);
                se += e * e;
                ae += std::fabs(e);
            }
            se /= d;
            ae /= d;
            mse += se;
            rmse += std::sqrt(se);
            mae += ae;
        }
    const double count = static_cast<double>(n) * H;
    return {mse / count, rmse / count, mae / count};
}

EvalReport evaluate(const Checkpoint& ckpt, const dynsys::TrajectorySet& data, Split split, int stride,
                    double noise_sigma, std::uint64_t noise_seed) {
    auto windows = dynsys::make_windows(data, ckpt.spec.L, ckpt.spec.H, stride);
    const auto& ws = windows[static_cast<std::size_t>(split)];
    auto [X, Y] = stack_windows(ws);
    if (noise_sigma > 0.0) {
        Rng rng = Rng::derive(noise_seed, 0xA3);
        add_noise(X, noise_sigma, rng);
    }
    const FrozenModel model(ckpt);
    const int chunk = 512;
    EvalReport total;
    for (int start = 0; start < X.rows(); start += chunk) {
        const int n = std::min<int>(chunk, static_cast<int>(X.rows()) - start);
        const Eigen::MatrixXd pred = model.forward(X.middleRows(start, n), data.system.dt);
        const EvalReport r = eval_metrics(pred, Y.middleRows(start, n), ckpt.spec.H, ckpt.data_dim);
        total.mse += r.mse * n;
        total.rmse += r.rmse * n;
        total.mae += r.mae * n;
    }
    total.mse /= static_cast<double>(X.rows());
    total.rmse /= static_cast<double>(X.rows());
    total.mae /= static_cast<double>(X.rows());
    return total;
}

}  // namespace atlas::fc
