#include "atlas/fc/forecaster.hpp"

#include <cmath>

namespace atlas::fc {

using ad::Tensor;

namespace {

Tensor from_eigen(const Eigen::MatrixXd& m) {
    Tensor t = ad::zeros({static_cast<int>(m.rows()), static_cast<int>(m.cols())});
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) t.at(i, j) = m(i, j);
    return t;
}

Eigen::MatrixXd to_eigen(const Tensor& t) {
    Eigen::MatrixXd m(t.rows(), t.cols());
    for (int i = 0; i < t.rows(); ++i)
        for (int j = 0; j < t.cols(); ++j) m(i, j) = t.at(i, j);
    return m;
}

Tensor sinusoidal_positions(int length, int dim) {
    Tensor pe = ad::zeros({length, dim});
    for (int pos = 0; pos < length; ++pos)
        for (int i = 0; i < dim; ++i) {
            const double angle = pos / std::pow(10000.0, 2.0 * (i / 2) / dim);
            pe.at(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    return pe;
}

// Constant vertical tiling (for adding fixed positions to a stacked batch).
Tensor tile_vertical(const Tensor& block, int times) {
    Tensor out = ad::zeros({block.rows() * times, block.cols()});
    for (int r = 0; r < times; ++r)
        for (int i = 0; i < block.rows(); ++i)
            for (int j = 0; j < block.cols(); ++j) out.at(r * block.rows() + i, j) = block.at(i, j);
    return out;
}

Tensor causal_mask(int seq) {
    Tensor m = ad::zeros({seq, seq});
    for (int i = 0; i < seq; ++i)
        for (int j = i + 1; j < seq; ++j) m.at(i, j) = -1e9;
    return m;
}

// Row i averages token rows [i*seq, (i+1)*seq) of a stacked batch.
Tensor pooling_matrix(int batch, int seq) {
    Tensor m = ad::zeros({batch, batch * seq});
    for (int i = 0; i < batch; ++i)
        for (int t = 0; t < seq; ++t) m.at(i, i * seq + t) = 1.0 / seq;
    return m;
}

}  // namespace

ParamFn bound_params(ad::Bound& bound) {
    return [&bound](const std::string& name) { return bound(name); };
}

ParamFn frozen_params(const ad::ParamStore& store) {
    return [&store](const std::string& name) { return store.get(name); };
}

Eigen::RowVectorXd flatten_window(const Eigen::MatrixXd& window) {
    Eigen::RowVectorXd flat(window.rows() * window.cols());
    for (int i = 0; i < window.rows(); ++i)
        for (int j = 0; j < window.cols(); ++j) flat[i * window.cols() + j] = window(i, j);
    return flat;
}

Forecaster::Forecaster(ForecasterSpec spec, int data_dim) : Forecaster(std::move(spec), data_dim, true) {}

Forecaster Forecaster::prop_dec_only(ForecasterSpec spec, int data_dim) {
    return Forecaster(std::move(spec), data_dim, false);
}

Forecaster::Forecaster(ForecasterSpec spec, int data_dim, bool with_encoder)
    : spec_(std::move(spec)), d_(data_dim) {
    spec_.validate();
    if (spec_.family == Family::esn)
        throw ConfigError("Forecaster: esn is reservoir-based; use EsnModel");
    Rng rng = Rng::derive(spec_.seed, 0xF0);
    const int k = spec_.latent_dim, w = spec_.width, dm = spec_.d_model;

    auto add_mlp = [&](const std::string& prefix, int in, int out) {
        int cur = in;
        for (int l = 0; l < spec_.depth; ++l) {
            params_.add(prefix + ".w" + std::to_string(l), ad::glorot(cur, w, rng));
            params_.add(prefix + ".b" + std::to_string(l), ad::zeros({w}));
            cur = w;
        }
        params_.add(prefix + ".out_w", ad::glorot(cur, out, rng));
        params_.add(prefix + ".out_b", ad::zeros({out}));
    };
    auto add_gru = [&](const std::string& prefix, int in) {
        for (const char* gate : {"z", "r", "h"}) {
            params_.add(prefix + ".w" + gate, ad::glorot(in, k, rng));
            params_.add(prefix + ".u" + gate, ad::glorot(k, k, rng));
            params_.add(prefix + ".b" + gate, ad::zeros({k}));
        }
    };
    auto add_block = [&](const std::string& prefix) {
        for (const char* name : {"wq", "wk", "wv", "wo"})
            params_.add(prefix + "." + name, ad::glorot(dm, dm, rng));
        for (const char* name : {"bq", "bk", "bv", "bo"}) params_.add(prefix + "." + name, ad::zeros({dm}));
        params_.add(prefix + ".ln1_g", ad::full({dm}, 1.0));
        params_.add(prefix + ".ln1_b", ad::zeros({dm}));
        params_.add(prefix + ".ff_w1", ad::glorot(dm, w, rng));
        params_.add(prefix + ".ff_b1", ad::zeros({w}));
        params_.add(prefix + ".ff_w2", ad::glorot(w, dm, rng));
        params_.add(prefix + ".ff_b2", ad::zeros({dm}));
        params_.add(prefix + ".ln2_g", ad::full({dm}, 1.0));
        params_.add(prefix + ".ln2_b", ad::zeros({dm}));
    };

    if (with_encoder) {
        switch (spec_.family) {
            case Family::mlp:
                add_mlp("enc", spec_.L * d_, k);
                break;
            case Family::rnn:
            case Family::a_rnn:
                add_gru("enc.gru", d_);
                break;
            case Family::transformer:
                params_.add("enc.embed_w", ad::glorot(d_, dm, rng));
                params_.add("enc.embed_b", ad::zeros({dm}));
                for (int l = 0; l < spec_.layers; ++l) add_block("enc.l" + std::to_string(l));
                params_.add("enc.pool_w", ad::glorot(dm, k, rng));
                params_.add("enc.pool_b", ad::zeros({k}));
                enc_pe_ = sinusoidal_positions(spec_.L, dm);
                break;
            case Family::esn:
                break;
        }
    }

    if (spec_.propagator == Propagator::koopman) {
        Tensor K = ad::glorot(k, k, rng);
        for (double& v : *K.data) v *= 0.01;
        for (int i = 0; i < k; ++i) K.at(i, i) += 1.0;  // near-identity start
        params_.add("prop.K", K);
    } else if (spec_.propagator == Propagator::node) {
        params_.add("prop.f.w0", ad::glorot(k + 1, w, rng));
        params_.add("prop.f.b0", ad::zeros({w}));
        params_.add("prop.f.w1", ad::glorot(w, k, rng));
        params_.add("prop.f.b1", ad::zeros({k}));
    }

    switch (spec_.family) {
        case Family::mlp:
            add_mlp("dec", k, spec_.H * d_);
            break;
        case Family::rnn:
        case Family::a_rnn:
            add_gru("dec.gru", d_);
            params_.add("dec.out_w", ad::glorot(k, d_, rng));
            params_.add("dec.out_b", ad::zeros({d_}));
            break;
        case Family::transformer:
            params_.add("dec.cond_w", ad::glorot(k, dm, rng));
            params_.add("dec.cond_b", ad::zeros({dm}));
            for (int l = 0; l < spec_.layers; ++l) add_block("dec.l" + std::to_string(l));
            params_.add("dec.out_w", ad::glorot(dm, d_, rng));
            params_.add("dec.out_b", ad::zeros({d_}));
            dec_pe_ = sinusoidal_positions(spec_.H, dm);
            break;
        case Family::esn:
            break;
    }
}

Tensor Forecaster::mlp_stack(const ParamFn& P, const std::string& prefix, const Tensor& in, int) const {
    Tensor h = in;
    for (int l = 0; l < spec_.depth; ++l)
        h = ad::tanh(ad::add(ad::matmul(h, P(prefix + ".w" + std::to_string(l))),
                             P(prefix + ".b" + std::to_string(l))));
    return ad::add(ad::matmul(h, P(prefix + ".out_w")), P(prefix + ".out_b"));
}

Tensor Forecaster::gru_step(const ParamFn& P, const std::string& prefix, const Tensor& x, const Tensor& h) const {
    Tensor zg = ad::sigmoid(ad::add(ad::add(ad::matmul(x, P(prefix + ".wz")), ad::matmul(h, P(prefix + ".uz"))),
                                    P(prefix + ".bz")));
    Tensor rg = ad::sigmoid(ad::add(ad::add(ad::matmul(x, P(prefix + ".wr")), ad::matmul(h, P(prefix + ".ur"))),
                                    P(prefix + ".br")));
    Tensor cand = ad::tanh(ad::add(
        ad::add(ad::matmul(x, P(prefix + ".wh")), ad::matmul(ad::mul(rg, h), P(prefix + ".uh"))),
        P(prefix + ".bh")));
    // h' = h - z (.) h + z (.) cand
    return ad::add(ad::sub(h, ad::mul(zg, h)), ad::mul(zg, cand));
}

Tensor Forecaster::attention_block(const ParamFn& P, const std::string& prefix, const Tensor& tokens, int batch,
                                   int seq, bool causal) const {
    const int dm = spec_.d_model;
    const int dh = dm / spec_.heads;
    Tensor Q = ad::add(ad::matmul(tokens, P(prefix + ".wq")), P(prefix + ".bq"));
    Tensor K = ad::add(ad::matmul(tokens, P(prefix + ".wk")), P(prefix + ".bk"));
    Tensor V = ad::add(ad::matmul(tokens, P(prefix + ".wv")), P(prefix + ".bv"));

    Tensor mask;
    if (causal) mask = causal_mask(seq);

    std::vector<Tensor> per_sample;
    per_sample.reserve(static_cast<std::size_t>(batch));
    for (int i = 0; i < batch; ++i) {
        Tensor Qi = ad::slice(Q, 0, i * seq, seq);
        Tensor Ki = ad::slice(K, 0, i * seq, seq);
        Tensor Vi = ad::slice(V, 0, i * seq, seq);
        std::vector<Tensor> heads;
        heads.reserve(static_cast<std::size_t>(spec_.heads));
        for (int h = 0; h < spec_.heads; ++h) {
            Tensor qh = ad::slice(Qi, 1, h * dh, dh);
            Tensor kh = ad::slice(Ki, 1, h * dh, dh);
            Tensor vh = ad::slice(Vi, 1, h * dh, dh);
            Tensor scores = ad::scale(ad::matmul(qh, ad::transpose(kh)), 1.0 / std::sqrt(dh));
            if (causal) scores = ad::add(scores, mask);
            heads.push_back(ad::matmul(ad::softmax(scores, 1), vh));
        }
        per_sample.push_back(spec_.heads == 1 ? heads[0] : ad::concat(heads, 1));
    }
    Tensor O = batch == 1 ? per_sample[0] : ad::concat(per_sample, 0);
    Tensor attn = ad::add(ad::matmul(O, P(prefix + ".wo")), P(prefix + ".bo"));
    Tensor n1 = ad::layer_norm(ad::add(tokens, attn), P(prefix + ".ln1_g"), P(prefix + ".ln1_b"));
    Tensor ff = ad::add(
        ad::matmul(ad::relu(ad::add(ad::matmul(n1, P(prefix + ".ff_w1")), P(prefix + ".ff_b1"))),
                   P(prefix + ".ff_w2")),
        P(prefix + ".ff_b2"));
    return ad::layer_norm(ad::add(n1, ff), P(prefix + ".ln2_g"), P(prefix + ".ln2_b"));
}

Tensor Forecaster::encode_batch(const ParamFn& P, const Tensor& X) const {
    const int B = X.rows();
    if (X.cols() != spec_.L * d_)
        throw ShapeError("encode: window batch is " + ad::shape_str(X.shape) + ", expected cols " +
                         std::to_string(spec_.L * d_));
    switch (spec_.family) {
        case Family::mlp:
            return mlp_stack(P, "enc", X, spec_.latent_dim);
        case Family::rnn:
        case Family::a_rnn: {
            Tensor h = ad::zeros({B, spec_.latent_dim});
            for (int t = 0; t < spec_.L; ++t)
                h = gru_step(P, "enc.gru", ad::slice(X, 1, t * d_, d_), h);
            return h;
        }
        case Family::transformer: {
            Tensor tokens = ad::reshape(X, {B * spec_.L, d_});
            Tensor E = ad::add(ad::add(ad::matmul(tokens, P("enc.embed_w")), P("enc.embed_b")),
                               tile_vertical(enc_pe_, B));
            for (int l = 0; l < spec_.layers; ++l)
                E = attention_block(P, "enc.l" + std::to_string(l), E, B, spec_.L, false);
            Tensor pooled = ad::matmul(pooling_matrix(B, spec_.L), E);
            return ad::add(ad::matmul(pooled, P("enc.pool_w")), P("enc.pool_b"));
        }
        case Family::esn:
            break;
    }
    throw ConfigError("encode: unsupported family");
}

Tensor Forecaster::node_field(const ParamFn& P, const Tensor& z, double t) const {
    Tensor in = ad::concat({z, ad::full({z.rows(), 1}, t)}, 1);
    Tensor h = ad::tanh(ad::add(ad::matmul(in, P("prop.f.w0")), P("prop.f.b0")));
    return ad::add(ad::matmul(h, P("prop.f.w1")), P("prop.f.b1"));
}

Tensor Forecaster::propagate_batch(const ParamFn& P, const Tensor& Z, double dt) const {
    return propagate_batch_steps(P, Z, dt, 1);
}

Tensor Forecaster::propagate_batch_steps(const ParamFn& P, const Tensor& Z, double dt, int substeps) const {
    switch (spec_.propagator) {
        case Propagator::identity:
            return Z;
        case Propagator::koopman: {
            Tensor z = Z;
            for (int j = 0; j < spec_.H; ++j) z = ad::matmul(z, P("prop.K"));
            return z;
        }
        case Propagator::node: {
            // Fixed-step RK4 over [0, H*dt]; gradients flow through the
            // discretization itself.
            Tensor z = Z;
            const int steps = spec_.H * substeps;
            const double h = dt / substeps;
            double t = 0.0;
            for (int s = 0; s < steps; ++s) {
                Tensor k1 = node_field(P, z, t);
                Tensor k2 = node_field(P, ad::add(z, ad::scale(k1, h / 2)), t + h / 2);
                Tensor k3 = node_field(P, ad::add(z, ad::scale(k2, h / 2)), t + h / 2);
                Tensor k4 = node_field(P, ad::add(z, ad::scale(k3, h)), t + h);
                Tensor combo = ad::add(ad::add(k1, k4), ad::scale(ad::add(k2, k3), 2.0));
                z = ad::add(z, ad::scale(combo, h / 6.0));
                t += h;
            }
            return z;
        }
    }
    throw ConfigError("propagate: unsupported propagator");
}

Tensor Forecaster::decode_batch(const ParamFn& P, const Tensor& ZH, const Tensor* teacher) const {
    const int B = ZH.rows();
    if (ZH.cols() != spec_.latent_dim)
        throw ShapeError("decode: latent batch is " + ad::shape_str(ZH.shape) + ", expected cols " +
                         std::to_string(spec_.latent_dim));
    switch (spec_.family) {
        case Family::mlp:
            return mlp_stack(P, "dec", ZH, spec_.H * d_);
        case Family::rnn: {
            // Latent seeds the hidden state; inputs are zero at every step.
            Tensor h = ZH;
            const Tensor zero_in = ad::zeros({B, d_});
            std::vector<Tensor> ys;
            ys.reserve(static_cast<std::size_t>(spec_.H));
            for (int t = 0; t < spec_.H; ++t) {
                h = gru_step(P, "dec.gru", zero_in, h);
                ys.push_back(ad::add(ad::matmul(h, P("dec.out_w")), P("dec.out_b")));
            }
            return ad::concat(ys, 1);
        }
        case Family::a_rnn: {
            // Teacher-forced during training, autoregressive otherwise.
            Tensor h = ZH;
            Tensor x = ad::zeros({B, d_});
            std::vector<Tensor> ys;
            ys.reserve(static_cast<std::size_t>(spec_.H));
            for (int t = 0; t < spec_.H; ++t) {
                h = gru_step(P, "dec.gru", x, h);
                Tensor y = ad::add(ad::matmul(h, P("dec.out_w")), P("dec.out_b"));
                ys.push_back(y);
                if (t + 1 < spec_.H) x = teacher ? ad::slice(*teacher, 1, t * d_, d_) : y;
            }
            return ad::concat(ys, 1);
        }
        case Family::transformer: {
            Tensor cond = ad::add(ad::matmul(ZH, P("dec.cond_w")), P("dec.cond_b"));
            Tensor tokens = ad::add(ad::repeat_rows(cond, spec_.H), tile_vertical(dec_pe_, B));
            for (int l = 0; l < spec_.layers; ++l)
                tokens = attention_block(P, "dec.l" + std::to_string(l), tokens, B, spec_.H, true);
            Tensor out = ad::add(ad::matmul(tokens, P("dec.out_w")), P("dec.out_b"));
            return ad::reshape(out, {B, spec_.H * d_});
        }
        case Family::esn:
            break;
    }
    throw ConfigError("decode: unsupported family");
}

Tensor Forecaster::forward_batch(const ParamFn& P, const Tensor& X, const Tensor* teacher, double dt) const {
    return decode_batch(P, propagate_batch(P, encode_batch(P, X), dt), teacher);
}

Eigen::VectorXd Forecaster::encode(const Eigen::MatrixXd& window) const {
    Eigen::MatrixXd X = flatten_window(window);
    return encode_frozen(X).row(0).transpose();
}

Eigen::VectorXd Forecaster::propagate(const Eigen::VectorXd& z0, double dt) const {
    Tensor Z = from_eigen(z0.transpose());
    ParamFn P = frozen_params(params_);
    return to_eigen(propagate_batch(P, Z, dt)).row(0).transpose();
}

Eigen::MatrixXd Forecaster::decode(const Eigen::VectorXd& zH) const {
    Tensor Z = from_eigen(zH.transpose());
    ParamFn P = frozen_params(params_);
    Eigen::MatrixXd flat = to_eigen(decode_batch(P, Z, nullptr));
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.row(0).data(), spec_.H, d_);
}

Eigen::MatrixXd Forecaster::forward(const Eigen::MatrixXd& window, double dt) const {
    Eigen::MatrixXd flat = forward_frozen(flatten_window(window), dt);
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.row(0).data(), spec_.H, d_);
}

Eigen::MatrixXd Forecaster::forward_frozen(const Eigen::MatrixXd& X, double dt) const {
    ParamFn P = frozen_params(params_);
    return to_eigen(forward_batch(P, from_eigen(X), nullptr, dt));
}

Eigen::MatrixXd Forecaster::encode_frozen(const Eigen::MatrixXd& X) const {
    ParamFn P = frozen_params(params_);
    return to_eigen(encode_batch(P, from_eigen(X)));
}

}  // namespace atlas::fc
