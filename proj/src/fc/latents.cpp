#include "atlas/fc/latents.hpp"

#include <algorithm>

namespace atlas::fc {

using dynsys::Split;

std::vector<SampleIndex> draw_sample_index(const dynsys::TrajectorySet& data, Split split, int L, int H,
                                           int N, std::uint64_t seed) {
    const auto& trajs = data.split(split);
    std::vector<SampleIndex> candidates;
    for (std::size_t ti = 0; ti < trajs.size(); ++ti) {
        const int T = static_cast<int>(trajs[ti].states.rows());
        for (int start = 0; start + L + H <= T; ++start)
            candidates.push_back({static_cast<int>(ti), start});
    }
    if (static_cast<int>(candidates.size()) < N)
        throw InsufficientSamples("draw_sample_index: only " + std::to_string(candidates.size()) +
                                  " windows available, requested " + std::to_string(N));
    Rng rng = Rng::derive(seed, 0x5A);
    auto keep = rng.sample_without_replacement(candidates.size(), static_cast<std::size_t>(N));
    std::sort(keep.begin(), keep.end());
    std::vector<SampleIndex> out;
    out.reserve(keep.size());
    for (std::size_t i : keep) out.push_back(candidates[i]);
    return out;
}

Eigen::MatrixXd sample_inputs(const dynsys::TrajectorySet& data, Split split,
                              const std::vector<SampleIndex>& samples, int L) {
    const auto& trajs = data.split(split);
    const int d = data.dim();
    Eigen::MatrixXd X(samples.size(), static_cast<long>(L) * d);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& [traj_id, start] = samples[i];
        if (traj_id < 0 || traj_id >= static_cast<int>(trajs.size()))
            throw IndexError("sample " + std::to_string(i) + ": traj_id " + std::to_string(traj_id) +
                             " out of range");
        const Eigen::MatrixXd& st = trajs[static_cast<std::size_t>(traj_id)].states;
        if (start < 0 || start + L > st.rows())
            throw IndexError("sample " + std::to_string(i) + ": start " + std::to_string(start) +
                             " out of range for L=" + std::to_string(L));
        X.row(static_cast<long>(i)) = flatten_window(st.middleRows(start, L));
    }
    return X;
}

Eigen::MatrixXd sample_states(const dynsys::TrajectorySet& data, Split split,
                              const std::vector<SampleIndex>& samples, int L) {
    const auto& trajs = data.split(split);
    const int d = data.dim();
    Eigen::MatrixXd S(samples.size(), d);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& [traj_id, start] = samples[i];
        S.row(static_cast<long>(i)) = trajs[static_cast<std::size_t>(traj_id)].states.row(start + L - 1);
    }
    return S;
}

LatentMatrix collect_latents(const Checkpoint& ckpt, const dynsys::TrajectorySet& data, Split split,
                             const std::vector<SampleIndex>& samples) {
    const FrozenModel model(ckpt);
    const Eigen::MatrixXd X = sample_inputs(data, split, samples, ckpt.spec.L);
    LatentMatrix lm;
    lm.Z.resize(static_cast<long>(samples.size()), model.latent_dim());
    const int chunk = 512;
    for (int start = 0; start < lm.Z.rows(); start += chunk) {
        const int n = std::min<int>(chunk, static_cast<int>(lm.Z.rows()) - start);
        lm.Z.middleRows(start, n) = model.encode(X.middleRows(start, n));
    }
    if (!lm.Z.allFinite()) throw NonFiniteError("collect_latents: non-finite latent row");
    lm.samples = samples;
    lm.forecaster_id = ckpt.id;
    return lm;
}

LatentMatrix collect_true_latents(const dynsys::TrajectorySet& data, Split split,
                                  const std::vector<SampleIndex>& samples, int L) {
    LatentMatrix lm;
    lm.Z = sample_inputs(data, split, samples, L);
    lm.samples = samples;
    lm.forecaster_id = "true_system";
    return lm;
}

}  // namespace atlas::fc
