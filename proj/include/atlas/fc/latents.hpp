#ifndef ATLAS_FC_LATENTS_HPP
#define ATLAS_FC_LATENTS_HPP

#include "atlas/fc/train.hpp"

namespace atlas::fc {

// Provenance of one latent row: which window it encodes.
struct SampleIndex {
    int traj_id = 0;      // within the split
    int start_index = 0;  // first input row in the trajectory
};

// N x k latent rows with a fixed sample order shared across forecasters.
struct LatentMatrix {
    Eigen::MatrixXd Z;
    std::vector<SampleIndex> samples;
    std::string forecaster_id;
};

// Deterministic shared sample set: N window positions (L inputs + H targets
// must fit) drawn without replacement from `split`, sorted by (traj, start).
std::vector<SampleIndex> draw_sample_index(const dynsys::TrajectorySet& data, dynsys::Split split, int L,
                                           int H, int N, std::uint64_t seed);

// Row i = encoder latent of the window at samples[i]. IndexError on
// out-of-range samples.
LatentMatrix collect_latents(const Checkpoint& ckpt, const dynsys::TrajectorySet& data, dynsys::Split split,
                             const std::vector<SampleIndex>& samples);

// Ground-truth reference representation: the flattened normalized window.
LatentMatrix collect_true_latents(const dynsys::TrajectorySet& data, dynsys::Split split,
                                  const std::vector<SampleIndex>& samples, int L);

// Input rows (flattened windows) for the given samples.
Eigen::MatrixXd sample_inputs(const dynsys::TrajectorySet& data, dynsys::Split split,
                              const std::vector<SampleIndex>& samples, int L);

// Current observed state x(t) (the last input row) per sample, for probing.
Eigen::MatrixXd sample_states(const dynsys::TrajectorySet& data, dynsys::Split split,
                              const std::vector<SampleIndex>& samples, int L);

}  // namespace atlas::fc

#endif  // ATLAS_FC_LATENTS_HPP
