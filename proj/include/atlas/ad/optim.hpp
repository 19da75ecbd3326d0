#ifndef ATLAS_AD_OPTIM_HPP
#define ATLAS_AD_OPTIM_HPP

#include <map>
#include <string>
#include <vector>

#include "atlas/ad/params.hpp"

namespace atlas::ad {

// Adam with bias correction plus the per-epoch exponential step-size decay
// used by the training protocol.
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double decay = 0.95;
    long step_count = 0;
    std::map<std::string, std::vector<double>> m;
    std::map<std::string, std::vector<double>> v;
};

// In-place update of every parameter that has a gradient entry.
void adam_step(AdamState& state, ParamStore& params,
               const std::map<std::string, std::vector<double>>& grads);

// lr <- lr * decay, applied once per epoch.
void decay_epoch(AdamState& state);

}  // namespace atlas::ad

#endif  // ATLAS_AD_OPTIM_HPP
