#include "atlas/ad/optim.hpp"

#include <cmath>

namespace atlas::ad {

void adam_step(AdamState& state, ParamStore& params,
               const std::map<std::string, std::vector<double>>& grads) {
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (auto& [name, p] : params.items()) {
        auto git = grads.find(name);
        if (git == grads.end()) continue;
        const std::vector<double>& g = git->second;
        if (g.size() != p.numel())
            throw ShapeError("adam_step: gradient size " + std::to_string(g.size()) +
                             " != parameter size " + std::to_string(p.numel()) + " for '" + name + "'");
        std::vector<double>& m = state.m[name];
        std::vector<double>& v = state.v[name];
        if (m.empty()) m.assign(p.numel(), 0.0);
        if (v.empty()) v.assign(p.numel(), 0.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            (*p.data)[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

void decay_epoch(AdamState& state) { state.lr *= state.decay; }

}  // namespace atlas::ad
