#include "atlas/ad/params.hpp"

#include <cmath>

namespace atlas::ad {

Tensor& ParamStore::add(const std::string& name, Tensor value) {
    if (has(name)) throw Error("ParamStore: duplicate parameter '" + name + "'");
    items_.emplace_back(name, std::move(value));
    return items_.back().second;
}

Tensor& ParamStore::get(const std::string& name) {
    for (auto& [n, t] : items_)
        if (n == name) return t;
    throw Error("ParamStore: unknown parameter '" + name + "'");
}

const Tensor& ParamStore::get(const std::string& name) const {
    for (const auto& [n, t] : items_)
        if (n == name) return t;
    throw Error("ParamStore: unknown parameter '" + name + "'");
}

bool ParamStore::has(const std::string& name) const {
    for (const auto& [n, t] : items_)
        if (n == name) return true;
    return false;
}

std::size_t ParamStore::total_size() const {
    std::size_t n = 0;
    for (const auto& [name, t] : items_) n += t.numel();
    return n;
}

ParamStore ParamStore::deep_copy() const {
    ParamStore out;
    for (const auto& [name, t] : items_) {
        Tensor c{t.shape, std::make_shared<std::vector<double>>(*t.data)};
        out.items_.emplace_back(name, std::move(c));
    }
    return out;
}

Tensor glorot(int fan_in, int fan_out, Rng& rng) {
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    Tensor t = zeros({fan_in, fan_out});
    for (double& v : *t.data) v = rng.uniform(-a, a);
    return t;
}

Tensor Bound::operator()(const std::string& name) {
    auto it = leaves_.find(name);
    if (it != leaves_.end()) return it->second;
    Tensor leaf = tape_.leaf(store_.get(name));
    leaves_.emplace(name, leaf);
    return leaf;
}

std::map<std::string, std::vector<double>> Bound::grads() const {
    std::map<std::string, std::vector<double>> out;
    for (const auto& [name, leaf] : leaves_) out.emplace(name, tape_.grad(leaf));
    return out;
}

}  // namespace atlas::ad
