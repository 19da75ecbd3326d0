#ifndef ATLAS_AD_PARAMS_HPP
#define ATLAS_AD_PARAMS_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "atlas/ad/tensor.hpp"
#include "atlas/rng.hpp"

namespace atlas::ad {

// Named parameter tensors in a stable order (checkpoint serialization and
// Adam moment buffers key off the names).
class ParamStore {
public:
    Tensor& add(const std::string& name, Tensor value);
    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;
    bool has(const std::string& name) const;

    const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }
    std::vector<std::pair<std::string, Tensor>>& items() { return items_; }
    std::size_t total_size() const;

    ParamStore deep_copy() const;

private:
    std::vector<std::pair<std::string, Tensor>> items_;
};

// Glorot-uniform matrix {fan_in, fan_out}; biases start at zero.
Tensor glorot(int fan_in, int fan_out, Rng& rng);

// Per-forward-pass binding of a ParamStore to a tape. Each parameter gets
// exactly one leaf per pass, so repeated uses accumulate into one gradient.
class Bound {
public:
    Bound(Tape& tape, ParamStore& store) : tape_(tape), store_(store) {}

    Tensor operator()(const std::string& name);

    std::map<std::string, std::vector<double>> grads() const;

private:
    Tape& tape_;
    ParamStore& store_;
    std::map<std::string, Tensor> leaves_;
};

}  // namespace atlas::ad

#endif  // ATLAS_AD_PARAMS_HPP
