#ifndef ATLAS_AD_TENSOR_HPP
#define ATLAS_AD_TENSOR_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "atlas/errors.hpp"

namespace atlas::ad {

class Tape;

// Dense row-major double tensor. A tensor either lives on a tape (node >= 0,
// gradients flow) or is a constant. Copies share the underlying buffer.
struct Tensor {
    std::vector<int> shape;
    std::shared_ptr<std::vector<double>> data;
    Tape* tape = nullptr;
    int node = -1;

    Tensor() = default;
    Tensor(std::vector<int> s, std::shared_ptr<std::vector<double>> d)
        : shape(std::move(s)), data(std::move(d)) {}

    bool requires_grad() const { return node >= 0; }
    std::size_t numel() const {
        std::size_t n = 1;
        for (int d : shape) n *= static_cast<std::size_t>(d);
        return n;
    }
    int rank() const { return static_cast<int>(shape.size()); }
    int rows() const { return shape.empty() ? 1 : shape[0]; }
    int cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& at(int i) { return (*data)[static_cast<std::size_t>(i)]; }
    double at(int i) const { return (*data)[static_cast<std::size_t>(i)]; }
    double& at(int r, int c) { return (*data)[static_cast<std::size_t>(r) * cols() + c]; }
    double at(int r, int c) const { return (*data)[static_cast<std::size_t>(r) * cols() + c]; }

    double scalar() const {
        if (numel() != 1) throw NotScalar("Tensor::scalar: tensor has " + std::to_string(numel()) + " elements");
        return (*data)[0];
    }

    // Same values, detached from any tape.
    Tensor detached() const { return Tensor{shape, data}; }
};

Tensor constant(std::vector<int> shape, std::vector<double> values);
Tensor zeros(std::vector<int> shape);
Tensor full(std::vector<int> shape, double value);

std::string shape_str(const std::vector<int>& s);

// Reverse-mode tape. Node ids are assigned in forward (topological) order;
// backward() walks them once in reverse and is then consumed until reset().
class Tape {
public:
    using BackFn = std::function<void(Tape&, const std::vector<double>& grad_out)>;

    // Leaf with gradient tracking (parameters). The buffer is shared, not copied.
    Tensor leaf(const Tensor& value);

    int record(const std::vector<int>& shape, BackFn back);

    void backward(const Tensor& loss);

    // Gradient for a tensor on this tape; zeros if no path reached it.
    std::vector<double> grad(const Tensor& t) const;

    void accumulate(int node, const std::vector<double>& g);
    void accumulate_at(int node, std::size_t offset, double g);

    void reset();
    bool consumed() const { return consumed_; }
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        BackFn back;                // empty for leaves
        std::vector<double> grad;   // lazily sized
        std::size_t numel = 0;
    };
    std::vector<Node> nodes_;
    bool consumed_ = false;
};

}  // namespace atlas::ad

#endif  // ATLAS_AD_TENSOR_HPP
