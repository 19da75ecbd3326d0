#include "atlas/ad/tensor.hpp"

#include <sstream>

namespace atlas::ad {

Tensor constant(std::vector<int> shape, std::vector<double> values) {
    Tensor t{std::move(shape), std::make_shared<std::vector<double>>(std::move(values))};
    if (t.data->size() != t.numel())
        throw ShapeError("constant: data length " + std::to_string(t.data->size()) +
                         " does not match shape " + shape_str(t.shape));
    return t;
}

Tensor zeros(std::vector<int> shape) { return full(std::move(shape), 0.0); }

Tensor full(std::vector<int> shape, double value) {
    Tensor t{std::move(shape), nullptr};
    t.data = std::make_shared<std::vector<double>>(t.numel(), value);
    return t;
}

std::string shape_str(const std::vector<int>& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ']';
    return os.str();
}

Tensor Tape::leaf(const Tensor& value) {
    Tensor t = value.detached();
    t.tape = this;
    t.node = record(t.shape, BackFn{});
    return t;
}

int Tape::record(const std::vector<int>& shape, BackFn back) {
    Node n;
    n.back = std::move(back);
    n.numel = 1;
    for (int d : shape) n.numel *= static_cast<std::size_t>(d);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

void Tape::backward(const Tensor& loss) {
    if (loss.numel() != 1) throw NotScalar("backward: loss has " + std::to_string(loss.numel()) + " elements");
    if (loss.tape != this || loss.node < 0) throw Error("backward: loss is not on this tape");
    if (nodes_.empty()) throw Error("backward: tape is empty");
    if (consumed_) throw Error("backward: tape already consumed; rebuild the forward pass first");
    consumed_ = true;
    nodes_[static_cast<std::size_t>(loss.node)].grad.assign(1, 1.0);
    for (int i = loss.node; i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (n.grad.empty() || !n.back) continue;
        n.back(*this, n.grad);
    }
}

std::vector<double> Tape::grad(const Tensor& t) const {
    if (t.tape != this || t.node < 0) throw Error("grad: tensor is not on this tape");
    const Node& n = nodes_[static_cast<std::size_t>(t.node)];
    if (n.grad.empty()) return std::vector<double>(n.numel, 0.0);
    return n.grad;
}

void Tape::accumulate(int node, const std::vector<double>& g) {
    Node& n = nodes_[static_cast<std::size_t>(node)];
    if (n.grad.empty()) n.grad.assign(n.numel, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
}

void Tape::accumulate_at(int node, std::size_t offset, double g) {
    Node& n = nodes_[static_cast<std::size_t>(node)];
    if (n.grad.empty()) n.grad.assign(n.numel, 0.0);
    n.grad[offset] += g;
}

void Tape::reset() {
    nodes_.clear();
    consumed_ = false;
}

}  // namespace atlas::ad
