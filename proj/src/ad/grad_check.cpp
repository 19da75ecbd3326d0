#include "atlas/ad/grad_check.hpp"

#include <cmath>

namespace atlas::ad {

namespace {

double eval_at(const ScalarFn& f, const std::vector<Tensor>& point) {
    Tape tape;
    std::vector<Tensor> leaves;
    leaves.reserve(point.size());
    for (const Tensor& p : point) leaves.push_back(tape.leaf(p));
    return f(tape, leaves).scalar();
}

}  // namespace

double grad_check(const ScalarFn& f, const std::vector<Tensor>& point, double h) {
    // Work on private copies so the caller's buffers stay untouched.
    std::vector<Tensor> pt;
    pt.reserve(point.size());
    for (const Tensor& p : point)
        pt.push_back(Tensor{p.shape, std::make_shared<std::vector<double>>(*p.data)});

    Tape tape;
    std::vector<Tensor> leaves;
    for (const Tensor& p : pt) leaves.push_back(tape.leaf(p));
    Tensor loss = f(tape, leaves);
    // A loss disconnected from every leaf is a constant: all gradients zero.
    const bool connected = loss.tape == &tape && loss.node >= 0;
    if (connected) tape.backward(loss);

    double worst = 0.0;
    for (std::size_t k = 0; k < pt.size(); ++k) {
        const std::vector<double> g_ad =
            connected ? tape.grad(leaves[k]) : std::vector<double>(pt[k].numel(), 0.0);
        std::vector<double>& buf = *pt[k].data;
        for (std::size_t i = 0; i < buf.size(); ++i) {
            const double orig = buf[i];
            buf[i] = orig + h;
            const double fp = eval_at(f, pt);
            buf[i] = orig - h;
            const double fm = eval_at(f, pt);
            buf[i] = orig;
            const double g_fd = (fp - fm) / (2.0 * h);
            const double err = std::fabs(g_ad[i] - g_fd) / std::max(1.0, std::fabs(g_fd));
            worst = std::max(worst, err);
        }
    }
    return worst;
}

}  // namespace atlas::ad
