#ifndef ATLAS_AD_GRAD_CHECK_HPP
#define ATLAS_AD_GRAD_CHECK_HPP

#include <functional>
#include <vector>

#include "atlas/ad/tensor.hpp"

namespace atlas::ad {

// Scalar-valued graph builder: receives leaves already registered on the tape.
using ScalarFn = std::function<Tensor(Tape&, const std::vector<Tensor>&)>;

// Max over all coordinates of |g_ad - g_fd| / max(1, |g_fd|), where g_fd is a
// central finite difference with step h. Verification harness for any graph.
double grad_check(const ScalarFn& f, const std::vector<Tensor>& point, double h = 1e-5);

}  // namespace atlas::ad

#endif  // ATLAS_AD_GRAD_CHECK_HPP
