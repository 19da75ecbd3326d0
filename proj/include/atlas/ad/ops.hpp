#ifndef ATLAS_AD_OPS_HPP
#define ATLAS_AD_OPS_HPP

#include <vector>

#include "atlas/ad/tensor.hpp"

namespace atlas::ad {

// Forward ops. Every op validates shapes, checks the result for NaN/Inf
// (NonFiniteError naming the op) and records a tape node when any input
// requires grad. Broadcasting is restricted to matrix + row vector in add().

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);   // same shape, or {m,n}+{n} bias row
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);   // elementwise
Tensor divide(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);

Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor sqrt(const Tensor& a);

// Softmax along `axis` (0 = down columns, 1 = along rows) of a 2-D tensor.
Tensor softmax(const Tensor& a, int axis);

Tensor concat(const std::vector<Tensor>& parts, int axis);
// Slice along `axis`: rows [start, start+len) or columns [start, start+len).
Tensor slice(const Tensor& a, int axis, int start, int len);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, std::vector<int> shape);

Tensor mean(const Tensor& a);                   // scalar
Tensor sum(const Tensor& a);                    // scalar
Tensor row_sum(const Tensor& a);                // {m,n} -> {m}
Tensor col_mean(const Tensor& a);               // {m,n} -> {n}

// Row/column rescaling: row i (column j) of `a` multiplied by v[i] (v[j]).
Tensor mul_rows(const Tensor& a, const Tensor& v);
Tensor mul_cols(const Tensor& a, const Tensor& v);

// Each row of `a` repeated `times` consecutive times: {m,n} -> {m*times,n}.
Tensor repeat_rows(const Tensor& a, int times);

// Per-row layer normalization with learnable gain/bias.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

// Mean squared error over all elements.
Tensor mse(const Tensor& pred, const Tensor& target);

}  // namespace atlas::ad

#endif  // ATLAS_AD_OPS_HPP
