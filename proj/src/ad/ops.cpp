#include "atlas/ad/ops.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace atlas::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

CMapMat as_mat(const Tensor& t) { return CMapMat(t.data->data(), t.rows(), t.cols()); }

Tape* common_tape(std::initializer_list<const Tensor*> xs) {
    Tape* tp = nullptr;
    for (const Tensor* x : xs) {
        if (!x->tape) continue;
        if (tp && tp != x->tape) throw Error("autodiff op: inputs belong to different tapes");
        tp = x->tape;
    }
    return tp;
}

Tensor alloc(std::vector<int> shape) {
    Tensor t{std::move(shape), nullptr};
    t.data = std::make_shared<std::vector<double>>(t.numel());
    return t;
}

void check_finite(const char* op, const Tensor& t) {
    for (double v : *t.data)
        if (!std::isfinite(v)) throw NonFiniteError(std::string("op '") + op + "' produced a non-finite value");
}

void finish(const char* op, Tensor& out, Tape* tp, Tape::BackFn back) {
    check_finite(op, out);
    if (tp) {
        out.tape = tp;
        out.node = tp->record(out.shape, std::move(back));
    }
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape != b.shape)
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
}

// Elementwise unary op with derivative expressed from (x, y).
template <typename F, typename DF>
Tensor unary(const char* op, const Tensor& a, F f, DF df) {
    Tape* tp = common_tape({&a});
    Tensor out = alloc(a.shape);
    for (std::size_t i = 0; i < out.data->size(); ++i) (*out.data)[i] = f((*a.data)[i]);
    const int an = a.node;
    const auto ad = a.data;
    const auto od = out.data;
    finish(op, out, tp, [an, ad, od, df](Tape& t, const std::vector<double>& g) {
        if (an < 0) return;
        std::vector<double> ga(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] = g[i] * df((*ad)[i], (*od)[i]);
        t.accumulate(an, ga);
    });
    return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows())
        throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape) + " x " + shape_str(b.shape));
    Tape* tp = common_tape({&a, &b});
    Tensor out = alloc({a.rows(), b.cols()});
    MapMat(out.data->data(), out.rows(), out.cols()).noalias() = as_mat(a) * as_mat(b);
    const Tensor av = a.detached(), bv = b.detached();
    const int an = a.node, bn = b.node;
    finish("matmul", out, tp, [av, bv, an, bn](Tape& t, const std::vector<double>& g) {
        CMapMat gm(g.data(), av.rows(), bv.cols());
        if (an >= 0) {
            std::vector<double> ga(av.numel());
            MapMat(ga.data(), av.rows(), av.cols()).noalias() = gm * as_mat(bv).transpose();
            t.accumulate(an, ga);
        }
        if (bn >= 0) {
            std::vector<double> gb(bv.numel());
            MapMat(gb.data(), bv.rows(), bv.cols()).noalias() = as_mat(av).transpose() * gm;
            t.accumulate(bn, gb);
        }
    });
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    const bool bias_row = a.rank() == 2 && b.rank() == 1 && b.shape[0] == a.cols();
    if (!bias_row) require_same_shape("add", a, b);
    Tape* tp = common_tape({&a, &b});
    Tensor out = alloc(a.shape);
    if (bias_row) {
        for (int i = 0; i < a.rows(); ++i)
            for (int j = 0; j < a.cols(); ++j) out.at(i, j) = a.at(i, j) + b.at(j);
    } else {
        for (std::size_t i = 0; i < out.data->size(); ++i) (*out.data)[i] = (*a.data)[i] + (*b.data)[i];
    }
    const int an = a.node, bn = b.node;
    const int rows = a.rows(), cols = a.cols();
    finish("add", out, tp, [an, bn, bias_row, rows, cols](Tape& t, const std::vector<double>& g) {
        if (an >= 0) t.accumulate(an, g);
        if (bn >= 0) {
            if (bias_row) {
                std::vector<double> gb(static_cast<std::size_t>(cols), 0.0);
                for (int i = 0; i < rows; ++i)
                    for (int j = 0; j < cols; ++j) gb[static_cast<std::size_t>(j)] += g[static_cast<std::size_t>(i) * cols + j];
                t.accumulate(bn, gb);
            } else {
                t.accumulate(bn, g);
            }
        }
    });
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape("sub", a, b);
    Tape* tp = common_tape({&a, &b});
    Tensor out = alloc(a.shape);
    for (std::size_t i = 0; i < out.data->size(); ++i) (*out.data)[i] = (*a.data)[i] - (*b.data)[i];
    const int an = a.node, bn = b.node;
    finish("sub", out, tp, [an, bn](Tape& t, const std::vector<double>& g) {
        if (an >= 0) t.accumulate(an, g);
        if (bn >= 0) {
            std::vector<double> gb(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] = -g[i];
            t.accumulate(bn, gb);
        }
    });
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape("mul", a, b);
    Tape* tp = common_tape({&a, &b});
    Tensor out = alloc(a.shape);
    for (std::size_t i = 0; i < out.data->size(); ++i) (*out.data)[i] = (*a.data)[i] * (*b.data)[i];
    const auto ad = a.data, bd = b.data;
    const int an = a.node, bn = b.node;
    finish("mul", out, tp, [ad, bd, an, bn](Tape& t, const std::vector<double>& g) {
        std::vector<double> buf(g.size());
        if (an >= 0) {
            for (std::size_t i = 0; i < g.size(); ++i) buf[i] = g[i] * (*bd)[i];
            t.accumulate(an, buf);
        }
        if (bn >= 0) {
            for (std::size_t i = 0; i < g.size(); ++i) buf[i] = g[i] * (*ad)[i];
            t.accumulate(bn, buf);
        }
    });
    return out;
}

Tensor divide(const Tensor& a, const Tensor& b) {
    require_same_shape("divide", a, b);
    Tape* tp = common_tape({&a, &b});
    Tensor out = alloc(a.shape);
    for (std::size_t i = 0; i < out.data->size(); ++i) (*out.data)[i] = (*a.data)[i] / (*b.data)[i];
    const auto ad = a.data, bd = b.data;
    const int an = a.node, bn = b.node;
    finish("divide", out, tp, [ad, bd, an, bn](Tape& t, const std::vector<double>& g) {
        std::vector<double> buf(g.size());
        if (an >= 0) {
            for (std::size_t i = 0; i < g.size(); ++i) buf[i] = g[i] / (*bd)[i];
            t.accumulate(an, buf);
        }
        if (bn >= 0) {
            for (std::size_t i = 0; i < g.size(); ++i) buf[i] = -g[i] * (*ad)[i] / ((*bd)[i] * (*bd)[i]);
            t.accumulate(bn, buf);
        }
    });
    return out;
}

Tensor scale(const Tensor& a, double c) {
    return unary("scale", a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Tensor add_scalar(const Tensor& a, double c) {
    return unary("add_scalar", a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Tensor tanh(const Tensor& a) {
    return unary("tanh", a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
    return unary("sigmoid", a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
                 [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& a) {
    return unary("relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
                 [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& a) {
    return unary("exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor sqrt(const Tensor& a) {
    return unary("sqrt", a, [](double x) { return std::sqrt(x); }, [](double, double y) { return 0.5 / y; });
}

Tensor softmax(const Tensor& a, int axis) {
    if (a.rank() != 2) throw ShapeError("softmax: expected 2-D tensor, got " + shape_str(a.shape));
    if (axis != 0 && axis != 1) throw ShapeError("softmax: axis must be 0 or 1");
    Tape* tp = common_tape({&a});
    Tensor out = alloc(a.shape);
    const int R = a.rows(), C = a.cols();
    const int outer = (axis == 1) ? R : C;
    const int inner = (axis == 1) ? C : R;
    const auto idx = [axis, C](int o, int i) {
        return axis == 1 ? static_cast<std::size_t>(o) * C + i : static_cast<std::size_t>(i) * C + o;
    };
    for (int o = 0; o < outer; ++o) {
        double mx = -1e300;
        for (int i = 0; i < inner; ++i) mx = std::max(mx, (*a.data)[idx(o, i)]);
        double denom = 0.0;
        for (int i = 0; i < inner; ++i) denom += std::exp((*a.data)[idx(o, i)] - mx);
        for (int i = 0; i < inner; ++i) (*out.data)[idx(o, i)] = std::exp((*a.data)[idx(o, i)] - mx) / denom;
    }
    const auto od = out.data;
    const int an = a.node;
    finish("softmax", out, tp, [od, an, outer, inner, idx](Tape& t, const std::vector<double>& g) {
        if (an < 0) return;
        std::vector<double> ga(g.size());
        for (int o = 0; o < outer; ++o) {
            double dot = 0.0;
            for (int i = 0; i < inner; ++i) dot += g[idx(o, i)] * (*od)[idx(o, i)];
            for (int i = 0; i < inner; ++i) ga[idx(o, i)] = (*od)[idx(o, i)] * (g[idx(o, i)] - dot);
        }
        t.accumulate(an, ga);
    });
    return out;
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    if (axis != 0 && axis != 1) throw ShapeError("concat: axis must be 0 or 1");
    std::vector<const Tensor*> ptrs;
    Tape* tp = nullptr;
    for (const Tensor& p : parts) {
        if (p.rank() != 2) throw ShapeError("concat: expected 2-D tensors");
        if (p.tape) {
            if (tp && tp != p.tape) throw Error("concat: inputs belong to different tapes");
            tp = p.tape;
        }
    }
    int R = parts[0].rows(), C = parts[0].cols();
    if (axis == 0) {
        R = 0;
        for (const Tensor& p : parts) {
            if (p.cols() != C) throw ShapeError("concat: column mismatch");
            R += p.rows();
        }
    } else {
        C = 0;
        for (const Tensor& p : parts) {
            if (p.rows() != R) throw ShapeError("concat: row mismatch");
            C += p.cols();
        }
    }
    Tensor out = alloc({R, C});
    std::vector<std::pair<int, int>> spans;  // (node, extent along axis)
    std::vector<int> offsets;
    int off = 0;
    for (const Tensor& p : parts) {
        if (axis == 0) {
            for (int i = 0; i < p.rows(); ++i)
                for (int j = 0; j < C; ++j) out.at(off + i, j) = p.at(i, j);
            spans.emplace_back(p.node, p.rows());
        } else {
            for (int i = 0; i < R; ++i)
                for (int j = 0; j < p.cols(); ++j) out.at(i, off + j) = p.at(i, j);
            spans.emplace_back(p.node, p.cols());
        }
        offsets.push_back(off);
        off += spans.back().second;
    }
    finish("concat", out, tp, [spans, offsets, axis, R, C](Tape& t, const std::vector<double>& g) {
        for (std::size_t k = 0; k < spans.size(); ++k) {
            const int node = spans[k].first;
            if (node < 0) continue;
            const int ext = spans[k].second, off2 = offsets[k];
            if (axis == 0) {
                std::vector<double> gp(static_cast<std::size_t>(ext) * C);
                for (int i = 0; i < ext; ++i)
                    for (int j = 0; j < C; ++j) gp[static_cast<std::size_t>(i) * C + j] = g[static_cast<std::size_t>(off2 + i) * C + j];
                t.accumulate(node, gp);
            } else {
                std::vector<double> gp(static_cast<std::size_t>(R) * ext);
                for (int i = 0; i < R; ++i)
                    for (int j = 0; j < ext; ++j) gp[static_cast<std::size_t>(i) * ext + j] = g[static_cast<std::size_t>(i) * C + off2 + j];
                t.accumulate(node, gp);
            }
        }
    });
    return out;
}

Tensor slice(const Tensor& a, int axis, int start, int len) {
    if (a.rank() != 2) throw ShapeError("slice: expected 2-D tensor");
    if (axis != 0 && axis != 1) throw ShapeError("slice: axis must be 0 or 1");
    const int extent = axis == 0 ? a.rows() : a.cols();
    if (start < 0 || len < 0 || start + len > extent)
        throw ShapeError("slice: range [" + std::to_string(start) + "," + std::to_string(start + len) +
                         ") out of bounds for extent " + std::to_string(extent));
    Tape* tp = common_tape({&a});
    const int R = axis == 0 ? len : a.rows();
    const int C = axis == 0 ? a.cols() : len;
    Tensor out = alloc({R, C});
    for (int i = 0; i < R; ++i)
        for (int j = 0; j < C; ++j) out.at(i, j) = axis == 0 ? a.at(start + i, j) : a.at(i, start + j);
    const int an = a.node, ar = a.rows(), ac = a.cols();
    finish("slice", out, tp, [an, ar, ac, axis, start, R, C](Tape& t, const std::vector<double>& g) {
        if (an < 0) return;
        for (int i = 0; i < R; ++i)
            for (int j = 0; j < C; ++j) {
                const std::size_t dst = axis == 0 ? static_cast<std::size_t>(start + i) * ac + j
                                                  : static_cast<std::size_t>(i) * ac + start + j;
                t.accumulate_at(an, dst, g[static_cast<std::size_t>(i) * C + j]);
            }
        (void)ar;
    });
    return out;
}

Tensor transpose(const Tensor& a) {
    if (a.rank() != 2) throw ShapeError("transpose: expected 2-D tensor");
    Tape* tp = common_tape({&a});
    Tensor out = alloc({a.cols(), a.rows()});
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out.at(j, i) = a.at(i, j);
    const int an = a.node, R = a.rows(), C = a.cols();
    finish("transpose", out, tp, [an, R, C](Tape& t, const std::vector<double>& g) {
        if (an < 0) return;
        std::vector<double> ga(g.size());
        for (int i = 0; i < R; ++i)
            for (int j = 0; j < C; ++j) ga[static_cast<std::size_t>(i) * C + j] = g[static_cast<std::size_t>(j) * R + i];
        t.accumulate(an, ga);
    });
    return out;
}

Tensor reshape(const Tensor& a, std::vector<int> shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    if (n != a.numel())
        throw ShapeError("reshape: cannot view " + shape_str(a.shape) + " as " + shape_str(shape));
    Tape* tp = common_tape({&a});
    Tensor out{std::move(shape), std::make_shared<std::vector<double>>(*a.data)};
    const int an = a.node;
    finish("reshape", out, tp, [an](Tape& t, const std::vector<double>& g) {
        if (an >= 0) t.accumulate(an, g);
    });
    return out;
}

Tensor mean(const Tensor& a) {
    Tape* tp = common_tape({&a});
    double s = 0.0;
    for (double v : *a.data) s += v;
    const double n = static_cast<double>(a.numel());
    Tensor out = constant({1}, {s / n});
    const int an = a.node;
    const std::size_t cnt = a.numel();
    finish("mean", out, tp, [an, cnt, n](Tape& t, const std::vector<double>& g) {
        if (an < 0) return;
        t.accumulate(an, std::vector<double>(cnt, g[0] / n));
    });
    return out;
}

Tensor sum(const Tensor& a) {
    Tape* tp = common_tape({&a});
    double s = 0.0;
    for (double v : *a.data) s += v;
    Tensor out = constant({1}, {s});
    const int an = a.node;
    const std::size_t cnt = a.numel();
    finish("sum", out, tp, [an, cnt](Tape& t, const std::vector<double>& g) {
        if (an < 0) return;
        t.accumulate(an, std::vector<double>(cnt, g[0]));
    });
    return out;
}

Tensor row_sum(const Tensor& a) {
    if (a.rank() != 2) throw ShapeError("row_sum: expected 2-D tensor");
    Tape* tp = common_tape({&a});
    const int R = a.rows(), C = a.cols();
    Tensor out = alloc({R});
    for (int i = 0; i < R; ++i) {
        double s = 0.0;
        for (int j = 0; j < C; ++j) s += a.at(i, j);
        out.at(i) = s;
    }
    const int an = a.node;
    finish("row_sum", out, tp, [an, R, C](Tape& t, const std::vector<double>& g) {
        if (an < 0) return;
        std::vector<double> ga(static_cast<std::size_t>(R) * C);
        for (int i = 0; i < R; ++i)
            for (int j = 0; j < C; ++j) ga[static_cast<std::size_t>(i) * C + j] = g[static_cast<std::size_t>(i)];
        t.accumulate(an, ga);
    });
    return out;
}

Tensor col_mean(const Tensor& a) {
    if (a.rank() != 2) throw ShapeError("col_mean: expected 2-D tensor");
    Tape* tp = common_tape({&a});
    const int R = a.rows(), C = a.cols();
    Tensor out = alloc({C});
    for (int j = 0; j < C; ++j) {
        double s = 0.0;
        for (int i = 0; i < R; ++i) s += a.at(i, j);
        out.at(j) = s / R;
    }
    const int an = a.node;
    finish("col_mean", out, tp, [an, R, C](Tape& t, const std::vector<double>& g) {
        if (an < 0) return;
        std::vector<double> ga(static_cast<std::size_t>(R) * C);
        for (int i = 0; i < R; ++i)
            for (int j = 0; j < C; ++j) ga[static_cast<std::size_t>(i) * C + j] = g[static_cast<std::size_t>(j)] / R;
        t.accumulate(an, ga);
    });
    return out;
}

Tensor mul_rows(const Tensor& a, const Tensor& v) {
    if (a.rank() != 2 || v.rank() != 1 || v.shape[0] != a.rows())
        throw ShapeError("mul_rows: shapes " + shape_str(a.shape) + " vs " + shape_str(v.shape));
    Tape* tp = common_tape({&a, &v});
    const int R = a.rows(), C = a.cols();
    Tensor out = alloc(a.shape);
    for (int i = 0; i < R; ++i)
        for (int j = 0; j < C; ++j) out.at(i, j) = a.at(i, j) * v.at(i);
    const Tensor av = a.detached(), vv = v.detached();
    const int an = a.node, vn = v.node;
    finish("mul_rows", out, tp, [av, vv, an, vn, R, C](Tape& t, const std::vector<double>& g) {
        if (an >= 0) {
            std::vector<double> ga(static_cast<std::size_t>(R) * C);
            for (int i = 0; i < R; ++i)
                for (int j = 0; j < C; ++j) ga[static_cast<std::size_t>(i) * C + j] = g[static_cast<std::size_t>(i) * C + j] * vv.at(i);
            t.accumulate(an, ga);
        }
        if (vn >= 0) {
            std::vector<double> gv(static_cast<std::size_t>(R), 0.0);
            for (int i = 0; i < R; ++i)
                for (int j = 0; j < C; ++j) gv[static_cast<std::size_t>(i)] += g[static_cast<std::size_t>(i) * C + j] * av.at(i, j);
            t.accumulate(vn, gv);
        }
    });
    return out;
}

Tensor mul_cols(const Tensor& a, const Tensor& v) {
    if (a.rank() != 2 || v.rank() != 1 || v.shape[0] != a.cols())
        throw ShapeError("mul_cols: shapes " + shape_str(a.shape) + " vs " + shape_str(v.shape));
    Tape* tp = common_tape({&a, &v});
    const int R = a.rows(), C = a.cols();
    Tensor out = alloc(a.shape);
    for (int i = 0; i < R; ++i)
        for (int j = 0; j < C; ++j) out.at(i, j) = a.at(i, j) * v.at(j);
    const Tensor av = a.detached(), vv = v.detached();
    const int an = a.node, vn = v.node;
    finish("mul_cols", out, tp, [av, vv, an, vn, R, C](Tape& t, const std::vector<double>& g) {
        if (an >= 0) {
            std::vector<double> ga(static_cast<std::size_t>(R) * C);
            for (int i = 0; i < R; ++i)
                for (int j = 0; j < C; ++j) ga[static_cast<std::size_t>(i) * C + j] = g[static_cast<std::size_t>(i) * C + j] * vv.at(j);
            t.accumulate(an, ga);
        }
        if (vn >= 0) {
            std::vector<double> gv(static_cast<std::size_t>(C), 0.0);
            for (int i = 0; i < R; ++i)
                for (int j = 0; j < C; ++j) gv[static_cast<std::size_t>(j)] += g[static_cast<std::size_t>(i) * C + j] * av.at(i, j);
            t.accumulate(vn, gv);
        }
    });
    return out;
}

Tensor repeat_rows(const Tensor& a, int times) {
    if (a.rank() != 2) throw ShapeError("repeat_rows: expected 2-D tensor");
    if (times < 1) throw ShapeError("repeat_rows: times must be positive");
    Tape* tp = common_tape({&a});
    const int R = a.rows(), C = a.cols();
    Tensor out = alloc({R * times, C});
    for (int i = 0; i < R; ++i)
        for (int r = 0; r < times; ++r)
            for (int j = 0; j < C; ++j) out.at(i * times + r, j) = a.at(i, j);
    const int an = a.node;
    finish("repeat_rows", out, tp, [an, R, C, times](Tape& t, const std::vector<double>& g) {
        if (an < 0) return;
        std::vector<double> ga(static_cast<std::size_t>(R) * C, 0.0);
        for (int i = 0; i < R; ++i)
            for (int r = 0; r < times; ++r)
                for (int j = 0; j < C; ++j)
                    ga[static_cast<std::size_t>(i) * C + j] += g[static_cast<std::size_t>(i * times + r) * C + j];
        t.accumulate(an, ga);
    });
    return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    if (x.rank() != 2) throw ShapeError("layer_norm: expected 2-D input");
    if (gamma.rank() != 1 || gamma.shape[0] != x.cols() || beta.shape != gamma.shape)
        throw ShapeError("layer_norm: gain/bias must be vectors of length " + std::to_string(x.cols()));
    Tape* tp = common_tape({&x, &gamma, &beta});
    const int R = x.rows(), C = x.cols();
    Tensor out = alloc(x.shape);
    auto xhat = std::make_shared<std::vector<double>>(x.numel());
    auto inv_sigma = std::make_shared<std::vector<double>>(static_cast<std::size_t>(R));
    for (int i = 0; i < R; ++i) {
        double mu = 0.0;
        for (int j = 0; j < C; ++j) mu += x.at(i, j);
        mu /= C;
        double var = 0.0;
        for (int j = 0; j < C; ++j) {
            const double d = x.at(i, j) - mu;
            var += d * d;
        }
        var /= C;
        const double is = 1.0 / std::sqrt(var + eps);
        (*inv_sigma)[static_cast<std::size_t>(i)] = is;
        for (int j = 0; j < C; ++j) {
            const double xh = (x.at(i, j) - mu) * is;
            (*xhat)[static_cast<std::size_t>(i) * C + j] = xh;
            out.at(i, j) = xh * gamma.at(j) + beta.at(j);
        }
    }
    const Tensor gv = gamma.detached();
    const int xn = x.node, gn = gamma.node, bn = beta.node;
    finish("layer_norm", out, tp, [xhat, inv_sigma, gv, xn, gn, bn, R, C](Tape& t, const std::vector<double>& g) {
        if (gn >= 0) {
            std::vector<double> gg(static_cast<std::size_t>(C), 0.0);
            for (int i = 0; i < R; ++i)
                for (int j = 0; j < C; ++j) gg[static_cast<std::size_t>(j)] += g[static_cast<std::size_t>(i) * C + j] * (*xhat)[static_cast<std::size_t>(i) * C + j];
            t.accumulate(gn, gg);
        }
        if (bn >= 0) {
            std::vector<double> gb(static_cast<std::size_t>(C), 0.0);
            for (int i = 0; i < R; ++i)
                for (int j = 0; j < C; ++j) gb[static_cast<std::size_t>(j)] += g[static_cast<std::size_t>(i) * C + j];
            t.accumulate(bn, gb);
        }
        if (xn >= 0) {
            std::vector<double> gx(static_cast<std::size_t>(R) * C);
            for (int i = 0; i < R; ++i) {
                double m1 = 0.0, m2 = 0.0;
                for (int j = 0; j < C; ++j) {
                    const double dxh = g[static_cast<std::size_t>(i) * C + j] * gv.at(j);
                    m1 += dxh;
                    m2 += dxh * (*xhat)[static_cast<std::size_t>(i) * C + j];
                }
                m1 /= C;
                m2 /= C;
                const double is = (*inv_sigma)[static_cast<std::size_t>(i)];
                for (int j = 0; j < C; ++j) {
                    const double dxh = g[static_cast<std::size_t>(i) * C + j] * gv.at(j);
                    gx[static_cast<std::size_t>(i) * C + j] =
                        is * (dxh - m1 - (*xhat)[static_cast<std::size_t>(i) * C + j] * m2);
                }
            }
            t.accumulate(xn, gx);
        }
    });
    return out;
}

Tensor mse(const Tensor& pred, const Tensor& target) {
    require_same_shape("mse", pred, target);
    Tape* tp = common_tape({&pred, &target});
    double s = 0.0;
    for (std::size_t i = 0; i < pred.data->size(); ++i) {
        const double d = (*pred.data)[i] - (*target.data)[i];
        s += d * d;
    }
    const double n = static_cast<double>(pred.numel());
    Tensor out = constant({1}, {s / n});
    const auto pd = pred.data, td = target.data;
    const int pn = pred.node, tn = target.node;
    finish("mse", out, tp, [pd, td, pn, tn, n](Tape& t, const std::vector<double>& g) {
        std::vector<double> buf(pd->size());
        for (std::size_t i = 0; i < pd->size(); ++i) buf[i] = g[0] * 2.0 * ((*pd)[i] - (*td)[i]) / n;
        if (pn >= 0) t.accumulate(pn, buf);
        if (tn >= 0) {
            for (double& v : buf) v = -v;
            t.accumulate(tn, buf);
        }
    });
    return out;
}

}  // namespace atlas::ad
