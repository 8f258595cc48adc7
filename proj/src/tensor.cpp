#define EIGEN_DONT_PARALLELIZE
#include "bliss/tensor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace bliss {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

int64_t numel(const Shape& shape) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

bool same_shape(const Shape& a, const Shape& b) { return a == b; }

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
}

namespace {

std::shared_ptr<TensorNode> make_node(Shape shape, std::vector<double> values,
                                      bool requires_grad) {
    if (numel(shape) != static_cast<int64_t>(values.size()))
        throw std::invalid_argument("tensor: value count does not match shape " +
                                    shape_str(shape));
    auto n = std::make_shared<TensorNode>();
    n->shape = std::move(shape);
    n->values = std::move(values);
    n->requires_grad = requires_grad;
    return n;
}

// result node of an op; tracked only if some input is tracked
Tensor make_op(Shape shape, std::vector<double> values,
               std::vector<std::shared_ptr<TensorNode>> parents,
               std::function<void(TensorNode&)> backward_fn) {
    bool track = false;
    for (const auto& p : parents)
        if (p->requires_grad) track = true;
    auto n = make_node(std::move(shape), std::move(values), track);
    if (track) {
        n->parents = std::move(parents);
        n->backward_fn = std::move(backward_fn);
    }
    return Tensor(n);
}

void check_rank2(const Tensor& t, const char* who) {
    if (t.rank() != 2)
        throw std::invalid_argument(std::string(who) + ": expected rank-2 tensor, got " +
                                    shape_str(t.shape()));
}

// rows/cols of the last axis view: everything before the last axis flattens
// into rows
void last_axis_view(const Shape& shape, int64_t& rows, int64_t& cols) {
    if (shape.empty()) throw std::invalid_argument("op needs at least rank 1");
    cols = shape.back();
    rows = numel(shape) / (cols == 0 ? 1 : cols);
}

}  // namespace

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
    return Tensor(make_node(shape, std::vector<double>(static_cast<size_t>(numel(shape)), 0.0),
                            requires_grad));
}

Tensor Tensor::full(const Shape& shape, double value, bool requires_grad) {
    return Tensor(make_node(shape, std::vector<double>(static_cast<size_t>(numel(shape)), value),
                            requires_grad));
}

Tensor Tensor::from_values(const Shape& shape, std::vector<double> values, bool requires_grad) {
    return Tensor(make_node(shape, std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return Tensor(make_node({1}, {value}, requires_grad));
}

double Tensor::item() const {
    if (!node || node->values.size() != 1)
        throw std::runtime_error("item(): tensor does not hold exactly one value");
    return node->values[0];
}

// ---- elementwise ----

Tensor add(const Tensor& a, const Tensor& b) {
    if (!same_shape(a.shape(), b.shape()))
        throw std::invalid_argument("add: shape mismatch " + shape_str(a.shape()) + " vs " +
                                    shape_str(b.shape()));
    std::vector<double> out(a.values().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
    auto pa = a.node, pb = b.node;
    return make_op(a.shape(), std::move(out), {pa, pb}, [pa, pb](TensorNode& self) {
        if (pa->requires_grad) {
            pa->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i];
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pb->grad[i] += self.grad[i];
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    if (!same_shape(a.shape(), b.shape()))
        throw std::invalid_argument("sub: shape mismatch " + shape_str(a.shape()) + " vs " +
                                    shape_str(b.shape()));
    std::vector<double> out(a.values().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] - b.values()[i];
    auto pa = a.node, pb = b.node;
    return make_op(a.shape(), std::move(out), {pa, pb}, [pa, pb](TensorNode& self) {
        if (pa->requires_grad) {
            pa->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i];
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pb->grad[i] -= self.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    if (!same_shape(a.shape(), b.shape()))
        throw std::invalid_argument("mul: shape mismatch " + shape_str(a.shape()) + " vs " +
                                    shape_str(b.shape()));
    std::vector<double> out(a.values().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
    auto pa = a.node, pb = b.node;
    return make_op(a.shape(), std::move(out), {pa, pb}, [pa, pb](TensorNode& self) {
        if (pa->requires_grad) {
            pa->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i)
                pa->grad[i] += self.grad[i] * pb->values[i];
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i)
                pb->grad[i] += self.grad[i] * pa->values[i];
        }
    });
}

Tensor scale(const Tensor& a, double c) {
    std::vector<double> out(a.values().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * c;
    auto pa = a.node;
    return make_op(a.shape(), std::move(out), {pa}, [pa, c](TensorNode& self) {
        pa->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i] * c;
    });
}

Tensor add_bias(const Tensor& m, const Tensor& bias) {
    check_rank2(m, "add_bias");
    if (bias.rank() != 1 || bias.dim(0) != m.dim(1))
        throw std::invalid_argument("add_bias: bias shape " + shape_str(bias.shape()) +
                                    " does not match matrix " + shape_str(m.shape()));
    const int rows = m.dim(0), cols = m.dim(1);
    std::vector<double> out(m.values().size());
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            out[static_cast<size_t>(r) * cols + c] =
                m.values()[static_cast<size_t>(r) * cols + c] + bias.values()[static_cast<size_t>(c)];
    auto pm = m.node, pb = bias.node;
    return make_op(m.shape(), std::move(out), {pm, pb}, [pm, pb, rows, cols](TensorNode& self) {
        if (pm->requires_grad) {
            pm->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pm->grad[i] += self.grad[i];
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c)
                    pb->grad[static_cast<size_t>(c)] += self.grad[static_cast<size_t>(r) * cols + c];
        }
    });
}

Tensor relu(const Tensor& a) {
    std::vector<double> out(a.values().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] > 0.0 ? a.values()[i] : 0.0;
    auto pa = a.node;
    return make_op(a.shape(), std::move(out), {pa}, [pa](TensorNode& self) {
        pa->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i)
            if (pa->values[i] > 0.0) pa->grad[i] += self.grad[i];
    });
}

// ---- matmul ----

Tensor matmul(const Tensor& a, const Tensor& b) {
    check_rank2(a, "matmul");
    check_rank2(b, "matmul");
    if (a.dim(1) != b.dim(0))
        throw std::invalid_argument("matmul: inner dims disagree, " + shape_str(a.shape()) +
                                    " x " + shape_str(b.shape()));
    const int R = a.dim(0), K = a.dim(1), C = b.dim(1);
    std::vector<double> out(static_cast<size_t>(R) * C);
    {
        ConstMatMap ma(a.values().data(), R, K);
        ConstMatMap mb(b.values().data(), K, C);
        MatMap mo(out.data(), R, C);
        mo.noalias() = ma * mb;
    }
    auto pa = a.node, pb = b.node;
    return make_op({R, C}, std::move(out), {pa, pb}, [pa, pb, R, K, C](TensorNode& self) {
        ConstMatMap g(self.grad.data(), R, C);
        if (pa->requires_grad) {
            pa->ensure_grad();
            ConstMatMap mb(pb->values.data(), K, C);
            MatMap ga(pa->grad.data(), R, K);
            ga.noalias() += g * mb.transpose();
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            ConstMatMap ma(pa->values.data(), R, K);
            MatMap gb(pb->grad.data(), K, C);
            gb.noalias() += ma.transpose() * g;
        }
    });
}

Tensor transpose2d(const Tensor& a) {
    check_rank2(a, "transpose2d");
    const int R = a.dim(0), C = a.dim(1);
    std::vector<double> out(a.values().size());
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c)
            out[static_cast<size_t>(c) * R + r] = a.values()[static_cast<size_t>(r) * C + c];
    auto pa = a.node;
    return make_op({C, R}, std::move(out), {pa}, [pa, R, C](TensorNode& self) {
        pa->ensure_grad();
        for (int r = 0; r < R; ++r)
            for (int c = 0; c < C; ++c)
                pa->grad[static_cast<size_t>(r) * C + c] += self.grad[static_cast<size_t>(c) * R + r];
    });
}

Tensor reshape(const Tensor& a, const Shape& shape) {
    if (numel(shape) != numel(a.shape()))
        throw std::invalid_argument("reshape: cannot view " + shape_str(a.shape()) + " as " +
                                    shape_str(shape));
    auto pa = a.node;
    return make_op(shape, a.values(), {pa}, [pa](TensorNode& self) {
        pa->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i];
    });
}

// ---- row-wise nonlinear ----

Tensor softmax(const Tensor& a) {
    int64_t rows, cols;
    last_axis_view(a.shape(), rows, cols);
    if (cols == 0) throw std::invalid_argument("softmax: empty last axis");
    std::vector<double> out(a.values().size());
    for (int64_t r = 0; r < rows; ++r) {
        const double* x = a.values().data() + r * cols;
        double* y = out.data() + r * cols;
        double mx = x[0];
        for (int64_t c = 1; c < cols; ++c) mx = std::max(mx, x[c]);
        double z = 0.0;
        for (int64_t c = 0; c < cols; ++c) {
            y[c] = std::exp(x[c] - mx);
            z += y[c];
        }
        for (int64_t c = 0; c < cols; ++c) y[c] /= z;
    }
    auto pa = a.node;
    return make_op(a.shape(), std::move(out), {pa}, [pa, rows, cols](TensorNode& self) {
        pa->ensure_grad();
        for (int64_t r = 0; r < rows; ++r) {
            const double* y = self.values.data() + r * cols;
            const double* gy = self.grad.data() + r * cols;
            double* gx = pa->grad.data() + r * cols;
            double dot = 0.0;
            for (int64_t c = 0; c < cols; ++c) dot += gy[c] * y[c];
            for (int64_t c = 0; c < cols; ++c) gx[c] += y[c] * (gy[c] - dot);
        }
    });
}

Tensor log_softmax(const Tensor& a) {
    int64_t rows, cols;
    last_axis_view(a.shape(), rows, cols);
    if (cols == 0) throw std::invalid_argument("log_softmax: empty last axis");
    std::vector<double> out(a.values().size());
    for (int64_t r = 0; r < rows; ++r) {
        const double* x = a.values().data() + r * cols;
        double* y = out.data() + r * cols;
        double mx = x[0];
        for (int64_t c = 1; c < cols; ++c) mx = std::max(mx, x[c]);
        double z = 0.0;
        for (int64_t c = 0; c < cols; ++c) z += std::exp(x[c] - mx);
        const double lz = mx + std::log(z);
        for (int64_t c = 0; c < cols; ++c) y[c] = x[c] - lz;
    }
    auto pa = a.node;
    return make_op(a.shape(), std::move(out), {pa}, [pa, rows, cols](TensorNode& self) {
        pa->ensure_grad();
        for (int64_t r = 0; r < rows; ++r) {
            const double* y = self.values.data() + r * cols;
            const double* gy = self.grad.data() + r * cols;
            double* gx = pa->grad.data() + r * cols;
            double gsum = 0.0;
            for (int64_t c = 0; c < cols; ++c) gsum += gy[c];
            for (int64_t c = 0; c < cols; ++c) gx[c] += gy[c] - std::exp(y[c]) * gsum;
        }
    });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    int64_t rows, cols;
    last_axis_view(x.shape(), rows, cols);
    if (gain.rank() != 1 || gain.dim(0) != cols || bias.rank() != 1 || bias.dim(0) != cols)
        throw std::invalid_argument("layer_norm: gain/bias must be rank-1 of width " +
                                    std::to_string(cols));
    std::vector<double> out(x.values().size());
    // cache per-row mean and inverse stddev for the backward pass
    auto mean = std::make_shared<std::vector<double>>(static_cast<size_t>(rows));
    auto rstd = std::make_shared<std::vector<double>>(static_cast<size_t>(rows));
    for (int64_t r = 0; r < rows; ++r) {
        const double* xr = x.values().data() + r * cols;
        double m = 0.0;
        for (int64_t c = 0; c < cols; ++c) m += xr[c];
        m /= static_cast<double>(cols);
        double v = 0.0;
        for (int64_t c = 0; c < cols; ++c) v += (xr[c] - m) * (xr[c] - m);
        v /= static_cast<double>(cols);
        const double rs = 1.0 / std::sqrt(v + eps);
        (*mean)[static_cast<size_t>(r)] = m;
        (*rstd)[static_cast<size_t>(r)] = rs;
        double* yr = out.data() + r * cols;
        for (int64_t c = 0; c < cols; ++c)
            yr[c] = (xr[c] - m) * rs * gain.values()[static_cast<size_t>(c)] +
                    bias.values()[static_cast<size_t>(c)];
    }
    auto px = x.node, pg = gain.node, pb = bias.node;
    return make_op(x.shape(), std::move(out), {px, pg, pb},
                   [px, pg, pb, mean, rstd, rows, cols](TensorNode& self) {
        for (int64_t r = 0; r < rows; ++r) {
            const double* xr = px->values.data() + r * cols;
            const double* gy = self.grad.data() + r * cols;
            const double m = (*mean)[static_cast<size_t>(r)];
            const double rs = (*rstd)[static_cast<size_t>(r)];
            if (pg->requires_grad) {
                pg->ensure_grad();
                for (int64_t c = 0; c < cols; ++c)
                    pg->grad[static_cast<size_t>(c)] += gy[c] * (xr[c] - m) * rs;
            }
            if (pb->requires_grad) {
                pb->ensure_grad();
                for (int64_t c = 0; c < cols; ++c) pb->grad[static_cast<size_t>(c)] += gy[c];
            }
            if (px->requires_grad) {
                px->ensure_grad();
                double* gx = px->grad.data() + r * cols;
                // dxhat, then the two mean corrections
                double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                for (int64_t c = 0; c < cols; ++c) {
                    const double xhat = (xr[c] - m) * rs;
                    const double dxhat = gy[c] * pg->values[static_cast<size_t>(c)];
                    sum_dxhat += dxhat;
                    sum_dxhat_xhat += dxhat * xhat;
                }
                const double inv_n = 1.0 / static_cast<double>(cols);
                for (int64_t c = 0; c < cols; ++c) {
                    const double xhat = (xr[c] - m) * rs;
                    const double dxhat = gy[c] * pg->values[static_cast<size_t>(c)];
                    gx[c] += rs * (dxhat - inv_n * sum_dxhat - xhat * inv_n * sum_dxhat_xhat);
                }
            }
        }
    });
}

// ---- gather / reshuffle ----

Tensor gather_rows(const Tensor& table, const std::vector<int>& ids) {
    check_rank2(table, "gather_rows");
    const int R = table.dim(0), C = table.dim(1);
    std::vector<double> out(ids.size() * static_cast<size_t>(C));
    for (size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= R)
            throw std::out_of_range("gather_rows: row id " + std::to_string(ids[i]) +
                                    " outside table of " + std::to_string(R) + " rows");
        std::copy_n(table.values().data() + static_cast<size_t>(ids[i]) * C, C,
                    out.data() + i * static_cast<size_t>(C));
    }
    auto pt = table.node;
    auto kept = std::make_shared<std::vector<int>>(ids);
    return make_op({static_cast<int>(ids.size()), C}, std::move(out), {pt},
                   [pt, kept, C](TensorNode& self) {
        pt->ensure_grad();
        for (size_t i = 0; i < kept->size(); ++i) {
            double* dst = pt->grad.data() + static_cast<size_t>((*kept)[i]) * C;
            const double* src = self.grad.data() + i * static_cast<size_t>(C);
            for (int c = 0; c < C; ++c) dst[c] += src[c];  // scatter-add: ids may repeat
        }
    });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
    const int C = parts[0].dim(1);
    int R = 0;
    for (const auto& p : parts) {
        check_rank2(p, "concat_rows");
        if (p.dim(1) != C) throw std::invalid_argument("concat_rows: column mismatch");
        R += p.dim(0);
    }
    std::vector<double> out;
    out.reserve(static_cast<size_t>(R) * C);
    std::vector<std::shared_ptr<TensorNode>> parents;
    for (const auto& p : parts) {
        out.insert(out.end(), p.values().begin(), p.values().end());
        parents.push_back(p.node);
    }
    auto kept = std::make_shared<std::vector<std::shared_ptr<TensorNode>>>(parents);
    return make_op({R, C}, std::move(out), std::move(parents), [kept, C](TensorNode& self) {
        size_t off = 0;
        for (auto& p : *kept) {
            if (p->requires_grad) {
                p->ensure_grad();
                for (size_t i = 0; i < p->values.size(); ++i) p->grad[i] += self.grad[off + i];
            }
            off += p->values.size();
        }
    });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
    const int R = parts[0].dim(0);
    int C = 0;
    for (const auto& p : parts) {
        check_rank2(p, "concat_cols");
        if (p.dim(0) != R) throw std::invalid_argument("concat_cols: row mismatch");
        C += p.dim(1);
    }
    std::vector<double> out(static_cast<size_t>(R) * C);
    int c0 = 0;
    std::vector<std::shared_ptr<TensorNode>> parents;
    for (const auto& p : parts) {
        const int pc = p.dim(1);
        for (int r = 0; r < R; ++r)
            std::copy_n(p.values().data() + static_cast<size_t>(r) * pc, pc,
                        out.data() + static_cast<size_t>(r) * C + c0);
        c0 += pc;
        parents.push_back(p.node);
    }
    auto kept = std::make_shared<std::vector<std::shared_ptr<TensorNode>>>(parents);
    return make_op({R, C}, std::move(out), std::move(parents), [kept, R, C](TensorNode& self) {
        int c0 = 0;
        for (auto& p : *kept) {
            const int pc = p->shape[1];
            if (p->requires_grad) {
                p->ensure_grad();
                for (int r = 0; r < R; ++r)
                    for (int c = 0; c < pc; ++c)
                        p->grad[static_cast<size_t>(r) * pc + c] +=
                            self.grad[static_cast<size_t>(r) * C + c0 + c];
            }
            c0 += pc;
        }
    });
}

Tensor slice_rows(const Tensor& a, int row0, int nrows) {
    check_rank2(a, "slice_rows");
    const int R = a.dim(0), C = a.dim(1);
    if (row0 < 0 || nrows < 0 || row0 + nrows > R)
        throw std::out_of_range("slice_rows: [" + std::to_string(row0) + "," +
                                std::to_string(row0 + nrows) + ") outside " + std::to_string(R) +
                                " rows");
    std::vector<double> out(a.values().begin() + static_cast<size_t>(row0) * C,
                            a.values().begin() + static_cast<size_t>(row0 + nrows) * C);
    auto pa = a.node;
    return make_op({nrows, C}, std::move(out), {pa}, [pa, row0, C](TensorNode& self) {
        pa->ensure_grad();
        double* dst = pa->grad.data() + static_cast<size_t>(row0) * C;
        for (size_t i = 0; i < self.grad.size(); ++i) dst[i] += self.grad[i];
    });
}

Tensor slice_cols(const Tensor& a, int col0, int ncols) {
    check_rank2(a, "slice_cols");
    const int R = a.dim(0), C = a.dim(1);
    if (col0 < 0 || ncols < 0 || col0 + ncols > C)
        throw std::out_of_range("slice_cols: [" + std::to_string(col0) + "," +
                                std::to_string(col0 + ncols) + ") outside " + std::to_string(C) +
                                " cols");
    std::vector<double> out(static_cast<size_t>(R) * ncols);
    for (int r = 0; r < R; ++r)
        std::copy_n(a.values().data() + static_cast<size_t>(r) * C + col0, ncols,
                    out.data() + static_cast<size_t>(r) * ncols);
    auto pa = a.node;
    return make_op({R, ncols}, std::move(out), {pa}, [pa, col0, R, C, ncols](TensorNode& self) {
        pa->ensure_grad();
        for (int r = 0; r < R; ++r)
            for (int c = 0; c < ncols; ++c)
                pa->grad[static_cast<size_t>(r) * C + col0 + c] +=
                    self.grad[static_cast<size_t>(r) * ncols + c];
    });
}

Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.values()) s += v;
    auto pa = a.node;
    return make_op({1}, {s}, {pa}, [pa](TensorNode& self) {
        pa->ensure_grad();
        for (size_t i = 0; i < pa->grad.size(); ++i) pa->grad[i] += self.grad[0];
    });
}

Tensor dropout(const Tensor& a, double rate, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0)
        throw std::invalid_argument("dropout: rate must be in [0,1)");
    if (rate == 0.0) return a;  // identity, keeps the tape short
    const double keep = 1.0 - rate;
    auto mask = std::make_shared<std::vector<double>>(a.values().size());
    std::vector<double> out(a.values().size());
    for (size_t i = 0; i < out.size(); ++i) {
        const double m = rng.uniform_real() >= rate ? 1.0 / keep : 0.0;
        (*mask)[i] = m;
        out[i] = a.values()[i] * m;
    }
    auto pa = a.node;
    return make_op(a.shape(), std::move(out), {pa}, [pa, mask](TensorNode& self) {
        pa->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i] * (*mask)[i];
    });
}

Tensor masked_cross_entropy(const Tensor& logits, const std::vector<int>& labels,
                            const std::vector<uint8_t>& mask, double smoothing) {
    check_rank2(logits, "masked_cross_entropy");
    const int N = logits.dim(0), C = logits.dim(1);
    if (labels.size() != static_cast<size_t>(N) || mask.size() != static_cast<size_t>(N))
        throw std::invalid_argument("masked_cross_entropy: labels/mask must have one entry per row");
    if (smoothing < 0.0 || smoothing >= 1.0)
        throw std::invalid_argument("masked_cross_entropy: smoothing must be in [0,1)");
    int64_t m_count = 0;
    for (uint8_t m : mask) m_count += m ? 1 : 0;
    // no supervised rows: the loss is 0 with no gradient, by definition
    if (m_count == 0) return Tensor::scalar(0.0);

    const double uni = smoothing / static_cast<double>(C);
    const double conf = 1.0 - smoothing;
    // keep softmax probabilities for the backward pass
    auto probs = std::make_shared<std::vector<double>>(logits.values().size());
    double total = 0.0;
    for (int r = 0; r < N; ++r) {
        if (!mask[static_cast<size_t>(r)]) continue;
        if (labels[static_cast<size_t>(r)] < 0 || labels[static_cast<size_t>(r)] >= C)
            throw std::out_of_range("masked_cross_entropy: label " +
                                    std::to_string(labels[static_cast<size_t>(r)]) +
                                    " outside " + std::to_string(C) + " classes");
        const double* x = logits.values().data() + static_cast<size_t>(r) * C;
        double* p = probs->data() + static_cast<size_t>(r) * C;
        double mx = x[0];
        for (int c = 1; c < C; ++c) mx = std::max(mx, x[c]);
        double z = 0.0;
        for (int c = 0; c < C; ++c) z += std::exp(x[c] - mx);
        const double lz = mx + std::log(z);
        // loss = -sum_j q_j log p_j with q = smoothed one-hot
        double row_loss = 0.0;
        for (int c = 0; c < C; ++c) {
            const double logp = x[c] - lz;
            p[c] = std::exp(logp);
            double q = uni + (c == labels[static_cast<size_t>(r)] ? conf : 0.0);
            if (q != 0.0) row_loss -= q * logp;
        }
        total += row_loss;
    }
    total /= static_cast<double>(m_count);

    auto pl = logits.node;
    auto kept_labels = std::make_shared<std::vector<int>>(labels);
    auto kept_mask = std::make_shared<std::vector<uint8_t>>(mask);
    return make_op({1}, {total}, {pl},
                   [pl, probs, kept_labels, kept_mask, N, C, uni, conf, m_count](TensorNode& self) {
        pl->ensure_grad();
        const double g = self.grad[0] / static_cast<double>(m_count);
        for (int r = 0; r < N; ++r) {
            if (!(*kept_mask)[static_cast<size_t>(r)]) continue;
            const double* p = probs->data() + static_cast<size_t>(r) * C;
            double* gx = pl->grad.data() + static_cast<size_t>(r) * C;
            const int y = (*kept_labels)[static_cast<size_t>(r)];
            for (int c = 0; c < C; ++c) {
                const double q = uni + (c == y ? conf : 0.0);
                gx[c] += g * (p[c] - q);
            }
        }
    });
}

// ---- backward ----

void backward(const Tensor& root) {
    if (!root.defined() || root.size() != 1)
        throw std::invalid_argument("backward: root must be a defined scalar");
    if (!root.node->requires_grad)
        throw std::invalid_argument("backward: root is not connected to any tracked tensor");

    // iterative post-order DFS for the topological order
    std::vector<TensorNode*> order;
    std::unordered_set<TensorNode*> seen;
    std::vector<std::pair<TensorNode*, size_t>> stack;
    stack.emplace_back(root.node.get(), 0);
    seen.insert(root.node.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            TensorNode* p = node->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root.node->ensure_grad();
    root.node->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        TensorNode* n = *it;
        if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
    }
}

}  // namespace bliss
