#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "bliss/rng.hpp"

namespace bliss {

using Shape = std::vector<int>;

int64_t numel(const Shape& shape);
bool same_shape(const Shape& a, const Shape& b);
std::string shape_str(const Shape& shape);

// One node of the backward tape: the forward value plus, after backward()
// has run, the gradient of the root scalar with respect to this value.
struct TensorNode {
    Shape shape;
    std::vector<double> values;  // row-major
    std::vector<double> grad;    // same length as values once touched
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorNode>> parents;
    // scatters this node's grad into its parents' grad buffers
    std::function<void(TensorNode&)> backward_fn;

    void ensure_grad() {
        if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
    }
};

// Value handle. Copies share the underlying node, like the usual tape style.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<TensorNode> n) : node(std::move(n)) {}

    static Tensor zeros(const Shape& shape, bool requires_grad = false);
    static Tensor full(const Shape& shape, double value, bool requires_grad = false);
    static Tensor from_values(const Shape& shape, std::vector<double> values,
                              bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return node != nullptr; }
    const Shape& shape() const { return node->shape; }
    int rank() const { return static_cast<int>(node->shape.size()); }
    int dim(int i) const { return node->shape[static_cast<size_t>(i)]; }
    int64_t size() const { return static_cast<int64_t>(node->values.size()); }
    bool requires_grad() const { return node->requires_grad; }

    std::vector<double>& values() { return node->values; }
    const std::vector<double>& values() const { return node->values; }
    std::vector<double>& grad() { return node->grad; }
    const std::vector<double>& grad() const { return node->grad; }
    double item() const;  // throws unless the tensor holds exactly one value

    std::shared_ptr<TensorNode> node;
};

// ---- op library (all build the tape when an input requires grad) ----

Tensor add(const Tensor& a, const Tensor& b);          // same shape
Tensor sub(const Tensor& a, const Tensor& b);          // same shape
Tensor mul(const Tensor& a, const Tensor& b);          // elementwise, same shape
Tensor scale(const Tensor& a, double c);
Tensor add_bias(const Tensor& m, const Tensor& bias);  // [R,C] + [C], row broadcast
Tensor relu(const Tensor& a);
Tensor matmul(const Tensor& a, const Tensor& b);       // [R,K]x[K,C] -> [R,C]
Tensor transpose2d(const Tensor& a);
Tensor reshape(const Tensor& a, const Shape& shape);   // numel preserved
Tensor softmax(const Tensor& a);                       // over last axis
Tensor log_softmax(const Tensor& a);                   // over last axis
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-5);                  // normalizes last axis
Tensor gather_rows(const Tensor& table, const std::vector<int>& ids);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& a, int row0, int nrows);
Tensor slice_cols(const Tensor& a, int col0, int ncols);
Tensor sum(const Tensor& a);                           // scalar
Tensor dropout(const Tensor& a, double rate, Rng& rng);  // inverted scaling

// Mean cross entropy over rows of `logits` where mask!=0; smoothing spreads
// eps/C to every class. An all-off mask yields the constant 0 (no gradient).
Tensor masked_cross_entropy(const Tensor& logits, const std::vector<int>& labels,
                            const std::vector<uint8_t>& mask, double smoothing);

// Runs the tape backward from a scalar root. Seeds d(root)/d(root) = 1 and
// visits each reachable node exactly once in reverse topological order.
void backward(const Tensor& root);

}  // namespace bliss
