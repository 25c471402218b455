#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

namespace alignnd {

// Row-major 2-D array of 64-bit reals. Scalars are 1x1, vectors 1xN.
struct Array {
    int rows = 0, cols = 0;
    std::vector<double> v;

    Array() = default;
    Array(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

    static Array full(int r, int c, double value) {
        Array a(r, c);
        std::fill(a.v.begin(), a.v.end(), value);
        return a;
    }

    std::size_t size() const { return v.size(); }
    double* row(int i) { return v.data() + static_cast<std::size_t>(i) * cols; }
    const double* row(int i) const { return v.data() + static_cast<std::size_t>(i) * cols; }
    double& at(int i, int j) { return v[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return v[static_cast<std::size_t>(i) * cols + j]; }
    bool same_shape(const Array& o) const { return rows == o.rows && cols == o.cols; }
};

struct Parameter {
    std::string name;
    Array value;
    Array grad;  // same shape as value

    Parameter() = default;
    Parameter(std::string n, int r, int c) : name(std::move(n)), value(r, c), grad(r, c) {}
};

struct NodeRef {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Reverse-mode tape over the fixed primitive set used by the models.
// Forward values are computed eagerly as ops are recorded; backward()
// walks the recorded nodes in reverse. Parameter gradients accumulate
// into per-tape buffers (indexed by the caller's parameter numbering) so
// tapes on different threads never touch shared state; the owner adds
// them into Parameter::grad via flush_gradients in a fixed order.
//
// Index vectors passed to gather/segment ops are captured by reference
// and must outlive the tape's use of them.
class Tape {
public:
    // Sizes the parameter-gradient slots. Resets everything.
    void configure(std::size_t n_params);

    // Discards recorded nodes (keeps capacity and parameter gradients).
    void reset();

    void zero_param_grads();
    Array& param_grad(int index);
    const Array& param_grad(int index) const;

    // Adds this tape's parameter gradients into params[i]->grad.
    void flush_gradients(std::span<Parameter* const> params) const;

    const Array& value(NodeRef n) const;
    const Array& grad(NodeRef n) const;

    NodeRef constant(const Array& a);
    // Rows of a parameter table selected by index (embedding lookup).
    NodeRef embed_rows(const Parameter& table, int table_index, const std::vector<int>& rows);
    // y = x W^T (+ bias). W is [out, in]; bias may be null.
    NodeRef linear(NodeRef x, const Parameter& w, int w_index, const Parameter* b, int b_index);
    NodeRef add(NodeRef a, NodeRef b);
    NodeRef mul(NodeRef a, NodeRef b);
    NodeRef div(NodeRef a, NodeRef b);
    NodeRef add_scalar(NodeRef a, double c);
    NodeRef scale(NodeRef a, double c);
    NodeRef sigmoid(NodeRef a);
    NodeRef silu(NodeRef a);
    NodeRef softplus(NodeRef a);
    // Per-row standardization over the last dimension with eps 1e-5,
    // then the affine map gamma, beta.
    NodeRef layer_norm(NodeRef x, const Parameter& gamma, int g_index, const Parameter& beta,
                       int b_index);
    NodeRef gather_rows(NodeRef x, const std::vector<int>& idx);
    NodeRef segment_sum(NodeRef x, const std::vector<int>& seg, int n_segments);
    NodeRef segment_mean(NodeRef x, const std::vector<int>& seg, int n_segments);
    NodeRef concat_cols(NodeRef a, NodeRef b, NodeRef c);
    NodeRef sum_rows(NodeRef x);
    NodeRef sum_all(NodeRef x);
    // (mu, raw_sigma, raw_A) -> (mu, softplus(raw_sigma)+1e-3, softplus(raw_A))
    NodeRef peak_activation(NodeRef x);
    // Mean squared difference against a fixed target, scalar output.
    NodeRef mse_against(NodeRef x, const Array& target);

    // Seeds d(loss)/d(loss) = seed and accumulates gradients for every
    // recorded node and touched parameter. loss must be a 1x1 node from
    // this tape; throws std::invalid_argument otherwise.
    void backward(NodeRef loss, double seed = 1.0);

    std::size_t node_count() const { return used_; }

private:
    struct Node;
    Node& alloc(int rows, int cols);
    Node& node(NodeRef n);
    const Node& node(NodeRef n) const;
    void ensure_grad(Node& n);
    void accumulate_param(int index, const Array& shape_like, const double* g, std::size_t n,
                          std::size_t offset);

    std::vector<Node> nodes_;
    std::size_t used_ = 0;
    std::vector<Array> param_grads_;
    std::vector<bool> param_touched_;
};

double softplus_scalar(double x);
double sigmoid_scalar(double x);

}  // namespace alignnd
