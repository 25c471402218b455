#include "alignnd/tape.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "alignnd/kernels.hpp"

namespace alignnd {

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kSigmaFloor = 1e-3;

enum class Op {
    Constant,
    EmbedRows,
    Linear,
    Add,
    Mul,
    Div,
    AddScalar,
    Scale,
    Sigmoid,
    SiLU,
    Softplus,
    LayerNorm,
    GatherRows,
    SegmentSum,
    SegmentMean,
    ConcatCols,
    SumRows,
    SumAll,
    PeakActivation,
    MseAgainst,
};

void resize_array(Array& a, int rows, int cols) {
    a.rows = rows;
    a.cols = cols;
    a.v.resize(static_cast<std::size_t>(rows) * cols);
}

}  // namespace

double sigmoid_scalar(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus_scalar(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

struct Tape::Node {
    Op op = Op::Constant;
    Array value;
    Array grad;
    bool has_grad = false;
    int in0 = -1, in1 = -1, in2 = -1;
    const Parameter* p0 = nullptr;
    int p0_idx = -1;
    const Parameter* p1 = nullptr;
    int p1_idx = -1;
    const std::vector<int>* idx = nullptr;
    int segments = 0;
    double c = 0.0;
    Array aux;
};

void Tape::configure(std::size_t n_params) {
    used_ = 0;
    param_grads_.assign(n_params, Array{});
    param_touched_.assign(n_params, false);
}

void Tape::reset() { used_ = 0; }

void Tape::zero_param_grads() {
    for (std::size_t i = 0; i < param_grads_.size(); ++i) {
        std::fill(param_grads_[i].v.begin(), param_grads_[i].v.end(), 0.0);
        param_touched_[i] = false;
    }
}

Array& Tape::param_grad(int index) { return param_grads_.at(static_cast<std::size_t>(index)); }
const Array& Tape::param_grad(int index) const {
    return param_grads_.at(static_cast<std::size_t>(index));
}

void Tape::flush_gradients(std::span<Parameter* const> params) const {
    if (params.size() != param_grads_.size()) {
        throw std::invalid_argument("flush_gradients: parameter count mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!param_touched_[i]) continue;
        kernels::acc(param_grads_[i].v.data(), params[i]->grad.v.data(), param_grads_[i].size());
    }
}

Tape::Node& Tape::alloc(int rows, int cols) {
    if (used_ == nodes_.size()) nodes_.emplace_back();
    Node& n = nodes_[used_++];
    n.op = Op::Constant;
    n.has_grad = false;
    n.in0 = n.in1 = n.in2 = -1;
    n.p0 = n.p1 = nullptr;
    n.p0_idx = n.p1_idx = -1;
    n.idx = nullptr;
    n.segments = 0;
    n.c = 0.0;
    resize_array(n.value, rows, cols);
    return n;
}

Tape::Node& Tape::node(NodeRef r) {
    if (!r.valid() || static_cast<std::size_t>(r.id) >= used_) {
        throw std::invalid_argument("tape: invalid node reference");
    }
    return nodes_[static_cast<std::size_t>(r.id)];
}

const Tape::Node& Tape::node(NodeRef r) const {
    if (!r.valid() || static_cast<std::size_t>(r.id) >= used_) {
        throw std::invalid_argument("tape: invalid node reference");
    }
    return nodes_[static_cast<std::size_t>(r.id)];
}

const Array& Tape::value(NodeRef n) const { return node(n).value; }
const Array& Tape::grad(NodeRef n) const { return node(n).grad; }

void Tape::ensure_grad(Node& n) {
    if (n.has_grad) return;
    resize_array(n.grad, n.value.rows, n.value.cols);
    std::fill(n.grad.v.begin(), n.grad.v.end(), 0.0);
    n.has_grad = true;
}

void Tape::accumulate_param(int index, const Array& shape_like, const double* g, std::size_t n,
                            std::size_t offset) {
    Array& pg = param_grads_.at(static_cast<std::size_t>(index));
    if (pg.size() == 0) {
        resize_array(pg, shape_like.rows, shape_like.cols);
        std::fill(pg.v.begin(), pg.v.end(), 0.0);
    }
    param_touched_[static_cast<std::size_t>(index)] = true;
    kernels::acc(g, pg.v.data() + offset, n);
}

NodeRef Tape::constant(const Array& a) {
    Node& n = alloc(a.rows, a.cols);
    n.op = Op::Constant;
    std::copy(a.v.begin(), a.v.end(), n.value.v.begin());
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::embed_rows(const Parameter& table, int table_index, const std::vector<int>& rows) {
    Node& n = alloc(static_cast<int>(rows.size()), table.value.cols);
    n.op = Op::EmbedRows;
    n.p0 = &table;
    n.p0_idx = table_index;
    n.idx = &rows;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::memcpy(n.value.row(static_cast<int>(r)), table.value.row(rows[r]),
                    sizeof(double) * static_cast<std::size_t>(table.value.cols));
    }
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::linear(NodeRef x, const Parameter& w, int w_index, const Parameter* b, int b_index) {
    const Node& xn = node(x);
    const int in = w.value.cols;
    const int out = w.value.rows;
    if (xn.value.cols != in) throw std::invalid_argument("linear: inner dimension mismatch");
    if (b && (b->value.rows != 1 || b->value.cols != out)) {
        throw std::invalid_argument("linear: bias shape mismatch");
    }
    Node& n = alloc(xn.value.rows, out);
    n.op = Op::Linear;
    n.in0 = x.id;
    n.p0 = &w;
    n.p0_idx = w_index;
    n.p1 = b;
    n.p1_idx = b_index;
    for (int r = 0; r < xn.value.rows; ++r) {
        kernels::gemv(w.value.v.data(), static_cast<std::size_t>(out),
                      static_cast<std::size_t>(in), xn.value.row(r), n.value.row(r));
        if (b) kernels::acc(b->value.v.data(), n.value.row(r), static_cast<std::size_t>(out));
    }
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::add(NodeRef a, NodeRef b) {
    const Node& an = node(a);
    const Node& bn = node(b);
    if (!an.value.same_shape(bn.value)) throw std::invalid_argument("add: shape mismatch");
    Node& n = alloc(an.value.rows, an.value.cols);
    n.op = Op::Add;
    n.in0 = a.id;
    n.in1 = b.id;
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value.v[i] = an.value.v[i] + bn.value.v[i];
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::mul(NodeRef a, NodeRef b) {
    const Node& an = node(a);
    const Node& bn = node(b);
    if (!an.value.same_shape(bn.value)) throw std::invalid_argument("mul: shape mismatch");
    Node& n = alloc(an.value.rows, an.value.cols);
    n.op = Op::Mul;
    n.in0 = a.id;
    n.in1 = b.id;
    kernels::hadamard(an.value.v.data(), bn.value.v.data(), n.value.v.data(), n.value.size());
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::div(NodeRef a, NodeRef b) {
    const Node& an = node(a);
    const Node& bn = node(b);
    if (!an.value.same_shape(bn.value)) throw std::invalid_argument("div: shape mismatch");
    Node& n = alloc(an.value.rows, an.value.cols);
    n.op = Op::Div;
    n.in0 = a.id;
    n.in1 = b.id;
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value.v[i] = an.value.v[i] / bn.value.v[i];
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::add_scalar(NodeRef a, double c) {
    const Node& an = node(a);
    Node& n = alloc(an.value.rows, an.value.cols);
    n.op = Op::AddScalar;
    n.in0 = a.id;
    n.c = c;
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value.v[i] = an.value.v[i] + c;
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::scale(NodeRef a, double c) {
    const Node& an = node(a);
    Node& n = alloc(an.value.rows, an.value.cols);
    n.op = Op::Scale;
    n.in0 = a.id;
    n.c = c;
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value.v[i] = an.value.v[i] * c;
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::sigmoid(NodeRef a) {
    const Node& an = node(a);
    Node& n = alloc(an.value.rows, an.value.cols);
    n.op = Op::Sigmoid;
    n.in0 = a.id;
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value.v[i] = sigmoid_scalar(an.value.v[i]);
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::silu(NodeRef a) {
    const Node& an = node(a);
    Node& n = alloc(an.value.rows, an.value.cols);
    n.op = Op::SiLU;
    n.in0 = a.id;
    resize_array(n.aux, an.value.rows, an.value.cols);
    for (std::size_t i = 0; i < n.value.size(); ++i) {
        const double s = sigmoid_scalar(an.value.v[i]);
        n.aux.v[i] = s;
        n.value.v[i] = an.value.v[i] * s;
    }
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::softplus(NodeRef a) {
    const Node& an = node(a);
    Node& n = alloc(an.value.rows, an.value.cols);
    n.op = Op::Softplus;
    n.in0 = a.id;
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value.v[i] = softplus_scalar(an.value.v[i]);
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::layer_norm(NodeRef x, const Parameter& gamma, int g_index, const Parameter& beta,
                         int b_index) {
    const Node& xn = node(x);
    const int d = xn.value.cols;
    if (d < 2) throw std::invalid_argument("layer_norm: needs at least 2 columns");
    if (gamma.value.cols != d || beta.value.cols != d) {
        throw std::invalid_argument("layer_norm: affine shape mismatch");
    }
    Node& n = alloc(xn.value.rows, d);
    n.op = Op::LayerNorm;
    n.in0 = x.id;
    n.p0 = &gamma;
    n.p0_idx = g_index;
    n.p1 = &beta;
    n.p1_idx = b_index;
    // aux row = [normalized values (d), inv_std (1)]
    resize_array(n.aux, xn.value.rows, d + 1);
    for (int r = 0; r < xn.value.rows; ++r) {
        double mean, var;
        kernels::mean_var(xn.value.row(r), static_cast<std::size_t>(d), &mean, &var);
        const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
        double* y = n.value.row(r);
        double* a = n.aux.row(r);
        const double* xr = xn.value.row(r);
        for (int c = 0; c < d; ++c) {
            const double yh = (xr[c] - mean) * inv;
            a[c] = yh;
            y[c] = gamma.value.v[c] * yh + beta.value.v[c];
        }
        a[d] = inv;
    }
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::gather_rows(NodeRef x, const std::vector<int>& idx) {
    const Node& xn = node(x);
    Node& n = alloc(static_cast<int>(idx.size()), xn.value.cols);
    n.op = Op::GatherRows;
    n.in0 = x.id;
    n.idx = &idx;
    for (std::size_t r = 0; r < idx.size(); ++r) {
        std::memcpy(n.value.row(static_cast<int>(r)), xn.value.row(idx[r]),
                    sizeof(double) * static_cast<std::size_t>(xn.value.cols));
    }
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::segment_sum(NodeRef x, const std::vector<int>& seg, int n_segments) {
    const Node& xn = node(x);
    if (seg.size() != static_cast<std::size_t>(xn.value.rows)) {
        throw std::invalid_argument("segment_sum: index count mismatch");
    }
    Node& n = alloc(n_segments, xn.value.cols);
    n.op = Op::SegmentSum;
    n.in0 = x.id;
    n.idx = &seg;
    n.segments = n_segments;
    std::fill(n.value.v.begin(), n.value.v.end(), 0.0);
    for (std::size_t r = 0; r < seg.size(); ++r) {
        kernels::acc(xn.value.row(static_cast<int>(r)), n.value.row(seg[r]),
                     static_cast<std::size_t>(xn.value.cols));
    }
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::segment_mean(NodeRef x, const std::vector<int>& seg, int n_segments) {
    const Node& xn = node(x);
    if (seg.size() != static_cast<std::size_t>(xn.value.rows)) {
        throw std::invalid_argument("segment_mean: index count mismatch");
    }
    Node& n = alloc(n_segments, xn.value.cols);
    n.op = Op::SegmentMean;
    n.in0 = x.id;
    n.idx = &seg;
    n.segments = n_segments;
    resize_array(n.aux, 1, n_segments);
    std::fill(n.aux.v.begin(), n.aux.v.end(), 0.0);
    std::fill(n.value.v.begin(), n.value.v.end(), 0.0);
    for (std::size_t r = 0; r < seg.size(); ++r) {
        kernels::acc(xn.value.row(static_cast<int>(r)), n.value.row(seg[r]),
                     static_cast<std::size_t>(xn.value.cols));
        n.aux.v[static_cast<std::size_t>(seg[r])] += 1.0;
    }
    for (int s = 0; s < n_segments; ++s) {
        if (n.aux.v[static_cast<std::size_t>(s)] > 0.0) {
            kernels::scale(1.0 / n.aux.v[static_cast<std::size_t>(s)], n.value.row(s),
                           static_cast<std::size_t>(xn.value.cols));
        }
    }
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::concat_cols(NodeRef a, NodeRef b, NodeRef c) {
    const Node& an = node(a);
    const Node& bn = node(b);
    const Node& cn = node(c);
    if (an.value.rows != bn.value.rows || an.value.rows != cn.value.rows) {
        throw std::invalid_argument("concat_cols: row count mismatch");
    }
    const int d0 = an.value.cols, d1 = bn.value.cols, d2 = cn.value.cols;
    Node& n = alloc(an.value.rows, d0 + d1 + d2);
    n.op = Op::ConcatCols;
    n.in0 = a.id;
    n.in1 = b.id;
    n.in2 = c.id;
    for (int r = 0; r < an.value.rows; ++r) {
        double* out = n.value.row(r);
        std::memcpy(out, an.value.row(r), sizeof(double) * static_cast<std::size_t>(d0));
        std::memcpy(out + d0, bn.value.row(r), sizeof(double) * static_cast<std::size_t>(d1));
        std::memcpy(out + d0 + d1, cn.value.row(r), sizeof(double) * static_cast<std::size_t>(d2));
    }
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::sum_rows(NodeRef x) {
    const Node& xn = node(x);
    Node& n = alloc(1, xn.value.cols);
    n.op = Op::SumRows;
    n.in0 = x.id;
    std::fill(n.value.v.begin(), n.value.v.end(), 0.0);
    for (int r = 0; r < xn.value.rows; ++r) {
        kernels::acc(xn.value.row(r), n.value.v.data(), static_cast<std::size_t>(xn.value.cols));
    }
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::sum_all(NodeRef x) {
    const Node& xn = node(x);
    Node& n = alloc(1, 1);
    n.op = Op::SumAll;
    n.in0 = x.id;
    n.value.v[0] = kernels::sum(xn.value.v.data(), xn.value.size());
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::peak_activation(NodeRef x) {
    const Node& xn = node(x);
    if (xn.value.rows != 1 || xn.value.cols != 3) {
        throw std::invalid_argument("peak_activation: expects a 1x3 input");
    }
    Node& n = alloc(1, 3);
    n.op = Op::PeakActivation;
    n.in0 = x.id;
    n.value.v[0] = xn.value.v[0];
    n.value.v[1] = softplus_scalar(xn.value.v[1]) + kSigmaFloor;
    n.value.v[2] = softplus_scalar(xn.value.v[2]);
    return {static_cast<int>(used_ - 1)};
}

NodeRef Tape::mse_against(NodeRef x, const Array& target) {
    const Node& xn = node(x);
    if (!xn.value.same_shape(target)) throw std::invalid_argument("mse_against: shape mismatch");
    Node& n = alloc(1, 1);
    n.op = Op::MseAgainst;
    n.in0 = x.id;
    resize_array(n.aux, target.rows, target.cols);
    std::copy(target.v.begin(), target.v.end(), n.aux.v.begin());
    double s = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double d = xn.value.v[i] - target.v[i];
        s += d * d;
    }
    n.value.v[0] = s / static_cast<double>(target.size());
    return {static_cast<int>(used_ - 1)};
}

void Tape::backward(NodeRef loss, double seed) {
    Node& ln = node(loss);
    if (ln.value.rows != 1 || ln.value.cols != 1) {
        throw std::invalid_argument("backward: loss must be a scalar node");
    }
    for (std::size_t i = 0; i < used_; ++i) nodes_[i].has_grad = false;
    ensure_grad(ln);
    ln.grad.v[0] = seed;

    for (std::size_t pos = static_cast<std::size_t>(loss.id) + 1; pos-- > 0;) {
        Node& n = nodes_[pos];
        if (!n.has_grad) continue;
        const std::size_t count = n.value.size();
        switch (n.op) {
            case Op::Constant:
                break;
            case Op::EmbedRows: {
                const auto& rows = *n.idx;
                const int d = n.value.cols;
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    accumulate_param(n.p0_idx, n.p0->value, n.grad.row(static_cast<int>(r)),
                                     static_cast<std::size_t>(d),
                                     static_cast<std::size_t>(rows[r]) * d);
                }
                break;
            }
            case Op::Linear: {
                Node& xn = nodes_[static_cast<std::size_t>(n.in0)];
                ensure_grad(xn);
                const int in = n.p0->value.cols;
                const int out = n.p0->value.rows;
                // dW and db accumulate into a dense local buffer first to
                // keep the parameter-slot updates contiguous.
                Array& wg = param_grads_.at(static_cast<std::size_t>(n.p0_idx));
                if (wg.size() == 0) {
                    resize_array(wg, n.p0->value.rows, n.p0->value.cols);
                    std::fill(wg.v.begin(), wg.v.end(), 0.0);
                }
                param_touched_[static_cast<std::size_t>(n.p0_idx)] = true;
                for (int r = 0; r < n.value.rows; ++r) {
                    const double* gr = n.grad.row(r);
                    kernels::gemv_t_acc(n.p0->value.v.data(), static_cast<std::size_t>(out),
                                        static_cast<std::size_t>(in), gr, xn.grad.row(r));
                    kernels::ger_acc(wg.v.data(), static_cast<std::size_t>(out),
                                     static_cast<std::size_t>(in), gr, xn.value.row(r));
                    if (n.p1) {
                        accumulate_param(n.p1_idx, n.p1->value, gr,
                                         static_cast<std::size_t>(out), 0);
                    }
                }
                break;
            }
            case Op::Add: {
                Node& an = nodes_[static_cast<std::size_t>(n.in0)];
                Node& bn = nodes_[static_cast<std::size_t>(n.in1)];
                ensure_grad(an);
                ensure_grad(bn);
                kernels::acc(n.grad.v.data(), an.grad.v.data(), count);
                kernels::acc(n.grad.v.data(), bn.grad.v.data(), count);
                break;
            }
            case Op::Mul: {
                Node& an = nodes_[static_cast<std::size_t>(n.in0)];
                Node& bn = nodes_[static_cast<std::size_t>(n.in1)];
                ensure_grad(an);
                ensure_grad(bn);
                kernels::hadamard_acc(n.grad.v.data(), bn.value.v.data(), an.grad.v.data(), count);
                kernels::hadamard_acc(n.grad.v.data(), an.value.v.data(), bn.grad.v.data(), count);
                break;
            }
            case Op::Div: {
                Node& an = nodes_[static_cast<std::size_t>(n.in0)];
                Node& bn = nodes_[static_cast<std::size_t>(n.in1)];
                ensure_grad(an);
                ensure_grad(bn);
                for (std::size_t i = 0; i < count; ++i) {
                    const double inv_b = 1.0 / bn.value.v[i];
                    an.grad.v[i] += n.grad.v[i] * inv_b;
                    bn.grad.v[i] -= n.grad.v[i] * n.value.v[i] * inv_b;
                }
                break;
            }
            case Op::AddScalar: {
                Node& an = nodes_[static_cast<std::size_t>(n.in0)];
                ensure_grad(an);
                kernels::acc(n.grad.v.data(), an.grad.v.data(), count);
                break;
            }
            case Op::Scale: {
                Node& an = nodes_[static_cast<std::size_t>(n.in0)];
                ensure_grad(an);
                kernels::axpy(n.c, n.grad.v.data(), an.grad.v.data(), count);
                break;
            }
            case Op::Sigmoid: {
                Node& an = nodes_[static_cast<std::size_t>(n.in0)];
                ensure_grad(an);
                for (std::size_t i = 0; i < count; ++i) {
                    const double s = n.value.v[i];
                    an.grad.v[i] += n.grad.v[i] * s * (1.0 - s);
                }
                break;
            }
            case Op::SiLU: {
                Node& an = nodes_[static_cast<std::size_t>(n.in0)];
                ensure_grad(an);
                for (std::size_t i = 0; i < count; ++i) {
                    const double s = n.aux.v[i];
                    const double x = an.value.v[i];
                    an.grad.v[i] += n.grad.v[i] * (s + x * s * (1.0 - s));
                }
                break;
            }
            case Op::Softplus: {
                Node& an = nodes_[static_cast<std::size_t>(n.in0)];
                ensure_grad(an);
                for (std::size_t i = 0; i < count; ++i) {
                    an.grad.v[i] += n.grad.v[i] * sigmoid_scalar(an.value.v[i]);
                }
                break;
            }
            case Op::LayerNorm: {
                Node& xn = nodes_[static_cast<std::size_t>(n.in0)];
                ensure_grad(xn);
                const int d = n.value.cols;
                for (int r = 0; r < n.value.rows; ++r) {
                    const double* gy = n.grad.row(r);
                    const double* a = n.aux.row(r);
                    const double inv = a[d];
                    double* gx = xn.grad.row(r);
                    double sum_gh = 0.0, sum_ghy = 0.0;
                    for (int c = 0; c < d; ++c) {
                        const double gh = gy[c] * n.p0->value.v[c];
                        sum_gh += gh;
                        sum_ghy += gh * a[c];
                    }
                    const double mean_gh = sum_gh / d;
                    const double mean_ghy = sum_ghy / d;
                    for (int c = 0; c < d; ++c) {
                        const double gh = gy[c] * n.p0->value.v[c];
                        gx[c] += inv * (gh - mean_gh - a[c] * mean_ghy);
                    }
                    // dgamma = gy .* yhat ; dbeta = gy
                    Array& gg = param_grads_.at(static_cast<std::size_t>(n.p0_idx));
                    if (gg.size() == 0) {
                        resize_array(gg, n.p0->value.rows, n.p0->value.cols);
                        std::fill(gg.v.begin(), gg.v.end(), 0.0);
                    }
                    param_touched_[static_cast<std::size_t>(n.p0_idx)] = true;
                    kernels::hadamard_acc(gy, a, gg.v.data(), static_cast<std::size_t>(d));
                    accumulate_param(n.p1_idx, n.p1->value, gy, static_cast<std::size_t>(d), 0);
                }
                break;
            }
            case Op::GatherRows: {
                Node& xn = nodes_[static_cast<std::size_t>(n.in0)];
                ensure_grad(xn);
                const auto& idx = *n.idx;
                for (std::size_t r = 0; r < idx.size(); ++r) {
                    kernels::acc(n.grad.row(static_cast<int>(r)), xn.grad.row(idx[r]),
                                 static_cast<std::size_t>(n.value.cols));
                }
                break;
            }
            case Op::SegmentSum: {
                Node& xn = nodes_[static_cast<std::size_t>(n.in0)];
                ensure_grad(xn);
                const auto& seg = *n.idx;
                for (std::size_t r = 0; r < seg.size(); ++r) {
                    kernels::acc(n.grad.row(seg[r]), xn.grad.row(static_cast<int>(r)),
                                 static_cast<std::size_t>(n.value.cols));
                }
                break;
            }
            case Op::SegmentMean: {
                Node& xn = nodes_[static_cast<std::size_t>(n.in0)];
                ensure_grad(xn);
                const auto& seg = *n.idx;
                for (std::size_t r = 0; r < seg.size(); ++r) {
                    const double inv = 1.0 / n.aux.v[static_cast<std::size_t>(seg[r])];
                    kernels::axpy(inv, n.grad.row(seg[r]), xn.grad.row(static_cast<int>(r)),
                                  static_cast<std::size_t>(n.value.cols));
                }
                break;
            }
            case Op::ConcatCols: {
                Node& an = nodes_[static_cast<std::size_t>(n.in0)];
                Node& bn = nodes_[static_cast<std::size_t>(n.in1)];
                Node& cn = nodes_[static_cast<std::size_t>(n.in2)];
                ensure_grad(an);
                ensure_grad(bn);
                ensure_grad(cn);
                const int d0 = an.value.cols, d1 = bn.value.cols, d2 = cn.value.cols;
                for (int r = 0; r < n.value.rows; ++r) {
                    const double* g = n.grad.row(r);
                    kernels::acc(g, an.grad.row(r), static_cast<std::size_t>(d0));
                    kernels::acc(g + d0, bn.grad.row(r), static_cast<std::size_t>(d1));
                    kernels::acc(g + d0 + d1, cn.grad.row(r), static_cast<std::size_t>(d2));
                }
                break;
            }
            case Op::SumRows: {
                Node& xn = nodes_[static_cast<std::size_t>(n.in0)];
                ensure_grad(xn);
                for (int r = 0; r < xn.value.rows; ++r) {
                    kernels::acc(n.grad.v.data(), xn.grad.row(r),
                                 static_cast<std::size_t>(n.value.cols));
                }
                break;
            }
            case Op::SumAll: {
                Node& xn = nodes_[static_cast<std::size_t>(n.in0)];
                ensure_grad(xn);
                const double g = n.grad.v[0];
                for (std::size_t i = 0; i < xn.grad.size(); ++i) xn.grad.v[i] += g;
                break;
            }
            case Op::PeakActivation: {
                Node& xn = nodes_[static_cast<std::size_t>(n.in0)];
                ensure_grad(xn);
                xn.grad.v[0] += n.grad.v[0];
                xn.grad.v[1] += n.grad.v[1] * sigmoid_scalar(xn.value.v[1]);
                xn.grad.v[2] += n.grad.v[2] * sigmoid_scalar(xn.value.v[2]);
                break;
            }
            case Op::MseAgainst: {
                Node& xn = nodes_[static_cast<std::size_t>(n.in0)];
                ensure_grad(xn);
                const double g = n.grad.v[0] * 2.0 / static_cast<double>(n.aux.size());
                for (std::size_t i = 0; i < n.aux.size(); ++i) {
                    xn.grad.v[i] += g * (xn.value.v[i] - n.aux.v[i]);
                }
                break;
            }
        }
    }
}

}  // namespace alignnd
