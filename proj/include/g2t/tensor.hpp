#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "g2t/errors.hpp"
#include "g2t/rng.hpp"

namespace g2t {

using Shape = std::vector<std::size_t>;

class Tape;

// Dense f64 tensor participating in reverse-mode differentiation.
//
// A Tensor is a cheap handle to a shared node holding shape, row-major
// values and (after a backward pass) a same-shape gradient. Values are
// immutable once an op has produced them; the only sanctioned mutation is
// set_values(), used by the optimizer on leaf parameters between steps.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape);
    static Tensor ones(Shape shape);
    static Tensor full(Shape shape, double v);
    static Tensor scalar(double v);
    static Tensor from(Shape shape, std::vector<double> values);
    // Leaf with requires_grad set; the unit every optimizer step updates.
    static Tensor param(Shape shape, std::vector<double> values);
    static Tensor uniform(Shape shape, double lo, double hi, Rng& rng, bool requires_grad = false);

    bool defined() const { return n_ != nullptr; }
    const Shape& shape() const;
    std::size_t size() const;
    std::size_t rank() const;
    // Rank-2 helpers.
    std::size_t rows() const;
    std::size_t cols() const;

    const std::vector<double>& values() const;
    double value() const; // scalar tensors only
    double at(std::size_t i) const;
    double at(std::size_t r, std::size_t c) const;

    bool requires_grad() const;
    bool has_grad() const;
    const std::vector<double>& grad() const;
    // Tensor is a handle: these mutate the shared node, so they work through
    // const handles too.
    void ensure_zero_grad() const; // allocate an all-zero grad if none was set
    void scale_grad(double factor) const; // in-place; no-op without a gradient

    // Parameter update path (optimizer / loader). Never call on tensors that
    // are part of a live tape.
    void set_values(const std::vector<double>& v) const;

    // Stable identity for keying maps.
    const void* id() const;

    struct Node;
    const std::shared_ptr<Node>& node() const { return n_; }

private:
    explicit Tensor(std::shared_ptr<Node> n) : n_(std::move(n)) {}
    std::shared_ptr<Node> n_;

    friend class Tape;
    friend struct OpAccess;
};

// A tensor with a stable registry name; the unit optimizers, checkpoints and
// gradient checks traffic in.
struct NamedTensor {
    std::string name;
    Tensor tensor;
};

// Ordered record of executed operations. Ops append themselves while a
// TapeScope is active; backward() replays the record in reverse. The record
// is topologically ordered by construction (an op runs after its inputs
// exist) and is single-use: a second backward() without a fresh tape is an
// error.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    void backward(const Tensor& loss);
    std::size_t size() const { return records_.size(); }
    bool consumed() const { return consumed_; }

private:
    std::vector<std::function<void()>> records_;
    bool consumed_ = false;

    friend struct OpAccess;
};

// RAII activation of a tape for the current thread. Ops record onto the
// innermost active tape; with no active tape they run forward-only.
class TapeScope {
public:
    explicit TapeScope(Tape& tape);
    ~TapeScope();
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

private:
    Tape* prev_;
};

Tape* active_tape();

// ---- elementwise ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor scale(const Tensor& a, double c);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);

// ---- reductions / vector ops ----
Tensor softmax(const Tensor& v);     // rank-1, max-subtracted
Tensor log_softmax(const Tensor& v); // rank-1, stable
Tensor sum(const Tensor& a);         // -> scalar
Tensor pick(const Tensor& v, std::size_t index); // -> scalar
Tensor max_pool_rows(const Tensor& m);           // [n,d] -> [d], column max

// ---- linear algebra ----
Tensor matmul(const Tensor& a, const Tensor& b); // [m,k]x[k,n] -> [m,n]
Tensor matvec(const Tensor& m, const Tensor& v); // [r,c]x[c]   -> [r]
Tensor vecmat(const Tensor& v, const Tensor& m); // [r]x[r,c]   -> [c]
Tensor add_bias_rows(const Tensor& m, const Tensor& b); // m[i,:] + b

// ---- structure ----
Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor slice(const Tensor& v, std::size_t offset, std::size_t len); // rank-1
Tensor row_of(const Tensor& m, std::size_t r);                      // [n,d] -> [d]
Tensor gather_rows(const Tensor& m, const std::vector<int>& ids);   // -> [|ids|,d]
Tensor stack_rows(const std::vector<Tensor>& rows);                 // [d] each -> [n,d]
// out[v,:] = mean of m rows listed in adj[v]; zero row when adj[v] is empty.
Tensor adjacency_mean(const Tensor& m, const std::vector<std::vector<int>>& adj);

// Inverted dropout: multiplies by mask/keep_prob, identity when keep_prob==1.
// The mask is drawn from rng and is a constant w.r.t. differentiation.
Tensor dropout(const Tensor& a, double keep_prob, Rng& rng);

// ---- LSTM cell ----
// Fused gate layout along the first axis of Wx/Wh/b: input, forget,
// candidate, output.
struct LstmParams {
    Tensor Wx; // [4H, D]
    Tensor Wh; // [4H, H]
    Tensor b;  // [4H]
};

struct LstmState {
    Tensor h;
    Tensor c;
};

LstmState lstm_cell(const Tensor& x, const LstmState& state, const LstmParams& p);

std::string shape_str(const Shape& s);

} // namespace g2t
