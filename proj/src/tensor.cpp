#include "g2t/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace g2t {

struct Tensor::Node {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad; // empty until first accumulation
    bool requires_grad = false;

    std::size_t size() const { return values.size(); }
    std::vector<double>& grad_buf() {
        if (grad.empty()) grad.assign(values.size(), 0.0);
        return grad;
    }
};

namespace {

using Node = Tensor::Node;
using NodePtr = std::shared_ptr<Node>;

thread_local Tape* g_active_tape = nullptr;

std::size_t shape_size(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

} // namespace

struct OpAccess {
    static Tensor wrap(NodePtr n) { return Tensor(std::move(n)); }
    static const NodePtr& node(const Tensor& t) {
        if (!t.defined()) throw ContractError("operation on default-constructed tensor");
        return t.n_;
    }
    static void record(std::function<void()> fn) {
        if (g_active_tape != nullptr) g_active_tape->records_.push_back(std::move(fn));
    }
};

namespace {

NodePtr make_node(Shape shape, std::vector<double> values, bool requires_grad) {
    std::size_t want = shape_size(shape);
    if (values.size() != want) {
        throw DimError("tensor init: " + std::to_string(values.size()) + " values for shape " +
                       shape_str(shape));
    }
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->values = std::move(values);
    n->requires_grad = requires_grad;
    return n;
}

Tensor result(Shape shape, std::vector<double> values, bool requires_grad) {
    return OpAccess::wrap(make_node(std::move(shape), std::move(values), requires_grad));
}

bool tracked(const NodePtr& n) { return n->requires_grad; }

// Record a backward closure when differentiation can reach the output.
void maybe_record(const NodePtr& out, std::function<void()> fn) {
    if (out->requires_grad) OpAccess::record(std::move(fn));
}

void check_rank(const char* op, const NodePtr& n, std::size_t rank) {
    if (n->shape.size() != rank) {
        throw DimError(std::string(op) + ": expected rank-" + std::to_string(rank) +
                       " tensor, got shape " + shape_str(n->shape));
    }
}

void check_same_shape(const char* op, const NodePtr& a, const NodePtr& b) {
    if (a->shape != b->shape) {
        throw DimError(std::string(op) + ": shape mismatch " + shape_str(a->shape) + " vs " +
                       shape_str(b->shape));
    }
}

} // namespace

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ", ";
        os << s[i];
    }
    os << ']';
    return os.str();
}

// ---- Tensor ----

Tensor Tensor::zeros(Shape shape) {
    std::size_t n = shape_size(shape);
    return result(std::move(shape), std::vector<double>(n, 0.0), false);
}

Tensor Tensor::ones(Shape shape) {
    std::size_t n = shape_size(shape);
    return result(std::move(shape), std::vector<double>(n, 1.0), false);
}

Tensor Tensor::full(Shape shape, double v) {
    std::size_t n = shape_size(shape);
    return result(std::move(shape), std::vector<double>(n, v), false);
}

Tensor Tensor::scalar(double v) { return result({}, {v}, false); }

Tensor Tensor::from(Shape shape, std::vector<double> values) {
    return result(std::move(shape), std::move(values), false);
}

Tensor Tensor::param(Shape shape, std::vector<double> values) {
    return result(std::move(shape), std::move(values), true);
}

Tensor Tensor::uniform(Shape shape, double lo, double hi, Rng& rng, bool requires_grad) {
    std::size_t n = shape_size(shape);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
    return result(std::move(shape), std::move(v), requires_grad);
}

const Shape& Tensor::shape() const { return OpAccess::node(*this)->shape; }
std::size_t Tensor::size() const { return OpAccess::node(*this)->size(); }
std::size_t Tensor::rank() const { return OpAccess::node(*this)->shape.size(); }

std::size_t Tensor::rows() const {
    const auto& n = OpAccess::node(*this);
    check_rank("rows", n, 2);
    return n->shape[0];
}

std::size_t Tensor::cols() const {
    const auto& n = OpAccess::node(*this);
    check_rank("cols", n, 2);
    return n->shape[1];
}

const std::vector<double>& Tensor::values() const { return OpAccess::node(*this)->values; }

double Tensor::value() const {
    const auto& n = OpAccess::node(*this);
    if (n->size() != 1) {
        throw ContractError("value(): tensor of shape " + shape_str(n->shape) + " is not scalar");
    }
    return n->values[0];
}

double Tensor::at(std::size_t i) const {
    const auto& n = OpAccess::node(*this);
    if (i >= n->size()) throw ContractError("at(): index out of range");
    return n->values[i];
}

double Tensor::at(std::size_t r, std::size_t c) const {
    const auto& n = OpAccess::node(*this);
    check_rank("at", n, 2);
    if (r >= n->shape[0] || c >= n->shape[1]) throw ContractError("at(): index out of range");
    return n->values[r * n->shape[1] + c];
}

bool Tensor::requires_grad() const { return OpAccess::node(*this)->requires_grad; }
bool Tensor::has_grad() const { return !OpAccess::node(*this)->grad.empty(); }

const std::vector<double>& Tensor::grad() const {
    const auto& n = OpAccess::node(*this);
    if (n->grad.empty()) {
        throw ContractError("grad(): no gradient has been accumulated for this tensor");
    }
    return n->grad;
}

void Tensor::ensure_zero_grad() const {
    const auto& n = OpAccess::node(*this);
    n->grad.assign(n->values.size(), 0.0);
}

void Tensor::set_values(const std::vector<double>& v) const {
    const auto& n = OpAccess::node(*this);
    if (v.size() != n->values.size()) {
        throw DimError("set_values: " + std::to_string(v.size()) + " values for shape " +
                       shape_str(n->shape));
    }
    n->values = v;
    n->grad.clear();
}

void Tensor::scale_grad(double factor) const {
    const auto& n = OpAccess::node(*this);
    for (double& g : n->grad) g *= factor;
}

const void* Tensor::id() const { return OpAccess::node(*this).get(); }

// ---- Tape ----

void Tape::backward(const Tensor& loss) {
    if (consumed_) throw ContractError("backward: tape already consumed");
    const auto& n = OpAccess::node(loss);
    if (n->size() != 1) {
        throw ContractError("backward: loss must be scalar, got shape " + shape_str(n->shape));
    }
    consumed_ = true;
    n->grad_buf()[0] += 1.0;
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) (*it)();
}

TapeScope::TapeScope(Tape& tape) : prev_(g_active_tape) {
    if (tape.consumed()) throw ContractError("TapeScope: tape already consumed");
    g_active_tape = &tape;
}

TapeScope::~TapeScope() { g_active_tape = prev_; }

Tape* active_tape() { return g_active_tape; }

// ---- elementwise ----

namespace {

Tensor elementwise_binary(const char* name, const Tensor& ta, const Tensor& tb,
                          double (*fwd)(double, double),
                          void (*bwd)(double a, double b, double g, double& da, double& db)) {
    const auto& a = OpAccess::node(ta);
    const auto& b = OpAccess::node(tb);
    check_same_shape(name, a, b);
    std::size_t n = a->size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = fwd(a->values[i], b->values[i]);
    Tensor tout = result(a->shape, std::move(out), tracked(a) || tracked(b));
    auto o = OpAccess::node(tout);
    maybe_record(o, [a, b, o, bwd]() {
        const auto& g = o->grad_buf();
        double dumpa = 0.0, dumpb = 0.0;
        double* da = tracked(a) ? a->grad_buf().data() : nullptr;
        double* db = tracked(b) ? b->grad_buf().data() : nullptr;
        for (std::size_t i = 0; i < g.size(); ++i) {
            bwd(a->values[i], b->values[i], g[i], da ? da[i] : dumpa, db ? db[i] : dumpb);
        }
    });
    return tout;
}

Tensor elementwise_unary(const Tensor& ta, double (*fwd)(double),
                         double (*dydx_from_y)(double y, double x)) {
    const auto& a = OpAccess::node(ta);
    std::size_t n = a->size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = fwd(a->values[i]);
    Tensor tout = result(a->shape, std::move(out), tracked(a));
    auto o = OpAccess::node(tout);
    maybe_record(o, [a, o, dydx_from_y]() {
        const auto& g = o->grad_buf();
        auto& da = a->grad_buf();
        for (std::size_t i = 0; i < g.size(); ++i) {
            da[i] += g[i] * dydx_from_y(o->values[i], a->values[i]);
        }
    });
    return tout;
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return elementwise_binary(
        "add", a, b, [](double x, double y) { return x + y; },
        [](double, double, double g, double& da, double& db) {
            da += g;
            db += g;
        });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return elementwise_binary(
        "sub", a, b, [](double x, double y) { return x - y; },
        [](double, double, double g, double& da, double& db) {
            da += g;
            db -= g;
        });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return elementwise_binary(
        "mul", a, b, [](double x, double y) { return x * y; },
        [](double x, double y, double g, double& da, double& db) {
            da += g * y;
            db += g * x;
        });
}

Tensor neg(const Tensor& a) {
    return elementwise_unary(
        a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Tensor scale(const Tensor& ta, double c) {
    const auto& a = OpAccess::node(ta);
    std::size_t n = a->size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = c * a->values[i];
    Tensor tout = result(a->shape, std::move(out), tracked(a));
    auto o = OpAccess::node(tout);
    maybe_record(o, [a, o, c]() {
        const auto& g = o->grad_buf();
        auto& da = a->grad_buf();
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += c * g[i];
    });
    return tout;
}

Tensor sigmoid(const Tensor& a) {
    return elementwise_unary(
        a,
        [](double x) {
            // Split on sign so exp never overflows.
            if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
            double e = std::exp(x);
            return e / (1.0 + e);
        },
        [](double y, double) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
    return elementwise_unary(
        a, [](double x) { return std::tanh(x); }, [](double y, double) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
    return elementwise_unary(
        a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double, double x) { return x > 0.0 ? 1.0 : 0.0; });
}

// ---- reductions / vector ops ----

Tensor softmax(const Tensor& tv) {
    const auto& v = OpAccess::node(tv);
    check_rank("softmax", v, 1);
    std::size_t n = v->size();
    if (n == 0) throw DimError("softmax: empty vector");
    double mx = *std::max_element(v->values.begin(), v->values.end());
    std::vector<double> out(n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(v->values[i] - mx);
        z += out[i];
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= z;
    Tensor tout = result(v->shape, std::move(out), tracked(v));
    auto o = OpAccess::node(tout);
    maybe_record(o, [v, o]() {
        const auto& g = o->grad_buf();
        const auto& y = o->values;
        auto& dv = v->grad_buf();
        double dot = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
        for (std::size_t i = 0; i < g.size(); ++i) dv[i] += y[i] * (g[i] - dot);
    });
    return tout;
}

Tensor log_softmax(const Tensor& tv) {
    const auto& v = OpAccess::node(tv);
    check_rank("log_softmax", v, 1);
    std::size_t n = v->size();
    if (n == 0) throw DimError("log_softmax: empty vector");
    double mx = *std::max_element(v->values.begin(), v->values.end());
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += std::exp(v->values[i] - mx);
    double lz = mx + std::log(z);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = v->values[i] - lz;
    Tensor tout = result(v->shape, std::move(out), tracked(v));
    auto o = OpAccess::node(tout);
    maybe_record(o, [v, o]() {
        const auto& g = o->grad_buf();
        const auto& y = o->values;
        auto& dv = v->grad_buf();
        double gs = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) gs += g[i];
        for (std::size_t i = 0; i < g.size(); ++i) dv[i] += g[i] - std::exp(y[i]) * gs;
    });
    return tout;
}

Tensor sum(const Tensor& ta) {
    const auto& a = OpAccess::node(ta);
    double s = 0.0;
    for (double x : a->values) s += x;
    Tensor tout = result({}, {s}, tracked(a));
    auto o = OpAccess::node(tout);
    maybe_record(o, [a, o]() {
        double g = o->grad_buf()[0];
        auto& da = a->grad_buf();
        for (double& d : da) d += g;
    });
    return tout;
}

Tensor pick(const Tensor& tv, std::size_t index) {
    const auto& v = OpAccess::node(tv);
    check_rank("pick", v, 1);
    if (index >= v->size()) {
        throw DimError("pick: index " + std::to_string(index) + " out of range for shape " +
                       shape_str(v->shape));
    }
    Tensor tout = result({}, {v->values[index]}, tracked(v));
    auto o = OpAccess::node(tout);
    maybe_record(o, [v, o, index]() { v->grad_buf()[index] += o->grad_buf()[0]; });
    return tout;
}

Tensor max_pool_rows(const Tensor& tm) {
    const auto& m = OpAccess::node(tm);
    check_rank("max_pool_rows", m, 2);
    std::size_t r = m->shape[0], c = m->shape[1];
    if (r == 0) throw EmptyInputError("max_pool_rows: no rows to pool");
    std::vector<double> out(c);
    // First row achieving the column max receives the gradient.
    auto arg = std::make_shared<std::vector<std::size_t>>(c, 0);
    for (std::size_t j = 0; j < c; ++j) {
        double best = m->values[j];
        std::size_t bi = 0;
        for (std::size_t i = 1; i < r; ++i) {
            double x = m->values[i * c + j];
            if (x > best) {
                best = x;
                bi = i;
            }
        }
        out[j] = best;
        (*arg)[j] = bi;
    }
    Tensor tout = result({c}, std::move(out), tracked(m));
    auto o = OpAccess::node(tout);
    maybe_record(o, [m, o, arg, c]() {
        const auto& g = o->grad_buf();
        auto& dm = m->grad_buf();
        for (std::size_t j = 0; j < c; ++j) dm[(*arg)[j] * c + j] += g[j];
    });
    return tout;
}

// ---- linear algebra ----

Tensor matmul(const Tensor& ta, const Tensor& tb) {
    const auto& a = OpAccess::node(ta);
    const auto& b = OpAccess::node(tb);
    check_rank("matmul", a, 2);
    check_rank("matmul", b, 2);
    std::size_t m = a->shape[0], k = a->shape[1], n = b->shape[1];
    if (b->shape[0] != k) {
        throw DimError("matmul: inner dimensions disagree, " + shape_str(a->shape) + " x " +
                       shape_str(b->shape));
    }
    std::vector<double> out(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            double aip = a->values[i * k + p];
            if (aip == 0.0) continue;
            const double* brow = &b->values[p * n];
            double* orow = &out[i * n];
            for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
        }
    }
    Tensor tout = result({m, n}, std::move(out), tracked(a) || tracked(b));
    auto o = OpAccess::node(tout);
    maybe_record(o, [a, b, o, m, k, n]() {
        const auto& g = o->grad_buf();
        if (tracked(a)) {
            auto& da = a->grad_buf();
            for (std::size_t i = 0; i < m; ++i) {
                const double* grow = &g[i * n];
                for (std::size_t p = 0; p < k; ++p) {
                    const double* brow = &b->values[p * n];
                    double s = 0.0;
                    for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
                    da[i * k + p] += s;
                }
            }
        }
        if (tracked(b)) {
            auto& db = b->grad_buf();
            for (std::size_t i = 0; i < m; ++i) {
                const double* grow = &g[i * n];
                for (std::size_t p = 0; p < k; ++p) {
                    double aip = a->values[i * k + p];
                    if (aip == 0.0) continue;
                    double* dbrow = &db[p * n];
                    for (std::size_t j = 0; j < n; ++j) dbrow[j] += aip * grow[j];
                }
            }
        }
    });
    return tout;
}

Tensor matvec(const Tensor& tm, const Tensor& tv) {
    const auto& m = OpAccess::node(tm);
    const auto& v = OpAccess::node(tv);
    check_rank("matvec", m, 2);
    check_rank("matvec", v, 1);
    std::size_t r = m->shape[0], c = m->shape[1];
    if (v->shape[0] != c) {
        throw DimError("matvec: " + shape_str(m->shape) + " x " + shape_str(v->shape));
    }
    std::vector<double> out(r, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
        const double* row = &m->values[i * c];
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) s += row[j] * v->values[j];
        out[i] = s;
    }
    Tensor tout = result({r}, std::move(out), tracked(m) || tracked(v));
    auto o = OpAccess::node(tout);
    maybe_record(o, [m, v, o, r, c]() {
        const auto& g = o->grad_buf();
        if (tracked(m)) {
            auto& dm = m->grad_buf();
            for (std::size_t i = 0; i < r; ++i) {
                double gi = g[i];
                if (gi == 0.0) continue;
                double* drow = &dm[i * c];
                for (std::size_t j = 0; j < c; ++j) drow[j] += gi * v->values[j];
            }
        }
        if (tracked(v)) {
            auto& dv = v->grad_buf();
            for (std::size_t i = 0; i < r; ++i) {
                double gi = g[i];
                if (gi == 0.0) continue;
                const double* row = &m->values[i * c];
                for (std::size_t j = 0; j < c; ++j) dv[j] += gi * row[j];
            }
        }
    });
    return tout;
}

Tensor vecmat(const Tensor& tv, const Tensor& tm) {
    const auto& v = OpAccess::node(tv);
    const auto& m = OpAccess::node(tm);
    check_rank("vecmat", v, 1);
    check_rank("vecmat", m, 2);
    std::size_t r = m->shape[0], c = m->shape[1];
    if (v->shape[0] != r) {
        throw DimError("vecmat: " + shape_str(v->shape) + " x " + shape_str(m->shape));
    }
    std::vector<double> out(c, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
        double vi = v->values[i];
        if (vi == 0.0) continue;
        const double* row = &m->values[i * c];
        for (std::size_t j = 0; j < c; ++j) out[j] += vi * row[j];
    }
    Tensor tout = result({c}, std::move(out), tracked(v) || tracked(m));
    auto o = OpAccess::node(tout);
    maybe_record(o, [v, m, o, r, c]() {
        const auto& g = o->grad_buf();
        if (tracked(v)) {
            auto& dv = v->grad_buf();
            for (std::size_t i = 0; i < r; ++i) {
                const double* row = &m->values[i * c];
                double s = 0.0;
                for (std::size_t j = 0; j < c; ++j) s += g[j] * row[j];
                dv[i] += s;
            }
        }
        if (tracked(m)) {
            auto& dm = m->grad_buf();
            for (std::size_t i = 0; i < r; ++i) {
                double vi = v->values[i];
                if (vi == 0.0) continue;
                double* drow = &dm[i * c];
                for (std::size_t j = 0; j < c; ++j) drow[j] += vi * g[j];
            }
        }
    });
    return tout;
}

Tensor add_bias_rows(const Tensor& tm, const Tensor& tb) {
    const auto& m = OpAccess::node(tm);
    const auto& b = OpAccess::node(tb);
    check_rank("add_bias_rows", m, 2);
    check_rank("add_bias_rows", b, 1);
    std::size_t r = m->shape[0], c = m->shape[1];
    if (b->shape[0] != c) {
        throw DimError("add_bias_rows: bias " + shape_str(b->shape) + " for matrix " +
                       shape_str(m->shape));
    }
    std::vector<double> out(r * c);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] = m->values[i * c + j] + b->values[j];
    }
    Tensor tout = result({r, c}, std::move(out), tracked(m) || tracked(b));
    auto o = OpAccess::node(tout);
    maybe_record(o, [m, b, o, r, c]() {
        const auto& g = o->grad_buf();
        if (tracked(m)) {
            auto& dm = m->grad_buf();
            for (std::size_t i = 0; i < r * c; ++i) dm[i] += g[i];
        }
        if (tracked(b)) {
            auto& db = b->grad_buf();
            for (std::size_t i = 0; i < r; ++i) {
                for (std::size_t j = 0; j < c; ++j) db[j] += g[i * c + j];
            }
        }
    });
    return tout;
}

// ---- structure ----

Tensor concat(const std::vector<Tensor>& parts, int axis) {
    if (parts.empty()) throw DimError("concat: no parts");
    std::vector<NodePtr> ns;
    ns.reserve(parts.size());
    bool rg = false;
    for (const auto& p : parts) {
        ns.push_back(OpAccess::node(p));
        rg = rg || tracked(ns.back());
    }
    std::size_t rank = ns[0]->shape.size();
    if (rank != 1 && rank != 2) {
        throw DimError("concat: only rank-1 and rank-2 tensors, got " + shape_str(ns[0]->shape));
    }
    if (axis < 0 || static_cast<std::size_t>(axis) >= rank) {
        throw DimError("concat: axis " + std::to_string(axis) + " invalid for rank-" +
                       std::to_string(rank));
    }
    for (const auto& n : ns) {
        if (n->shape.size() != rank) throw DimError("concat: mixed ranks");
    }

    if (rank == 1) {
        std::size_t total = 0;
        for (const auto& n : ns) total += n->shape[0];
        std::vector<double> out;
        out.reserve(total);
        for (const auto& n : ns) out.insert(out.end(), n->values.begin(), n->values.end());
        Tensor tout = result({total}, std::move(out), rg);
        auto o = OpAccess::node(tout);
        maybe_record(o, [ns, o]() {
            const auto& g = o->grad_buf();
            std::size_t off = 0;
            for (const auto& n : ns) {
                std::size_t len = n->shape[0];
                if (tracked(n)) {
                    auto& d = n->grad_buf();
                    for (std::size_t i = 0; i < len; ++i) d[i] += g[off + i];
                }
                off += len;
            }
        });
        return tout;
    }

    if (axis == 0) {
        std::size_t c = ns[0]->shape[1], rtot = 0;
        for (const auto& n : ns) {
            if (n->shape[1] != c) {
                throw DimError("concat axis 0: column mismatch " + shape_str(ns[0]->shape) +
                               " vs " + shape_str(n->shape));
            }
            rtot += n->shape[0];
        }
        std::vector<double> out;
        out.reserve(rtot * c);
        for (const auto& n : ns) out.insert(out.end(), n->values.begin(), n->values.end());
        Tensor tout = result({rtot, c}, std::move(out), rg);
        auto o = OpAccess::node(tout);
        maybe_record(o, [ns, o]() {
            const auto& g = o->grad_buf();
            std::size_t off = 0;
            for (const auto& n : ns) {
                std::size_t len = n->size();
                if (tracked(n)) {
                    auto& d = n->grad_buf();
                    for (std::size_t i = 0; i < len; ++i) d[i] += g[off + i];
                }
                off += len;
            }
        });
        return tout;
    }

    // axis == 1: same row count, columns appended.
    std::size_t r = ns[0]->shape[0], ctot = 0;
    for (const auto& n : ns) {
        if (n->shape[0] != r) {
            throw DimError("concat axis 1: row mismatch " + shape_str(ns[0]->shape) + " vs " +
                           shape_str(n->shape));
        }
        ctot += n->shape[1];
    }
    std::vector<double> out(r * ctot);
    std::size_t coff = 0;
    for (const auto& n : ns) {
        std::size_t c = n->shape[1];
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < c; ++j) out[i * ctot + coff + j] = n->values[i * c + j];
        }
        coff += c;
    }
    Tensor tout = result({r, ctot}, std::move(out), rg);
    auto o = OpAccess::node(tout);
    maybe_record(o, [ns, o, r, ctot]() {
        const auto& g = o->grad_buf();
        std::size_t coff = 0;
        for (const auto& n : ns) {
            std::size_t c = n->shape[1];
            if (tracked(n)) {
                auto& d = n->grad_buf();
                for (std::size_t i = 0; i < r; ++i) {
                    for (std::size_t j = 0; j < c; ++j) d[i * c + j] += g[i * ctot + coff + j];
                }
            }
            coff += c;
        }
    });
    return tout;
}

Tensor slice(const Tensor& tv, std::size_t offset, std::size_t len) {
    const auto& v = OpAccess::node(tv);
    check_rank("slice", v, 1);
    if (offset + len > v->shape[0]) {
        throw DimError("slice: [" + std::to_string(offset) + ", " + std::to_string(offset + len) +
                       ") out of range for shape " + shape_str(v->shape));
    }
    std::vector<double> out(v->values.begin() + offset, v->values.begin() + offset + len);
    Tensor tout = result({len}, std::move(out), tracked(v));
    auto o = OpAccess::node(tout);
    maybe_record(o, [v, o, offset, len]() {
        const auto& g = o->grad_buf();
        auto& dv = v->grad_buf();
        for (std::size_t i = 0; i < len; ++i) dv[offset + i] += g[i];
    });
    return tout;
}

Tensor row_of(const Tensor& tm, std::size_t r) {
    const auto& m = OpAccess::node(tm);
    check_rank("row_of", m, 2);
    if (r >= m->shape[0]) {
        throw DimError("row_of: row " + std::to_string(r) + " out of range for shape " +
                       shape_str(m->shape));
    }
    std::size_t c = m->shape[1];
    std::vector<double> out(m->values.begin() + r * c, m->values.begin() + (r + 1) * c);
    Tensor tout = result({c}, std::move(out), tracked(m));
    auto o = OpAccess::node(tout);
    maybe_record(o, [m, o, r, c]() {
        const auto& g = o->grad_buf();
        auto& dm = m->grad_buf();
        for (std::size_t j = 0; j < c; ++j) dm[r * c + j] += g[j];
    });
    return tout;
}

Tensor gather_rows(const Tensor& tm, const std::vector<int>& ids) {
    const auto& m = OpAccess::node(tm);
    check_rank("gather_rows", m, 2);
    std::size_t r = m->shape[0], c = m->shape[1];
    for (int id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= r) {
            throw DimError("gather_rows: row id " + std::to_string(id) +
                           " out of range for shape " + shape_str(m->shape));
        }
    }
    std::vector<double> out(ids.size() * c);
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const double* src = &m->values[static_cast<std::size_t>(ids[k]) * c];
        std::copy(src, src + c, &out[k * c]);
    }
    Tensor tout = result({ids.size(), c}, std::move(out), tracked(m));
    auto o = OpAccess::node(tout);
    maybe_record(o, [m, o, ids, c]() {
        const auto& g = o->grad_buf();
        auto& dm = m->grad_buf();
        for (std::size_t k = 0; k < ids.size(); ++k) {
            double* dst = &dm[static_cast<std::size_t>(ids[k]) * c];
            for (std::size_t j = 0; j < c; ++j) dst[j] += g[k * c + j];
        }
    });
    return tout;
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
    if (rows.empty()) throw DimError("stack_rows: no rows");
    std::vector<NodePtr> ns;
    ns.reserve(rows.size());
    bool rg = false;
    for (const auto& t : rows) {
        ns.push_back(OpAccess::node(t));
        check_rank("stack_rows", ns.back(), 1);
        rg = rg || tracked(ns.back());
    }
    std::size_t c = ns[0]->shape[0];
    for (const auto& n : ns) {
        if (n->shape[0] != c) {
            throw DimError("stack_rows: length mismatch " + shape_str(ns[0]->shape) + " vs " +
                           shape_str(n->shape));
        }
    }
    std::vector<double> out;
    out.reserve(ns.size() * c);
    for (const auto& n : ns) out.insert(out.end(), n->values.begin(), n->values.end());
    Tensor tout = result({ns.size(), c}, std::move(out), rg);
    auto o = OpAccess::node(tout);
    maybe_record(o, [ns, o, c]() {
        const auto& g = o->grad_buf();
        for (std::size_t k = 0; k < ns.size(); ++k) {
            if (!tracked(ns[k])) continue;
            auto& d = ns[k]->grad_buf();
            for (std::size_t j = 0; j < c; ++j) d[j] += g[k * c + j];
        }
    });
    return tout;
}

Tensor adjacency_mean(const Tensor& tm, const std::vector<std::vector<int>>& adj) {
    const auto& m = OpAccess::node(tm);
    check_rank("adjacency_mean", m, 2);
    std::size_t r = m->shape[0], c = m->shape[1];
    for (const auto& nbrs : adj) {
        for (int u : nbrs) {
            if (u < 0 || static_cast<std::size_t>(u) >= r) {
                throw DimError("adjacency_mean: neighbor id " + std::to_string(u) +
                               " out of range for shape " + shape_str(m->shape));
            }
        }
    }
    std::size_t n = adj.size();
    std::vector<double> out(n * c, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        const auto& nbrs = adj[v];
        if (nbrs.empty()) continue; // isolated in this direction: zero vector
        double inv = 1.0 / static_cast<double>(nbrs.size());
        double* orow = &out[v * c];
        for (int u : nbrs) {
            const double* src = &m->values[static_cast<std::size_t>(u) * c];
            for (std::size_t j = 0; j < c; ++j) orow[j] += src[j];
        }
        for (std::size_t j = 0; j < c; ++j) orow[j] *= inv;
    }
    Tensor tout = result({n, c}, std::move(out), tracked(m));
    auto o = OpAccess::node(tout);
    maybe_record(o, [m, o, adj, c]() {
        const auto& g = o->grad_buf();
        auto& dm = m->grad_buf();
        for (std::size_t v = 0; v < adj.size(); ++v) {
            const auto& nbrs = adj[v];
            if (nbrs.empty()) continue;
            double inv = 1.0 / static_cast<double>(nbrs.size());
            const double* grow = &g[v * c];
            for (int u : nbrs) {
                double* dst = &dm[static_cast<std::size_t>(u) * c];
                for (std::size_t j = 0; j < c; ++j) dst[j] += inv * grow[j];
            }
        }
    });
    return tout;
}

Tensor dropout(const Tensor& ta, double keep_prob, Rng& rng) {
    if (keep_prob <= 0.0 || keep_prob > 1.0) {
        throw ContractError("dropout: keep probability must be in (0, 1], got " +
                            std::to_string(keep_prob));
    }
    if (keep_prob == 1.0) return ta;
    const auto& a = OpAccess::node(ta);
    std::size_t n = a->size();
    auto mask = std::make_shared<std::vector<double>>(n);
    double inv = 1.0 / keep_prob;
    for (std::size_t i = 0; i < n; ++i) (*mask)[i] = rng.bernoulli(keep_prob) ? inv : 0.0;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a->values[i] * (*mask)[i];
    Tensor tout = result(a->shape, std::move(out), tracked(a));
    auto o = OpAccess::node(tout);
    maybe_record(o, [a, o, mask]() {
        const auto& g = o->grad_buf();
        auto& da = a->grad_buf();
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * (*mask)[i];
    });
    return tout;
}

// ---- LSTM cell ----

LstmState lstm_cell(const Tensor& x, const LstmState& state, const LstmParams& p) {
    std::size_t four_h = p.Wx.shape().at(0);
    if (four_h % 4 != 0) {
        throw DimError("lstm_cell: fused weight rows must be 4*H, got " +
                       shape_str(p.Wx.shape()));
    }
    std::size_t H = four_h / 4;
    if (p.Wh.rank() != 2 || p.Wh.shape()[0] != four_h || p.Wh.shape()[1] != H) {
        throw DimError("lstm_cell: Wh shape " + shape_str(p.Wh.shape()) + ", want [" +
                       std::to_string(four_h) + ", " + std::to_string(H) + "]");
    }
    if (p.b.rank() != 1 || p.b.shape()[0] != four_h) {
        throw DimError("lstm_cell: bias shape " + shape_str(p.b.shape()));
    }
    if (state.h.shape() != Shape{H} || state.c.shape() != Shape{H}) {
        throw DimError("lstm_cell: state shape " + shape_str(state.h.shape()) + "/" +
                       shape_str(state.c.shape()) + ", want [" + std::to_string(H) + "]");
    }
    Tensor z = add(add(matvec(p.Wx, x), matvec(p.Wh, state.h)), p.b);
    Tensor i = sigmoid(slice(z, 0, H));
    Tensor f = sigmoid(slice(z, H, H));
    Tensor g = tanh(slice(z, 2 * H, H));
    Tensor o = sigmoid(slice(z, 3 * H, H));
    Tensor c_new = add(mul(f, state.c), mul(i, g));
    Tensor h_new = mul(o, tanh(c_new));
    return {h_new, c_new};
}

} // namespace g2t
