#include "g2t/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "g2t/errors.hpp"

namespace g2t {

const std::string* NumberMap::literal_of(const std::string& marker) const {
    for (const auto& [m, lit] : pairs) {
        if (m == marker) return &lit;
    }
    return nullptr;
}

bool is_numeric_literal(const std::string& token) {
    if (token.empty()) return false;
    std::size_t i = 0;
    std::size_t digits = 0;
    while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) {
        ++i;
        ++digits;
    }
    if (digits == 0) return false;
    if (i == token.size()) return true;
    if (token[i] != '.') return false;
    ++i;
    std::size_t frac = 0;
    while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) {
        ++i;
        ++frac;
    }
    return frac > 0 && i == token.size();
}

bool is_number_marker(const std::string& token) {
    if (token.size() < 2 || token[0] != 'n') return false;
    for (std::size_t i = 1; i < token.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(token[i]))) return false;
    }
    return true;
}

std::pair<std::vector<std::string>, NumberMap> mask_numbers(
    const std::vector<std::string>& tokens) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    NumberMap map;
    for (const auto& tok : tokens) {
        if (!is_numeric_literal(tok)) {
            out.push_back(tok);
            continue;
        }
        std::string marker;
        for (const auto& [m, lit] : map.pairs) {
            if (lit == tok) {
                marker = m;
                break;
            }
        }
        if (marker.empty()) {
            marker = "n" + std::to_string(map.pairs.size() + 1);
            map.pairs.emplace_back(marker, tok);
        }
        out.push_back(marker);
    }
    return {std::move(out), std::move(map)};
}

std::optional<std::vector<std::string>> unmask(const std::vector<std::string>& tokens,
                                               const NumberMap& map) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& tok : tokens) {
        if (!is_number_marker(tok)) {
            out.push_back(tok);
            continue;
        }
        const std::string* lit = map.literal_of(tok);
        if (lit == nullptr) return std::nullopt;
        out.push_back(*lit);
    }
    return out;
}

bool exact_match(const OutputTree& pred, const OutputTree& gold) {
    return linearize(pred) == linearize(gold);
}

namespace {

// Recursive-descent evaluator over "+ - * / ( ) x <number>".
class ExprEval {
public:
    ExprEval(const std::vector<std::string>& toks, double x) : toks_(toks), x_(x) {}

    std::optional<double> run() {
        auto v = expr();
        if (!v || pos_ != toks_.size()) return std::nullopt;
        if (!std::isfinite(*v)) return std::nullopt;
        return v;
    }

private:
    const std::vector<std::string>& toks_;
    double x_;
    std::size_t pos_ = 0;

    const std::string* peek() const { return pos_ < toks_.size() ? &toks_[pos_] : nullptr; }

    std::optional<double> expr() {
        auto v = term();
        if (!v) return std::nullopt;
        while (const std::string* t = peek()) {
            if (*t == "+" || *t == "-") {
                ++pos_;
                auto rhs = term();
                if (!rhs) return std::nullopt;
                v = (*t == "+") ? *v + *rhs : *v - *rhs;
            } else {
                break;
            }
        }
        return v;
    }

    std::optional<double> term() {
        auto v = factor();
        if (!v) return std::nullopt;
        while (const std::string* t = peek()) {
            if (*t == "*" || *t == "/") {
                ++pos_;
                auto rhs = factor();
                if (!rhs) return std::nullopt;
                if (*t == "/") {
                    if (*rhs == 0.0) return std::nullopt;
                    v = *v / *rhs;
                } else {
                    v = *v * *rhs;
                }
            } else {
                break;
            }
        }
        return v;
    }

    std::optional<double> factor() {
        const std::string* t = peek();
        if (t == nullptr) return std::nullopt;
        if (*t == "-") {
            ++pos_;
            auto v = factor();
            if (!v) return std::nullopt;
            return -*v;
        }
        if (*t == "(") {
            ++pos_;
            auto v = expr();
            if (!v) return std::nullopt;
            if (peek() == nullptr || *peek() != ")") return std::nullopt;
            ++pos_;
            return v;
        }
        if (*t == "x") {
            ++pos_;
            return x_;
        }
        if (is_numeric_literal(*t)) {
            ++pos_;
            return std::strtod(t->c_str(), nullptr);
        }
        return std::nullopt;
    }
};

} // namespace

std::optional<double> eval_expression(const std::vector<std::string>& tokens, double x) {
    if (tokens.empty()) return std::nullopt;
    return ExprEval(tokens, x).run();
}

std::optional<double> solve_linear(const std::string& equation) {
    auto toks = tokenize_bracketed(equation);
    std::size_t eq_pos = toks.size();
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i] == "=") {
            if (eq_pos != toks.size()) return std::nullopt; // two '='
            eq_pos = i;
        }
    }
    if (eq_pos == toks.size() || eq_pos == 0 || eq_pos + 1 == toks.size()) return std::nullopt;
    std::vector<std::string> lhs(toks.begin(), toks.begin() + static_cast<long>(eq_pos));
    std::vector<std::string> rhs(toks.begin() + static_cast<long>(eq_pos) + 1, toks.end());

    auto f0 = eval_expression(lhs, 0.0), g0 = eval_expression(rhs, 0.0);
    auto f1 = eval_expression(lhs, 1.0), g1 = eval_expression(rhs, 1.0);
    if (!f0 || !g0 || !f1 || !g1) return std::nullopt;
    double r0 = *f0 - *g0;
    double r1 = *f1 - *g1;
    double d = r1 - r0;
    if (d == 0.0) return std::nullopt; // no x dependence (or perfectly cancelled)
    double root = -r0 / d;
    auto fr = eval_expression(lhs, root), gr = eval_expression(rhs, root);
    if (!fr || !gr) return std::nullopt;
    double tol = 1e-6 * std::max(1.0, std::fabs(*fr));
    if (std::fabs(*fr - *gr) > tol) return std::nullopt; // not actually a root: nonlinear
    return root;
}

bool solution_accuracy(const OutputTree& pred, const NumberMap& map, double gold_answer) {
    std::string lin;
    try {
        lin = linearize(pred);
    } catch (const Error&) {
        return false;
    }
    auto restored = unmask(tokenize_bracketed(lin), map);
    if (!restored) return false;
    std::string eq;
    for (std::size_t i = 0; i < restored->size(); ++i) {
        if (i) eq += ' ';
        eq += (*restored)[i];
    }
    auto x = solve_linear(eq);
    if (!x) return false;
    return std::fabs(*x - gold_answer) <= 1e-4 * std::max(1.0, std::fabs(gold_answer));
}

} // namespace g2t
