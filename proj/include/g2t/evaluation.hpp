#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "g2t/output_tree.hpp"

namespace g2t {

// Ordered marker -> original-literal bindings produced by number masking.
// Literals stay strings so "0.50" round-trips untouched.
struct NumberMap {
    std::vector<std::pair<std::string, std::string>> pairs;

    const std::string* literal_of(const std::string& marker) const;
    bool empty() const { return pairs.empty(); }
};

bool is_numeric_literal(const std::string& token);
bool is_number_marker(const std::string& token); // n1, n2, ...

// Replaces numeric literals with markers n1, n2, ... in first-occurrence
// order; repeated identical literals share a marker.
std::pair<std::vector<std::string>, NumberMap> mask_numbers(const std::vector<std::string>& tokens);

// Substitutes literals back for markers. A marker missing from the map means
// the prediction invented a number slot; the caller counts that as wrong.
std::optional<std::vector<std::string>> unmask(const std::vector<std::string>& tokens,
                                               const NumberMap& map);

// Equality of canonical linearizations.
bool exact_match(const OutputTree& pred, const OutputTree& gold);

// Solves an equation in one unknown x, provided both sides are affine in x:
// both sides are evaluated at x = 0 and x = 1, the residual's root is
// computed, and the candidate is verified by substitution. Nonlinear or
// malformed equations yield no value.
std::optional<double> solve_linear(const std::string& equation);

// Evaluates one side (no '=') at a fixed x. Exposed for the solver oracle.
std::optional<double> eval_expression(const std::vector<std::string>& tokens, double x);

bool solution_accuracy(const OutputTree& pred, const NumberMap& map, double gold_answer);

// One metrics row per example, written as JSON lines by the CLI.
struct ExampleResult {
    std::string id;
    bool exact = false;
    bool solved = false; // meaningful for the equation task only
    std::string prediction;
    std::string gold;
};

struct MetricSummary {
    std::size_t count = 0;
    std::size_t exact = 0;
    std::size_t solved = 0;

    double exact_rate() const { return count ? static_cast<double>(exact) / count : 0.0; }
    double solve_rate() const { return count ? static_cast<double>(solved) / count : 0.0; }
};

} // namespace g2t
