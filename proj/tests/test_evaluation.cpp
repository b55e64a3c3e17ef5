#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "g2t/evaluation.hpp"
#include "g2t/output_tree.hpp"
#include "g2t/rng.hpp"

using namespace g2t;

namespace {

NumberMap make_map(std::vector<std::pair<std::string, std::string>> pairs) {
    NumberMap m;
    m.pairs = std::move(pairs);
    return m;
}

// Grid of expression pairs exercising both metrics. Expectations were worked
// out by hand from the bound values below.
struct MetricRow {
    const char* gold;
    const char* pred;
    NumberMap map;
    double answer;
    bool expect_exact;
    bool expect_solved;
};

std::vector<MetricRow> metric_rows() {
    return {
        // reassociated product: strings differ, value agrees
        {"n1 * 0.01 * n2 = x", "x = ( n1 * 0.01 ) * n2",
         make_map({{"n1", "8"}, {"n2", "50"}}), 4.0, false, true},
        // verbatim copy of an affine equation
        {"( 2.0 * x ) + n2 = n1", "( 2.0 * x ) + n2 = n1",
         make_map({{"n1", "8"}, {"n2", "2"}}), 3.0, true, true},
        // structurally mangled: (x-4)-4 = 10 solves to 18, not 11
        {"( n2 + n3 ) - n1 = x", "( x - n1 ) - n1 = ( n2 + n3 ) - n3",
         make_map({{"n1", "4"}, {"n2", "10"}, {"n3", "5"}}), 11.0, false, false},
        // verbatim copy with x on both sides
        {"n4 * ( n2 + x ) = ( n1 * x ) - n3", "n4 * ( n2 + x ) = ( n1 * x ) - n3",
         make_map({{"n1", "2"}, {"n2", "3"}, {"n3", "7"}, {"n4", "4"}}), -9.5, true, true},
        // verbatim copy with a non-masked constant factor
        {"x = ( n1 / n2 ) * 100.0", "x = ( n1 / n2 ) * 100.0",
         make_map({{"n1", "13"}, {"n2", "20"}}), 65.0, true, true},
        // sides swapped: same solution, different string
        {"x = ( n1 + n2 )", "n1 + n2 = x",
         make_map({{"n1", "85"}, {"n2", "45"}}), 130.0, false, true},
        // operands swapped under subtraction: sign flips
        {"x = ( n2 - n1 )", "x = ( n1 - n2 )",
         make_map({{"n1", "6"}, {"n2", "18"}}), 12.0, false, false},
        // gold is nonlinear (1/x) but the prediction is its affine rearrangement
        {"( 1.0 / n1 ) + ( 1.0 / n2 ) = 1.0 / x",
         "( ( 1.0 / n1 ) * x ) + ( ( 1.0 / n2 ) * x ) = 1.0",
         make_map({{"n1", "4"}, {"n2", "12"}}), 3.0, false, true},
        // verbatim copy; map carries an unused marker, as real maskings do
        {"x = n1 + n3 + n4", "x = n1 + n3 + n4",
         make_map({{"n1", "13"}, {"n2", "5"}, {"n3", "9"}, {"n4", "11"}}), 33.0, true, true},
        // product replaced by a quotient: wrong operation, wrong value
        {"n1 * n2 = x", "x = ( n2 / n1 )",
         make_map({{"n1", "75"}, {"n2", "6"}}), 450.0, false, false},
    };
}

} // namespace

TEST_CASE("numeric literal and marker predicates") {
    CHECK(is_numeric_literal("12"));
    CHECK(is_numeric_literal("0.5"));
    CHECK(is_numeric_literal("100.0"));
    CHECK_FALSE(is_numeric_literal("12."));
    CHECK_FALSE(is_numeric_literal(".5"));
    CHECK_FALSE(is_numeric_literal("-3"));
    CHECK_FALSE(is_numeric_literal("1e3"));
    CHECK_FALSE(is_numeric_literal("n1"));
    CHECK_FALSE(is_numeric_literal(""));
    CHECK_FALSE(is_numeric_literal("1.2.3"));

    CHECK(is_number_marker("n1"));
    CHECK(is_number_marker("n12"));
    CHECK_FALSE(is_number_marker("n"));
    CHECK_FALSE(is_number_marker("n1a"));
    CHECK_FALSE(is_number_marker("m1"));
    CHECK_FALSE(is_number_marker("12"));
}

TEST_CASE("mask_numbers assigns first-occurrence markers") {
    auto [masked, map] =
        mask_numbers({"bought", "12", "pens", "and", "12", "rulers"});
    CHECK(masked == std::vector<std::string>{"bought", "n1", "pens", "and", "n1", "rulers"});
    REQUIRE(map.pairs.size() == 1);
    CHECK(map.pairs[0].first == "n1");
    CHECK(map.pairs[0].second == "12");

    auto [m2, map2] = mask_numbers({"0.5", "of", "30", "cows"});
    CHECK(m2 == std::vector<std::string>{"n1", "of", "n2", "cows"});
    CHECK(map2.pairs.size() == 2);
    CHECK(map2.pairs[1].second == "30");

    auto [m3, map3] = mask_numbers({"no", "numbers", "here"});
    CHECK(m3 == std::vector<std::string>{"no", "numbers", "here"});
    CHECK(map3.empty());

    // distinct spellings of the same value stay distinct markers
    auto [m4, map4] = mask_numbers({"12", "12.0"});
    CHECK(m4 == std::vector<std::string>{"n1", "n2"});
    CHECK(map4.pairs.size() == 2);
}

TEST_CASE("unmask substitutes literals and rejects unknown markers") {
    NumberMap map = make_map({{"n1", "5"}, {"n2", "7"}});
    auto out = unmask({"x", "=", "(", "n1", "+", "n2", ")"}, map);
    REQUIRE(out.has_value());
    CHECK(*out == std::vector<std::string>{"x", "=", "(", "5", "+", "7", ")"});

    auto same = unmask({"x", "=", "y"}, map);
    REQUIRE(same.has_value());
    CHECK(*same == std::vector<std::string>{"x", "=", "y"});

    CHECK_FALSE(unmask({"x", "=", "n3"}, map).has_value());
}

TEST_CASE("mask then unmask is the identity") {
    Rng rng(404);
    std::vector<std::string> pool = {"the", "cat", "12", "0.5", "ate", "12", "7", "fish", "100.0"};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> toks;
        std::size_t len = 1 + rng.index(9);
        for (std::size_t i = 0; i < len; ++i) toks.push_back(pool[rng.index(pool.size())]);
        auto [masked, map] = mask_numbers(toks);
        auto restored = unmask(masked, map);
        REQUIRE(restored.has_value());
        CHECK(*restored == toks);
    }
}

TEST_CASE("exact_match compares canonical forms") {
    OutputTree a = parse_to_tree("x = ( n1 + n2 )");
    OutputTree b = parse_to_tree("x = (n1 + n2)"); // flush parens tokenize the same
    OutputTree c = parse_to_tree("( n1 + n2 ) = x");
    CHECK(exact_match(a, a));
    CHECK(exact_match(a, b));
    CHECK_FALSE(exact_match(a, c));
}

TEST_CASE("eval_expression handles the grammar") {
    auto ev = [](const std::string& text, double x) {
        return eval_expression(tokenize_bracketed(text), x);
    };
    CHECK(*ev("1 + 2 * 3", 0.0) == doctest::Approx(7.0));
    CHECK(*ev("( 1 + 2 ) * 3", 0.0) == doctest::Approx(9.0));
    CHECK(*ev("10 - 2 - 3", 0.0) == doctest::Approx(5.0)); // left associative
    CHECK(*ev("12 / 4 / 3", 0.0) == doctest::Approx(1.0));
    CHECK(*ev("- x + 1", 2.0) == doctest::Approx(-1.0));
    CHECK(*ev("x * x", 3.0) == doctest::Approx(9.0));
    CHECK(*ev("0.5 * 100.0", 0.0) == doctest::Approx(50.0));

    CHECK_FALSE(ev("1 / 0", 0.0).has_value());
    CHECK_FALSE(ev("1 +", 0.0).has_value());
    CHECK_FALSE(ev("( 1 + 2", 0.0).has_value());
    CHECK_FALSE(ev("1 2", 0.0).has_value()); // trailing tokens
    CHECK_FALSE(ev("y", 0.0).has_value());   // unknown symbol
    CHECK_FALSE(ev("", 0.0).has_value());
}

TEST_CASE("solve_linear on hand-checked equations") {
    REQUIRE(solve_linear("( 2.0 * x ) + 2 = 1").has_value());
    CHECK(*solve_linear("( 2.0 * x ) + 2 = 1") == doctest::Approx(-0.5));
    CHECK(*solve_linear("x = ( 5 + 7 )") == doctest::Approx(12.0));
    CHECK(*solve_linear("- x = 3") == doctest::Approx(-3.0));
    CHECK(*solve_linear("2 * x + 1 = x + 5") == doctest::Approx(4.0));

    CHECK_FALSE(solve_linear("x * x = 4").has_value());   // verification rejects
    CHECK_FALSE(solve_linear("1 + 1 = 2").has_value());   // no x: degenerate
    CHECK_FALSE(solve_linear("x = x + 1").has_value());   // cancels: degenerate
    CHECK_FALSE(solve_linear("x = 1 / 0").has_value());
    CHECK_FALSE(solve_linear("x = 2 = 3").has_value());   // two equals signs
    CHECK_FALSE(solve_linear("x =").has_value());
    CHECK_FALSE(solve_linear("= x").has_value());
    CHECK_FALSE(solve_linear("x + 1").has_value());       // no equals sign
    CHECK_FALSE(solve_linear("x = ( 2").has_value());
}

TEST_CASE("solve_linear matches the closed-form root on random affine equations") {
    Rng rng(2024);
    int solved = 0;
    for (int trial = 0; trial < 200; ++trial) {
        double a = std::floor(rng.uniform(-9, 9) * 4) / 4;
        double b = std::floor(rng.uniform(-9, 9) * 4) / 4;
        double c = std::floor(rng.uniform(-9, 9) * 4) / 4;
        double d = std::floor(rng.uniform(-9, 9) * 4) / 4;
        if (std::abs(a - c) < 0.25) continue;
        double expected = (d - b) / (a - c);
        // negative values spell the sign as its own token, as tokenized
        // equations do
        auto fmt = [](double v) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.6f", std::abs(v));
            return (v < 0 ? std::string("- ") : std::string()) + buf;
        };
        std::string eq = fmt(a) + " * x + " + fmt(b) + " = " + fmt(c) + " * x + " + fmt(d);
        auto got = solve_linear(eq);
        REQUIRE_MESSAGE(got.has_value(), eq);
        CHECK_MESSAGE(std::abs(*got - expected) <= 1e-9 * std::max(1.0, std::abs(expected)), eq);

        // side swap preserves the root
        std::string swapped = fmt(c) + " * x + " + fmt(d) + " = " + fmt(a) + " * x + " + fmt(b);
        CHECK(*solve_linear(swapped) == doctest::Approx(*got));
        ++solved;
    }
    CHECK(solved > 100);
}

TEST_CASE("metric grid matches hand-derived expectations") {
    auto rows = metric_rows();
    REQUIRE(rows.size() == 10);
    std::size_t exact_count = 0;
    std::size_t solved_count = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        INFO("row ", i + 1, ": ", rows[i].pred);
        OutputTree pred = parse_to_tree(rows[i].pred);
        OutputTree gold = parse_to_tree(rows[i].gold);
        CHECK(exact_match(pred, gold) == rows[i].expect_exact);
        CHECK(solution_accuracy(pred, rows[i].map, rows[i].answer) == rows[i].expect_solved);
        exact_count += rows[i].expect_exact;
        solved_count += rows[i].expect_solved;
    }
    CHECK(exact_count == 4);
    CHECK(solved_count == 7);
}

TEST_CASE("solution_accuracy edge cases") {
    NumberMap map = make_map({{"n1", "2"}});

    // tolerance scales with the answer's magnitude
    CHECK(solution_accuracy(parse_to_tree("x = 0.00005"), NumberMap{}, 0.0));
    CHECK_FALSE(solution_accuracy(parse_to_tree("x = 0.001"), NumberMap{}, 0.0));

    // unknown marker in the prediction counts as wrong
    CHECK_FALSE(solution_accuracy(parse_to_tree("x = n9"), map, 2.0));
    // no equals sign
    CHECK_FALSE(solution_accuracy(parse_to_tree("n1 + n1"), map, 4.0));
    // division by zero during solving
    CHECK_FALSE(solution_accuracy(parse_to_tree("x = 1 / 0"), map, 1.0));
    // nonlinear prediction
    CHECK_FALSE(solution_accuracy(parse_to_tree("x * x = 4"), map, 2.0));
}

TEST_CASE("metric summary rates") {
    MetricSummary s;
    CHECK(s.exact_rate() == 0.0);
    CHECK(s.solve_rate() == 0.0);
    s.count = 10;
    s.exact = 4;
    s.solved = 7;
    CHECK(s.exact_rate() == doctest::Approx(0.4));
    CHECK(s.solve_rate() == doctest::Approx(0.7));
}
