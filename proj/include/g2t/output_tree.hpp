#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace g2t {

// Hierarchical target object. Each node holds a token sequence in which
// every subtree placeholder token stands for one child, in order.
struct TreeNode {
    std::vector<std::string> tokens;
    std::vector<TreeNode> children;
};

struct OutputTree {
    TreeNode root;
};

// Splits a bracketed expression into tokens. Whitespace separates tokens and
// each parenthesis is its own token even when written flush against a
// neighbor.
std::vector<std::string> tokenize_bracketed(const std::string& s);

// The single-spaced form every comparison uses: tokens joined by one space.
std::string canonical_spacing(const std::string& s);

// Parses "( ( 0.5 * x ) + ( 0.25 * x ) ) + 9.0 = x" style strings: each
// parenthesized group becomes a child node and is replaced by the subtree
// placeholder in its parent's token list.
OutputTree parse_to_tree(const std::string& s);

// Inverse of parse_to_tree: placeholders expand to "( <child> )". Throws if
// a node's placeholder count disagrees with its child count.
std::string linearize(const OutputTree& t);

std::size_t node_count(const OutputTree& t);

// One decoding task per tree node, in the order they are decoded:
// breadth-first, left to right.
struct SubTask {
    const TreeNode* node = nullptr;
    int parent = -1;           // task index of the parent, -1 for the root
    int sibling = -1;          // task index of the nearest left sibling
    int parent_token_pos = -1; // position of this child's placeholder in the parent's tokens
    std::vector<std::string> gold; // node tokens followed by the end token
};

// Pointers in the result alias `t`; the tree must outlive the task list.
std::vector<SubTask> decompose_for_training(const OutputTree& t);

} // namespace g2t
