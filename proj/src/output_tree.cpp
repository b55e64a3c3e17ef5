#include "g2t/output_tree.hpp"

#include <cctype>
#include <deque>
#include <sstream>

#include "g2t/errors.hpp"
#include "g2t/tokens.hpp"

namespace g2t {

namespace {

struct Located {
    std::string text;
    std::size_t pos; // character offset in the source string
};

std::vector<Located> tokenize_located(const std::string& s) {
    std::vector<Located> out;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '(' || c == ')') {
            out.push_back({std::string(1, c), i});
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' &&
               s[i] != ')') {
            ++i;
        }
        out.push_back({s.substr(start, i - start), start});
    }
    return out;
}

// Consumes tokens [i, ...) until the matching close paren (or end of input
// for the root) and fills `node`.
void parse_group(const std::vector<Located>& toks, std::size_t& i, bool is_root, TreeNode& node,
                 std::size_t open_pos) {
    while (i < toks.size()) {
        const Located& t = toks[i];
        if (t.text == "(") {
            std::size_t child_open = t.pos;
            ++i;
            TreeNode child;
            parse_group(toks, i, false, child, child_open);
            node.tokens.emplace_back(kSubTreeTok);
            node.children.push_back(std::move(child));
            continue;
        }
        if (t.text == ")") {
            if (is_root) {
                throw ParseError("unbalanced ')' at position " + std::to_string(t.pos));
            }
            if (node.tokens.empty()) {
                throw ParseError("empty group opened at position " + std::to_string(open_pos));
            }
            ++i;
            return;
        }
        if (t.text == kSubTreeTok) {
            throw ParseError("reserved token " + std::string(kSubTreeTok) +
                             " in input at position " + std::to_string(t.pos));
        }
        node.tokens.push_back(t.text);
        ++i;
    }
    if (!is_root) {
        throw ParseError("unclosed '(' at position " + std::to_string(open_pos));
    }
}

void linearize_node(const TreeNode& node, std::ostringstream& out) {
    std::size_t next_child = 0;
    bool first = true;
    for (const auto& tok : node.tokens) {
        if (!first) out << ' ';
        first = false;
        if (tok == kSubTreeTok) {
            if (next_child >= node.children.size()) {
                throw ContractError("linearize: more placeholders than children");
            }
            out << "( ";
            linearize_node(node.children[next_child++], out);
            out << " )";
        } else {
            out << tok;
        }
    }
    if (next_child != node.children.size()) {
        throw ContractError("linearize: " + std::to_string(node.children.size() - next_child) +
                            " children without placeholders");
    }
}

std::size_t count_nodes(const TreeNode& n) {
    std::size_t c = 1;
    for (const auto& ch : n.children) c += count_nodes(ch);
    return c;
}

} // namespace

std::vector<std::string> tokenize_bracketed(const std::string& s) {
    std::vector<std::string> out;
    for (auto& t : tokenize_located(s)) out.push_back(std::move(t.text));
    return out;
}

std::string canonical_spacing(const std::string& s) {
    std::ostringstream out;
    bool first = true;
    for (const auto& t : tokenize_bracketed(s)) {
        if (!first) out << ' ';
        first = false;
        out << t;
    }
    return out.str();
}

OutputTree parse_to_tree(const std::string& s) {
    auto toks = tokenize_located(s);
    if (toks.empty()) throw EmptyInputError("parse_to_tree: empty expression");
    OutputTree tree;
    std::size_t i = 0;
    parse_group(toks, i, true, tree.root, 0);
    if (tree.root.tokens.empty()) {
        // Only possible when the whole input was one group: "( x )" leaves a
        // placeholder, so this means input like "()" handled above. Guard
        // anyway for future tokenizers.
        throw ParseError("parse_to_tree: no tokens at root");
    }
    return tree;
}

std::string linearize(const OutputTree& t) {
    std::ostringstream out;
    linearize_node(t.root, out);
    return out.str();
}

std::size_t node_count(const OutputTree& t) { return count_nodes(t.root); }

std::vector<SubTask> decompose_for_training(const OutputTree& t) {
    std::vector<SubTask> tasks;
    struct Pending {
        const TreeNode* node;
        int parent;
        int sibling;
        int parent_token_pos;
    };
    std::deque<Pending> queue;
    queue.push_back({&t.root, -1, -1, -1});
    while (!queue.empty()) {
        Pending cur = queue.front();
        queue.pop_front();
        SubTask task;
        task.node = cur.node;
        task.parent = cur.parent;
        task.sibling = cur.sibling;
        task.parent_token_pos = cur.parent_token_pos;
        task.gold = cur.node->tokens;
        task.gold.emplace_back(kEosTok);
        int my_index = static_cast<int>(tasks.size());
        tasks.push_back(std::move(task));

        // Children enter the queue left to right; each one's sibling is the
        // queue position its predecessor will occupy. With breadth-first
        // order those positions are computable upfront: nodes already queued
        // come first.
        int next_index = my_index + static_cast<int>(queue.size()) + 1;
        int prev_sibling = -1;
        std::size_t child_idx = 0;
        for (std::size_t pos = 0; pos < cur.node->tokens.size(); ++pos) {
            if (cur.node->tokens[pos] != kSubTreeTok) continue;
            queue.push_back({&cur.node->children[child_idx], my_index, prev_sibling,
                             static_cast<int>(pos)});
            prev_sibling = next_index;
            ++next_index;
            ++child_idx;
        }
    }
    return tasks;
}

} // namespace g2t
