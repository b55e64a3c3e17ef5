#include "g2t/text_graph.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

#include "g2t/errors.hpp"

namespace g2t {

namespace {

class GraphBuilder {
public:
    explicit GraphBuilder(const std::vector<std::string>& tokens) {
        if (tokens.empty()) throw EmptyInputError("text graph: no tokens");
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            GraphNode n;
            n.id = static_cast<int>(i);
            n.kind = NodeKind::Word;
            n.label = tokens[i];
            n.seq_pos = static_cast<int>(i);
            g_.nodes.push_back(std::move(n));
        }
        g_.word_count = tokens.size();
    }

    int add_relation(const std::string& label) {
        int id = static_cast<int>(g_.nodes.size());
        GraphNode n;
        n.id = id;
        n.kind = NodeKind::Relation;
        n.label = label;
        g_.nodes.push_back(std::move(n));
        return id;
    }

    void add_edge(int from, int to) {
        if (from == to) throw ContractError("text graph: self loop on node " + std::to_string(from));
        edges_.emplace_back(from, to);
    }

    TextGraph finish() {
        std::size_t n = g_.nodes.size();
        std::sort(edges_.begin(), edges_.end());
        if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
            throw ContractError("text graph: duplicate edge");
        }
        g_.forward_adj.assign(n, {});
        g_.backward_adj.assign(n, {});
        for (const auto& [from, to] : edges_) {
            g_.forward_adj[static_cast<std::size_t>(from)].push_back(to);
            g_.backward_adj[static_cast<std::size_t>(to)].push_back(from);
        }
        for (auto& adj : g_.backward_adj) std::sort(adj.begin(), adj.end());
        return std::move(g_);
    }

private:
    TextGraph g_;
    std::vector<std::pair<int, int>> edges_;
};

void collect_leaves(const ConstNode& n, std::vector<std::string>& out) {
    if (n.leaf) {
        out.push_back(n.label);
        return;
    }
    for (const auto& c : n.children) collect_leaves(c, out);
}

// Walks one constituent subtree, emitting relation nodes and edges.
// `next_leaf` advances through the word nodes left to right.
int walk_constituent(GraphBuilder& b, const ConstNode& node,
                     const std::vector<std::string>& tokens, std::size_t& next_leaf,
                     bool collapse) {
    const ConstNode* cur = &node;
    std::string label = cur->label;
    if (collapse) {
        // A run of single-child constituents is one "line"; keep descending
        // while the only child is internal, joining labels top-down.
        while (cur->children.size() == 1 && !cur->children[0].leaf) {
            cur = &cur->children[0];
            label += "+";
            label += cur->label;
        }
    }
    int rel_id = b.add_relation(label);
    for (const auto& child : cur->children) {
        if (child.leaf) {
            if (next_leaf >= tokens.size() || child.label != tokens[next_leaf]) {
                throw ParseError("constituency alignment: leaf '" + child.label +
                                 "' does not match token " + std::to_string(next_leaf));
            }
            b.add_edge(rel_id, static_cast<int>(next_leaf));
            ++next_leaf;
        } else {
            int child_id = walk_constituent(b, child, tokens, next_leaf, collapse);
            b.add_edge(rel_id, child_id);
        }
    }
    return rel_id;
}

std::vector<std::string> split_columns(const std::string& line) {
    std::vector<std::string> cols;
    if (line.find('\t') != std::string::npos) {
        std::size_t start = 0;
        while (true) {
            std::size_t tab = line.find('\t', start);
            if (tab == std::string::npos) {
                cols.push_back(line.substr(start));
                break;
            }
            cols.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
    } else {
        std::istringstream in(line);
        std::string col;
        while (in >> col) cols.push_back(std::move(col));
    }
    return cols;
}

} // namespace

DependencyParse parse_conllu(const std::string& text) {
    DependencyParse parse;
    struct RawArc {
        int head;
        std::string label;
    };
    std::vector<RawArc> raw;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto cols = split_columns(line);
        if (cols.empty()) continue;
        // Multiword ranges (1-2) and empty nodes (1.1) carry no arcs.
        if (cols[0].find('-') != std::string::npos || cols[0].find('.') != std::string::npos) {
            continue;
        }
        if (cols.size() < 8) {
            throw ParseError("conllu line " + std::to_string(line_no) + ": expected 8+ columns, got " +
                             std::to_string(cols.size()));
        }
        int id = 0, head = 0;
        try {
            id = std::stoi(cols[0]);
            head = std::stoi(cols[6]);
        } catch (const std::exception&) {
            throw ParseError("conllu line " + std::to_string(line_no) + ": non-numeric ID or HEAD");
        }
        if (id != static_cast<int>(parse.tokens.size()) + 1) {
            throw ParseError("conllu line " + std::to_string(line_no) + ": IDs must run 1..n, got " +
                             std::to_string(id));
        }
        parse.tokens.push_back(cols[1]);
        raw.push_back({head, cols[7]});
    }
    if (parse.tokens.empty()) throw EmptyInputError("conllu: no token lines");
    int n = static_cast<int>(parse.tokens.size());
    for (int i = 0; i < n; ++i) {
        int head = raw[static_cast<std::size_t>(i)].head;
        if (head < 0 || head > n) {
            throw ParseError("conllu: HEAD " + std::to_string(head) + " out of range for token " +
                             std::to_string(i + 1));
        }
        if (head == 0) {
            if (parse.root_index >= 0) throw ParseError("conllu: more than one root token");
            parse.root_index = i;
        } else {
            parse.arcs.push_back({head - 1, raw[static_cast<std::size_t>(i)].label, i});
        }
    }
    if (parse.root_index < 0) throw ParseError("conllu: no root token (HEAD = 0)");
    return parse;
}

ConstituencyParse parse_ptb(const std::string& text) {
    struct Tok {
        std::string s;
        std::size_t pos;
    };
    std::vector<Tok> toks;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '(' || c == ')') {
            toks.push_back({std::string(1, c), i});
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
               text[i] != '(' && text[i] != ')') {
            ++i;
        }
        toks.push_back({text.substr(start, i - start), start});
    }
    if (toks.empty()) throw EmptyInputError("ptb: empty parse");

    std::size_t at = 0;
    std::function<ConstNode()> parse_node = [&]() -> ConstNode {
        if (toks[at].s != "(") {
            throw ParseError("ptb: expected '(' at position " + std::to_string(toks[at].pos));
        }
        std::size_t open_pos = toks[at].pos;
        ++at;
        if (at >= toks.size() || toks[at].s == "(" || toks[at].s == ")") {
            throw ParseError("ptb: constituent opened at position " + std::to_string(open_pos) +
                             " has no label");
        }
        ConstNode node;
        node.label = toks[at].s;
        ++at;
        while (at < toks.size() && toks[at].s != ")") {
            if (toks[at].s == "(") {
                node.children.push_back(parse_node());
            } else {
                ConstNode leaf;
                leaf.label = toks[at].s;
                leaf.leaf = true;
                node.children.push_back(std::move(leaf));
                ++at;
            }
        }
        if (at >= toks.size()) {
            throw ParseError("ptb: unclosed '(' at position " + std::to_string(open_pos));
        }
        ++at; // consume ')'
        if (node.children.empty()) {
            throw ParseError("ptb: constituent '" + node.label + "' at position " +
                             std::to_string(open_pos) + " has no children");
        }
        return node;
    };

    ConstituencyParse parse;
    parse.root = parse_node();
    if (at != toks.size()) {
        throw ParseError("ptb: trailing content at position " + std::to_string(toks[at].pos));
    }
    return parse;
}

std::vector<std::string> leaf_tokens(const ConstituencyParse& parse) {
    std::vector<std::string> out;
    collect_leaves(parse.root, out);
    return out;
}

TextGraph build_dependency_graph(const std::vector<std::string>& tokens,
                                 const DependencyParse& parse) {
    if (parse.tokens != tokens) {
        throw ParseError("dependency graph: parse tokens do not match sentence tokens");
    }
    GraphBuilder b(tokens);
    int n = static_cast<int>(tokens.size());
    if (parse.root_index < 0 || parse.root_index >= n) {
        throw ParseError("dependency graph: root index " + std::to_string(parse.root_index) +
                         " out of range");
    }
    for (int i = 0; i + 1 < n; ++i) b.add_edge(i, i + 1); // forward sequence chain
    for (const auto& arc : parse.arcs) {
        if (arc.head < 0 || arc.head >= n || arc.dependent < 0 || arc.dependent >= n) {
            throw ParseError("dependency graph: arc " + std::to_string(arc.head) + "->" +
                             std::to_string(arc.dependent) + " out of range");
        }
        int rel = b.add_relation(arc.label);
        b.add_edge(arc.head, rel);
        b.add_edge(rel, arc.dependent);
    }
    return b.finish();
}

TextGraph build_constituency_graph(const std::vector<std::string>& tokens,
                                   const ConstituencyParse& parse, bool collapse_unary_chains) {
    auto leaves = leaf_tokens(parse);
    if (leaves != tokens) {
        throw ParseError("constituency graph: parse leaves do not match sentence tokens (" +
                         std::to_string(leaves.size()) + " leaves, " +
                         std::to_string(tokens.size()) + " tokens)");
    }
    GraphBuilder b(tokens);
    int n = static_cast<int>(tokens.size());
    for (int i = 0; i + 1 < n; ++i) {
        b.add_edge(i, i + 1);
        b.add_edge(i + 1, i);
    }
    // The top constituent is cut: walk its children directly.
    std::size_t next_leaf = 0;
    for (const auto& child : parse.root.children) {
        if (child.leaf) {
            ++next_leaf; // a token directly under the cut root leaves no trace
        } else {
            walk_constituent(b, child, tokens, next_leaf, collapse_unary_chains);
        }
    }
    return b.finish();
}

TextGraph build_chain_graph(const std::vector<std::string>& tokens) {
    GraphBuilder b(tokens);
    int n = static_cast<int>(tokens.size());
    for (int i = 0; i + 1 < n; ++i) {
        b.add_edge(i, i + 1);
        b.add_edge(i + 1, i);
    }
    return b.finish();
}

} // namespace g2t
