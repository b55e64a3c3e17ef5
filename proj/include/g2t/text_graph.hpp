#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace g2t {

enum class NodeKind { Word, Relation };

struct GraphNode {
    int id = 0;
    NodeKind kind = NodeKind::Word;
    std::string label;
    int seq_pos = -1; // position in the sentence; -1 for relation nodes
};

// Heterogeneous directed graph over word nodes (the sentence, ids
// 0..word_count-1 in sequence order) and relation nodes (parse labels,
// appended in first-use order). backward_adj is always the transpose of
// forward_adj, and every adjacency list is sorted ascending so that
// aggregation order is fixed.
struct TextGraph {
    std::vector<GraphNode> nodes;
    std::vector<std::vector<int>> forward_adj;
    std::vector<std::vector<int>> backward_adj;
    std::size_t word_count = 0;

    std::size_t size() const { return nodes.size(); }
    bool is_word(int id) const { return nodes[static_cast<std::size_t>(id)].kind == NodeKind::Word; }
};

// One dependency arc head --label--> dependent. The root arc is not stored
// as an arc; its dependent index lives in DependencyParse::root_index.
struct DepArc {
    int head = 0;
    std::string label;
    int dependent = 0;
};

struct DependencyParse {
    std::vector<std::string> tokens;
    std::vector<DepArc> arcs; // non-root arcs only
    int root_index = -1;
};

// Ordered constituency tree. A leaf's label is the surface token.
struct ConstNode {
    std::string label;
    std::vector<ConstNode> children;
    bool leaf = false;
};

struct ConstituencyParse {
    ConstNode root;
};

// One CoNLL-U sentence block: columns ID, FORM, HEAD, DEPREL are read, the
// rest are ignored. Exactly one token must attach to the virtual root
// (HEAD = 0).
DependencyParse parse_conllu(const std::string& text);

// Single-line PTB-style bracketed tree, e.g. "(ROOT (NP (NNS jobs)))".
ConstituencyParse parse_ptb(const std::string& text);

std::vector<std::string> leaf_tokens(const ConstituencyParse& parse);

// Word nodes chained forward only; each arc becomes a relation node with
// edges head -> relation -> dependent. The root arc contributes nothing.
TextGraph build_dependency_graph(const std::vector<std::string>& tokens,
                                 const DependencyParse& parse);

// Word nodes chained in both directions; constituents become relation nodes
// with parent -> child edges, leaves merging into the word chain. The top
// constituent is cut, and runs of single-child relation nodes collapse into
// one node with "+"-joined labels. `collapse_unary_chains` exists for
// inspecting graphs without that simplification.
TextGraph build_constituency_graph(const std::vector<std::string>& tokens,
                                   const ConstituencyParse& parse,
                                   bool collapse_unary_chains = true);

// Bidirectional word chain only; no relation nodes.
TextGraph build_chain_graph(const std::vector<std::string>& tokens);

} // namespace g2t
