#include "g2t/dataset.hpp"

#include <fstream>
#include <sstream>

#include "g2t/errors.hpp"
#include "json.hpp"

namespace g2t {

namespace {

using nlohmann::json;

DatasetRecord record_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("record is not a JSON object");
    DatasetRecord rec;
    rec.id = j.at("id").get<std::string>();
    const json& src = j.at("source");
    if (!src.is_array() || src.empty()) throw ParseError("\"source\" must be a non-empty array");
    for (const auto& t : src) rec.source.push_back(t.get<std::string>());
    rec.target = j.value("target", std::string{}); // optional for prediction inputs
    rec.conllu = j.value("conllu", std::string{});
    rec.constituency = j.value("constituency", std::string{});
    if (j.contains("answer") && !j.at("answer").is_null()) {
        rec.answer = j.at("answer").get<double>();
    }
    return rec;
}

// Rewrites leaf labels left to right, aligning the parse with masked tokens.
void relabel_leaves(ConstNode& node, const std::vector<std::string>& tokens, std::size_t& next) {
    if (node.leaf) {
        node.label = tokens.at(next++);
        return;
    }
    for (auto& child : node.children) relabel_leaves(child, tokens, next);
}

std::string join_tokens(const std::vector<std::string>& toks) {
    std::string out;
    for (const auto& t : toks) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

const std::string* marker_of(const NumberMap& map, const std::string& literal) {
    for (const auto& [marker, lit] : map.pairs) {
        if (lit == literal) return &marker;
    }
    return nullptr;
}

} // namespace

std::vector<DatasetRecord> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset file: " + path);

    std::vector<DatasetRecord> records;
    std::vector<std::string> problems;
    std::string line;
    for (int line_no = 1; std::getline(in, line); ++line_no) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            records.push_back(record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            problems.push_back(path + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const ParseError& e) {
            problems.push_back(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!problems.empty()) {
        std::string report = std::to_string(problems.size()) + " bad dataset line(s):";
        for (const auto& p : problems) report += "\n  " + p;
        throw ParseError(report);
    }
    if (records.empty()) throw EmptyInputError("dataset has no records: " + path);
    return records;
}

Example make_source_example(const DatasetRecord& rec, const TrainConfig& cfg) {
    Example ex;
    ex.id = rec.id;
    ex.answer = rec.answer;

    std::vector<std::string> tokens = rec.source;
    if (cfg.task == TaskKind::MathWordProblem) {
        auto [masked, map] = mask_numbers(tokens);
        tokens = std::move(masked);
        ex.numbers = std::move(map);
    }
    ex.source = tokens;

    switch (cfg.graph_type) {
    case GraphType::Chain:
        ex.graph = build_chain_graph(tokens);
        break;
    case GraphType::Dependency: {
        if (rec.conllu.empty()) {
            throw ParseError("record " + rec.id + " has no dependency parse");
        }
        DependencyParse dp = parse_conllu(rec.conllu);
        if (dp.tokens != rec.source) {
            throw ParseError("record " + rec.id + ": dependency parse tokens disagree with source");
        }
        dp.tokens = tokens; // carry number masking over to the parse
        ex.graph = build_dependency_graph(tokens, dp);
        break;
    }
    case GraphType::Constituency: {
        if (rec.constituency.empty()) {
            throw ParseError("record " + rec.id + " has no constituency parse");
        }
        ConstituencyParse cp = parse_ptb(rec.constituency);
        if (leaf_tokens(cp) != rec.source) {
            throw ParseError("record " + rec.id +
                             ": constituency parse leaves disagree with source");
        }
        std::size_t next = 0;
        relabel_leaves(cp.root, tokens, next);
        ex.graph = build_constituency_graph(tokens, cp, cfg.collapse_unary);
        break;
    }
    }
    return ex;
}

Example make_example(const DatasetRecord& rec, const TrainConfig& cfg) {
    if (rec.target.empty()) throw ParseError("record " + rec.id + " has no target");
    Example ex = make_source_example(rec, cfg);

    // The target references masked numbers through their markers; literals
    // the mask never saw (constants the problem text does not spell out)
    // stay as written.
    std::vector<std::string> ttoks = tokenize_bracketed(rec.target);
    if (cfg.task == TaskKind::MathWordProblem) {
        for (auto& t : ttoks) {
            if (!is_numeric_literal(t)) continue;
            if (const std::string* marker = marker_of(ex.numbers, t)) t = *marker;
        }
    }
    ex.target = parse_to_tree(join_tokens(ttoks));
    return ex;
}

std::vector<Example> load_dataset(const std::string& path, const TrainConfig& cfg) {
    std::vector<DatasetRecord> records = read_records(path);
    std::vector<Example> out;
    std::vector<std::string> problems;
    for (std::size_t i = 0; i < records.size(); ++i) {
        try {
            out.push_back(make_example(records[i], cfg));
        } catch (const Error& e) {
            problems.push_back(path + " record " + std::to_string(i + 1) + " (id " +
                               records[i].id + "): " + e.what());
        }
    }
    if (!problems.empty()) {
        std::string report = std::to_string(problems.size()) + " unusable record(s):";
        for (const auto& p : problems) report += "\n  " + p;
        throw ParseError(report);
    }
    return out;
}

Vocabs build_vocabs(const std::vector<Example>& train) {
    if (train.empty()) throw EmptyInputError("build_vocabs: empty training set");
    Vocabs v;
    for (const Example& ex : train) {
        for (const auto& tok : ex.source) v.input.add(tok);
        for (const auto& node : ex.graph.nodes) {
            if (node.kind == NodeKind::Relation) v.input.add(kRelPrefix + node.label);
        }
        std::vector<const TreeNode*> stack{&ex.target.root};
        while (!stack.empty()) {
            const TreeNode* n = stack.back();
            stack.pop_back();
            for (const auto& tok : n->tokens) v.output.add(tok);
            for (const auto& child : n->children) stack.push_back(&child);
        }
    }
    return v;
}

} // namespace g2t
