#include "g2t/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "g2t/errors.hpp"

namespace g2t {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ParseError("config: " + key + " expects true/false, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ParseError("config: " + key + " expects a number, got '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        int i = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ParseError("config: " + key + " expects an integer, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        unsigned long long u = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw ParseError("config: " + key + " expects an unsigned integer, got '" + v + "'");
    }
}

std::string fmt_double(double d) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

} // namespace

const char* to_string(GraphType t) {
    switch (t) {
        case GraphType::Dependency: return "dependency";
        case GraphType::Constituency: return "constituency";
        case GraphType::Chain: return "chain";
    }
    return "?";
}

const char* to_string(AttentionMode m) {
    switch (m) {
        case AttentionMode::Separated: return "separated";
        case AttentionMode::Uniform: return "uniform";
        case AttentionMode::None: return "none";
    }
    return "?";
}

const char* to_string(TaskKind k) {
    switch (k) {
        case TaskKind::SemanticParsing: return "sp";
        case TaskKind::MathWordProblem: return "mwp";
    }
    return "?";
}

GraphType graph_type_from(const std::string& s) {
    if (s == "dependency") return GraphType::Dependency;
    if (s == "constituency") return GraphType::Constituency;
    if (s == "chain") return GraphType::Chain;
    throw ParseError("config: unknown graph_type '" + s + "'");
}

AttentionMode attention_from(const std::string& s) {
    if (s == "separated") return AttentionMode::Separated;
    if (s == "uniform") return AttentionMode::Uniform;
    if (s == "none") return AttentionMode::None;
    throw ParseError("config: unknown attention mode '" + s + "'");
}

TaskKind task_from(const std::string& s) {
    if (s == "sp") return TaskKind::SemanticParsing;
    if (s == "mwp") return TaskKind::MathWordProblem;
    throw ParseError("config: unknown task '" + s + "'");
}

TrainConfig parse_config_text(const std::string& text) {
    TrainConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key == "learning_rate") cfg.learning_rate = parse_double(key, val);
        else if (key == "batch_size") cfg.batch_size = parse_int(key, val);
        else if (key == "epochs") cfg.epochs = parse_int(key, val);
        else if (key == "dropout") cfg.dropout = parse_double(key, val);
        else if (key == "clip_norm") cfg.clip_norm = parse_double(key, val);
        else if (key == "seed") cfg.seed = parse_u64(key, val);
        else if (key == "stop_at_full_train_match") cfg.stop_at_full_train_match = parse_bool(key, val);
        else if (key == "model_dim") cfg.model_dim = parse_int(key, val);
        else if (key == "hops") cfg.hops = parse_int(key, val);
        else if (key == "graph_type") cfg.graph_type = graph_type_from(val);
        else if (key == "task") cfg.task = task_from(val);
        else if (key == "collapse_unary") cfg.collapse_unary = parse_bool(key, val);
        else if (key == "no_bilstm") cfg.no_bilstm = parse_bool(key, val);
        else if (key == "original_graphsage") cfg.original_graphsage = parse_bool(key, val);
        else if (key == "parent_feeding") cfg.parent_feeding = parse_bool(key, val);
        else if (key == "sibling_feeding") cfg.sibling_feeding = parse_bool(key, val);
        else if (key == "shared_stream_update") cfg.shared_stream_update = parse_bool(key, val);
        else if (key == "attention") cfg.attention = attention_from(val);
        else if (key == "max_len") cfg.max_len = parse_int(key, val);
        else if (key == "max_nodes") cfg.max_nodes = parse_int(key, val);
        else if (key == "max_depth") cfg.max_depth = parse_int(key, val);
        else if (key == "train_path") cfg.train_path = val;
        else if (key == "dev_path") cfg.dev_path = val;
        else if (key == "glove_path") cfg.glove_path = val;
        else throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    validate_config(cfg);
    return cfg;
}

TrainConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void validate_config(const TrainConfig& cfg) {
    if (!(cfg.learning_rate > 0)) throw ParseError("config: learning_rate must be > 0");
    if (cfg.dropout < 0 || cfg.dropout >= 1) throw ParseError("config: dropout must be in [0, 1)");
    if (cfg.batch_size < 1) throw ParseError("config: batch_size must be >= 1");
    if (cfg.epochs < 0) throw ParseError("config: epochs must be >= 0");
    if (cfg.hops < 1) throw ParseError("config: hops must be >= 1");
    if (cfg.model_dim < 2 || cfg.model_dim % 2 != 0) {
        throw ParseError("config: model_dim must be even and >= 2");
    }
    if (!(cfg.clip_norm > 0)) throw ParseError("config: clip_norm must be > 0");
    if (cfg.max_len < 1 || cfg.max_nodes < 1 || cfg.max_depth < 1) {
        throw ParseError("config: decode limits must be >= 1");
    }
}

std::string config_to_text(const TrainConfig& cfg) {
    std::ostringstream out; // keys in sorted order
    out << "attention = " << to_string(cfg.attention) << '\n';
    out << "batch_size = " << cfg.batch_size << '\n';
    out << "clip_norm = " << fmt_double(cfg.clip_norm) << '\n';
    out << "collapse_unary = " << (cfg.collapse_unary ? "true" : "false") << '\n';
    out << "dev_path = " << cfg.dev_path << '\n';
    out << "dropout = " << fmt_double(cfg.dropout) << '\n';
    out << "epochs = " << cfg.epochs << '\n';
    out << "glove_path = " << cfg.glove_path << '\n';
    out << "graph_type = " << to_string(cfg.graph_type) << '\n';
    out << "hops = " << cfg.hops << '\n';
    out << "learning_rate = " << fmt_double(cfg.learning_rate) << '\n';
    out << "max_depth = " << cfg.max_depth << '\n';
    out << "max_len = " << cfg.max_len << '\n';
    out << "max_nodes = " << cfg.max_nodes << '\n';
    out << "model_dim = " << cfg.model_dim << '\n';
    out << "no_bilstm = " << (cfg.no_bilstm ? "true" : "false") << '\n';
    out << "original_graphsage = " << (cfg.original_graphsage ? "true" : "false") << '\n';
    out << "parent_feeding = " << (cfg.parent_feeding ? "true" : "false") << '\n';
    out << "seed = " << cfg.seed << '\n';
    out << "shared_stream_update = " << (cfg.shared_stream_update ? "true" : "false") << '\n';
    out << "sibling_feeding = " << (cfg.sibling_feeding ? "true" : "false") << '\n';
    out << "stop_at_full_train_match = " << (cfg.stop_at_full_train_match ? "true" : "false") << '\n';
    out << "task = " << to_string(cfg.task) << '\n';
    out << "train_path = " << cfg.train_path << '\n';
    return out.str();
}

} // namespace g2t
