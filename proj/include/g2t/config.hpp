#pragma once

#include <cstdint>
#include <string>

namespace g2t {

enum class GraphType { Dependency, Constituency, Chain };
enum class AttentionMode { Separated, Uniform, None };
enum class TaskKind { SemanticParsing, MathWordProblem };

// Every knob of a run. Defaults are the desk-scale ones; the file format is
// "key = value" lines with '#' comments.
struct TrainConfig {
    // optimization
    double learning_rate = 0.001;
    int batch_size = 30;
    int epochs = 50;
    double dropout = 0.0; // drop probability on initial node states
    double clip_norm = 5.0;
    std::uint64_t seed = 1;
    bool stop_at_full_train_match = false; // end early once train exact-match hits 1.0

    // architecture
    int model_dim = 300; // node state size; BiLSTM halves are model_dim/2
    int hops = 2;        // aggregation rounds K

    // input/output handling
    GraphType graph_type = GraphType::Constituency;
    TaskKind task = TaskKind::MathWordProblem;
    bool collapse_unary = true;

    // ablations
    bool no_bilstm = false;
    bool original_graphsage = false;
    bool parent_feeding = true;
    bool sibling_feeding = true;
    bool shared_stream_update = false; // one state history for both directions
    AttentionMode attention = AttentionMode::Separated;

    // decode limits
    int max_len = 60;
    int max_nodes = 30;
    int max_depth = 8;

    // file inputs
    std::string train_path;
    std::string dev_path;
    std::string glove_path;
};

const char* to_string(GraphType t);
const char* to_string(AttentionMode m);
const char* to_string(TaskKind k);
GraphType graph_type_from(const std::string& s);
AttentionMode attention_from(const std::string& s);
TaskKind task_from(const std::string& s);

// Parses "key = value" text. Unknown keys and malformed values are errors;
// missing keys keep their defaults. Validation runs at the end.
TrainConfig parse_config_text(const std::string& text);
TrainConfig load_config(const std::string& path);
void validate_config(const TrainConfig& cfg);

// Canonical echo: every key, sorted, one per line. Stored in checkpoints and
// reparseable by parse_config_text.
std::string config_to_text(const TrainConfig& cfg);

} // namespace g2t
