#pragma once

#include <optional>
#include <string>
#include <vector>

#include "g2t/config.hpp"
#include "g2t/evaluation.hpp"
#include "g2t/output_tree.hpp"
#include "g2t/text_graph.hpp"
#include "g2t/vocab.hpp"

namespace g2t {

// One JSON-lines row of a dataset file. Parses travel as embedded strings so
// a split is a single self-contained file.
struct DatasetRecord {
    std::string id;
    std::vector<std::string> source; // tokenized sentence
    std::string conllu;              // dependency parse block; empty when absent
    std::string constituency;        // bracketed parse; empty when absent
    std::string target;              // bracketed output expression
    std::optional<double> answer;    // numeric answer for the equation task
};

// A loaded and validated unit of training or evaluation.
struct Example {
    std::string id;
    std::vector<std::string> source; // number-masked for the equation task
    TextGraph graph;
    OutputTree target;
    NumberMap numbers;
    std::optional<double> answer;
};

// Parses the file into raw records without validating their content.
std::vector<DatasetRecord> read_records(const std::string& path);

// Builds the example a record describes: masks numbers (equation task),
// constructs the configured graph over the masked tokens with the embedded
// parse supplying structure, and parses the target. Target literals bound by
// the mask become their markers; other literals stay as written.
Example make_example(const DatasetRecord& rec, const TrainConfig& cfg);

// Prediction-time view of a record: source, graph and number map only. The
// target may be absent and is left as an empty tree.
Example make_source_example(const DatasetRecord& rec, const TrainConfig& cfg);

// Loads a whole split. Problems are collected per line and reported together
// in one error; any problem aborts the load.
std::vector<Example> load_dataset(const std::string& path, const TrainConfig& cfg);

// Input vocabulary from source tokens plus prefixed relation labels, output
// vocabulary from target-tree tokens, both over the training split only.
Vocabs build_vocabs(const std::vector<Example>& train);

} // namespace g2t
