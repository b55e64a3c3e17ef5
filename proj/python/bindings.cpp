#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "g2t/checkpoint.hpp"
#include "g2t/config.hpp"
#include "g2t/dataset.hpp"
#include "g2t/errors.hpp"
#include "g2t/evaluation.hpp"
#include "g2t/model.hpp"
#include "g2t/output_tree.hpp"
#include "g2t/text_graph.hpp"
#include "g2t/training.hpp"
#include "g2t/vocab.hpp"

namespace py = pybind11;
using namespace g2t;

namespace {

NumberMap map_from_dict(const py::dict& d) {
    NumberMap map;
    for (const auto& item : d) {
        map.pairs.emplace_back(item.first.cast<std::string>(), item.second.cast<std::string>());
    }
    return map;
}

py::dict dict_from_map(const NumberMap& map) {
    py::dict d;
    for (const auto& [marker, literal] : map.pairs) d[py::str(marker)] = literal;
    return d;
}

py::bytes bytes_from(const std::vector<std::uint8_t>& v) {
    return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

std::vector<std::uint8_t> vec_from(const py::bytes& b) {
    const std::string s = b;
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

// Inference-oriented handle around a full training snapshot, so a model can
// be saved again without losing optimizer or stream state.
struct PyModel {
    Snapshot snap;

    static PyModel load(const std::string& path) { return {load_checkpoint(path)}; }
    static PyModel from_bytes(const py::bytes& b) { return {checkpoint_from_bytes(vec_from(b))}; }

    void save(const std::string& path) const {
        save_checkpoint(path, snap.model, snap.adam, snap.rng_state, snap.completed_epochs);
    }
    py::bytes to_bytes() const {
        return bytes_from(
            checkpoint_bytes(snap.model, snap.adam, snap.rng_state, snap.completed_epochs));
    }

    std::string predict(const Example& ex) const {
        return linearize(greedy_prediction(snap.model, ex.graph));
    }
    std::string predict_record(const DatasetRecord& rec) const {
        Example ex = make_source_example(rec, snap.model.config);
        return predict(ex);
    }

    py::dict evaluate(const std::vector<Example>& examples) const {
        std::vector<ExampleResult> rows;
        {
            py::gil_scoped_release release;
            rows = evaluate_split(snap.model, examples);
        }
        MetricSummary s = summarize(rows);
        py::list out_rows;
        for (const auto& r : rows) {
            py::dict row;
            row["id"] = r.id;
            row["exact"] = r.exact;
            row["solved"] = r.solved;
            row["prediction"] = r.prediction;
            row["gold"] = r.gold;
            out_rows.append(row);
        }
        py::dict out;
        out["count"] = s.count;
        out["exact"] = s.exact;
        out["solved"] = s.solved;
        out["exact_rate"] = s.exact_rate();
        out["solve_rate"] = s.solve_rate();
        out["rows"] = out_rows;
        return out;
    }
};

TrainResult run_training(const TrainConfig& cfg, std::vector<Example> train,
                         std::vector<Example> dev) {
    Rng rng(cfg.seed);
    Model model = make_model(cfg, build_vocabs(train), rng);
    if (!cfg.glove_path.empty()) {
        load_pretrained_embeddings(cfg.glove_path, model.vocabs.input, model.encoder.word_emb);
    }
    Trainer trainer(std::move(model), std::move(train), std::move(dev), rng);
    return trainer.run();
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Graph encoder / tree decoder structured translation toolkit";
    m.attr("__version__") = "0.1.0";

    py::register_exception<Error>(m, "Graph2TreeError");

    py::enum_<GraphType>(m, "GraphType")
        .value("DEPENDENCY", GraphType::Dependency)
        .value("CONSTITUENCY", GraphType::Constituency)
        .value("CHAIN", GraphType::Chain);
    py::enum_<AttentionMode>(m, "AttentionMode")
        .value("SEPARATED", AttentionMode::Separated)
        .value("UNIFORM", AttentionMode::Uniform)
        .value("NONE", AttentionMode::None);
    py::enum_<TaskKind>(m, "TaskKind")
        .value("SEMANTIC_PARSING", TaskKind::SemanticParsing)
        .value("MATH_WORD_PROBLEM", TaskKind::MathWordProblem);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("dropout", &TrainConfig::dropout)
        .def_readwrite("clip_norm", &TrainConfig::clip_norm)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("stop_at_full_train_match", &TrainConfig::stop_at_full_train_match)
        .def_readwrite("model_dim", &TrainConfig::model_dim)
        .def_readwrite("hops", &TrainConfig::hops)
        .def_readwrite("graph_type", &TrainConfig::graph_type)
        .def_readwrite("task", &TrainConfig::task)
        .def_readwrite("collapse_unary", &TrainConfig::collapse_unary)
        .def_readwrite("no_bilstm", &TrainConfig::no_bilstm)
        .def_readwrite("original_graphsage", &TrainConfig::original_graphsage)
        .def_readwrite("parent_feeding", &TrainConfig::parent_feeding)
        .def_readwrite("sibling_feeding", &TrainConfig::sibling_feeding)
        .def_readwrite("shared_stream_update", &TrainConfig::shared_stream_update)
        .def_readwrite("attention", &TrainConfig::attention)
        .def_readwrite("max_len", &TrainConfig::max_len)
        .def_readwrite("max_nodes", &TrainConfig::max_nodes)
        .def_readwrite("max_depth", &TrainConfig::max_depth)
        .def_readwrite("train_path", &TrainConfig::train_path)
        .def_readwrite("dev_path", &TrainConfig::dev_path)
        .def_readwrite("glove_path", &TrainConfig::glove_path)
        .def("__repr__", [](const TrainConfig& cfg) { return config_to_text(cfg); });

    m.def("load_config", &load_config, py::arg("path"));
    m.def("parse_config_text", &parse_config_text, py::arg("text"));
    m.def("config_to_text", &config_to_text, py::arg("config"));
    m.def("validate_config", &validate_config, py::arg("config"));

    py::class_<OutputTree>(m, "Tree")
        .def_property_readonly("node_count", [](const OutputTree& t) { return node_count(t); })
        .def("__str__", [](const OutputTree& t) { return linearize(t); })
        .def("__repr__", [](const OutputTree& t) { return "Tree(\"" + linearize(t) + "\")"; });

    m.def("parse_tree", &parse_to_tree, py::arg("expression"),
          "Parse a bracketed expression into a tree.");
    m.def("linearize", &linearize, py::arg("tree"));
    m.def("canonical_spacing", &canonical_spacing, py::arg("expression"));
    m.def("tokenize_bracketed", &tokenize_bracketed, py::arg("expression"));
    m.def("exact_match", &exact_match, py::arg("prediction"), py::arg("gold"));
    m.def("solve_linear", &solve_linear, py::arg("equation"),
          "Solve an equation that is affine in x; None when it is not.");
    m.def(
        "solution_accuracy",
        [](const OutputTree& pred, const py::dict& numbers, double answer) {
            return solution_accuracy(pred, map_from_dict(numbers), answer);
        },
        py::arg("prediction"), py::arg("numbers"), py::arg("answer"));
    m.def(
        "mask_numbers",
        [](const std::vector<std::string>& tokens) {
            auto [masked, map] = mask_numbers(tokens);
            return py::make_tuple(masked, dict_from_map(map));
        },
        py::arg("tokens"), "Replace numeric literals with n1, n2, ... markers.");

    py::class_<TextGraph>(m, "TextGraph")
        .def_property_readonly("size", &TextGraph::size)
        .def_readonly("word_count", &TextGraph::word_count)
        .def_property_readonly("labels",
                               [](const TextGraph& g) {
                                   std::vector<std::string> out;
                                   for (const auto& n : g.nodes) out.push_back(n.label);
                                   return out;
                               })
        .def_readonly("forward_adj", &TextGraph::forward_adj)
        .def_readonly("backward_adj", &TextGraph::backward_adj)
        .def("is_word", &TextGraph::is_word, py::arg("node_id"));

    py::class_<Vocab>(m, "Vocab")
        .def_property_readonly("size", &Vocab::size)
        .def("tokens", &Vocab::tokens)
        .def("id_of", &Vocab::id_of, py::arg("token"))
        .def("token_of", &Vocab::token_of, py::arg("token_id"))
        .def("contains", &Vocab::contains, py::arg("token"));
    py::class_<Vocabs>(m, "Vocabs")
        .def_readonly("input", &Vocabs::input)
        .def_readonly("output", &Vocabs::output);

    py::class_<DatasetRecord>(m, "DatasetRecord")
        .def(py::init<>())
        .def_readwrite("id", &DatasetRecord::id)
        .def_readwrite("source", &DatasetRecord::source)
        .def_readwrite("conllu", &DatasetRecord::conllu)
        .def_readwrite("constituency", &DatasetRecord::constituency)
        .def_readwrite("target", &DatasetRecord::target)
        .def_readwrite("answer", &DatasetRecord::answer);

    py::class_<Example>(m, "Example")
        .def_readonly("id", &Example::id)
        .def_readonly("source", &Example::source)
        .def_readonly("graph", &Example::graph)
        .def_readonly("target", &Example::target)
        .def_property_readonly("numbers",
                               [](const Example& ex) { return dict_from_map(ex.numbers); })
        .def_readonly("answer", &Example::answer);

    m.def("read_records", &read_records, py::arg("path"));
    m.def("make_example", &make_example, py::arg("record"), py::arg("config"));
    m.def("make_source_example", &make_source_example, py::arg("record"), py::arg("config"));
    m.def("load_dataset", &load_dataset, py::arg("path"), py::arg("config"));
    m.def("build_vocabs", &build_vocabs, py::arg("train_examples"));

    py::class_<EpochStats>(m, "EpochStats")
        .def_readonly("epoch", &EpochStats::epoch)
        .def_readonly("train_loss", &EpochStats::train_loss)
        .def_readonly("train_exact", &EpochStats::train_exact)
        .def_readonly("dev_exact", &EpochStats::dev_exact);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("history", &TrainResult::history)
        .def_readonly("best_epoch", &TrainResult::best_epoch)
        .def_readonly("best_dev_exact", &TrainResult::best_dev_exact)
        .def_property_readonly("best_checkpoint", [](const TrainResult& r) {
            return bytes_from(r.best_checkpoint);
        });

    m.def("train", &run_training, py::arg("config"), py::arg("train_examples"),
          py::arg("dev_examples") = std::vector<Example>{},
          py::call_guard<py::gil_scoped_release>(),
          "Train a model from scratch; returns per-epoch stats and the best checkpoint.");

    py::class_<PyModel>(m, "Model")
        .def_static("load", &PyModel::load, py::arg("path"))
        .def_static("from_bytes", &PyModel::from_bytes, py::arg("data"))
        .def("save", &PyModel::save, py::arg("path"))
        .def("to_bytes", &PyModel::to_bytes)
        .def("predict", &PyModel::predict, py::arg("example"),
             "Greedy-decode one example; returns the linearized tree.")
        .def("predict_record", &PyModel::predict_record, py::arg("record"))
        .def("evaluate", &PyModel::evaluate, py::arg("examples"))
        .def_property_readonly("config",
                               [](const PyModel& pm) { return pm.snap.model.config; })
        .def_property_readonly("vocabs", [](const PyModel& pm) { return pm.snap.model.vocabs; })
        .def_property_readonly("completed_epochs",
                               [](const PyModel& pm) { return pm.snap.completed_epochs; });
}
