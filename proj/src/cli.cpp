#include "g2t/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "g2t/checkpoint.hpp"
#include "g2t/config.hpp"
#include "g2t/dataset.hpp"
#include "g2t/errors.hpp"
#include "g2t/gradcheck.hpp"
#include "g2t/model.hpp"
#include "g2t/training.hpp"
#include "json.hpp"

namespace g2t {

namespace {

using nlohmann::json;

struct CommonFlags {
    std::string config_path;
    std::string graph;
    std::string task;
    std::optional<std::uint64_t> seed;
    std::string checkpoint_path;
    std::string out_path;
    std::string data_path;
};

// Seed precedence: config file < --seed < G2T_SEED.
void apply_seed(TrainConfig& cfg, const CommonFlags& f) {
    if (f.seed) cfg.seed = *f.seed;
    if (const char* env = std::getenv("G2T_SEED")) {
        std::size_t used = 0;
        std::string s(env);
        std::uint64_t v = std::stoull(s, &used);
        if (used != s.size()) throw ParseError("G2T_SEED is not a number: " + s);
        cfg.seed = v;
    }
}

void apply_overrides(TrainConfig& cfg, const CommonFlags& f) {
    if (!f.graph.empty()) cfg.graph_type = graph_type_from(f.graph);
    if (!f.task.empty()) cfg.task = task_from(f.task);
    apply_seed(cfg, f);
    validate_config(cfg);
}

// Writes either to --out or to stdout.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::trunc);
            if (!file_) throw Error("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

int cmd_preprocess(const CommonFlags& f) {
    TrainConfig cfg = load_config(f.config_path);
    apply_overrides(cfg, f);
    if (cfg.train_path.empty()) throw Error("config sets no train_path");

    std::vector<Example> train = load_dataset(cfg.train_path, cfg);
    std::vector<Example> dev;
    if (!cfg.dev_path.empty()) dev = load_dataset(cfg.dev_path, cfg);
    Vocabs vocabs = build_vocabs(train);

    std::size_t graph_nodes = 0;
    std::size_t tree_nodes = 0;
    std::size_t relation_nodes = 0;
    for (const Example& ex : train) {
        graph_nodes += ex.graph.size();
        tree_nodes += node_count(ex.target);
        relation_nodes += ex.graph.size() - ex.graph.word_count;
    }

    json stats{
        {"train_examples", train.size()},
        {"dev_examples", dev.size()},
        {"input_vocab", vocabs.input.size()},
        {"output_vocab", vocabs.output.size()},
        {"graph_type", to_string(cfg.graph_type)},
        {"graph_nodes_total", graph_nodes},
        {"graph_nodes_mean", static_cast<double>(graph_nodes) / static_cast<double>(train.size())},
        {"relation_nodes_total", relation_nodes},
        {"tree_nodes_total", tree_nodes},
    };
    Sink sink(f.out_path);
    sink.stream() << stats.dump() << "\n";
    return 0;
}

int cmd_train(const CommonFlags& f) {
    TrainConfig cfg = load_config(f.config_path);
    apply_overrides(cfg, f);
    if (cfg.train_path.empty()) throw Error("config sets no train_path");

    std::vector<Example> train = load_dataset(cfg.train_path, cfg);
    std::vector<Example> dev;
    if (!cfg.dev_path.empty()) dev = load_dataset(cfg.dev_path, cfg);

    Rng rng(cfg.seed);
    Model model = make_model(cfg, build_vocabs(train), rng);
    if (!cfg.glove_path.empty()) {
        std::size_t applied =
            load_pretrained_embeddings(cfg.glove_path, model.vocabs.input, model.encoder.word_emb);
        std::cerr << "pretrained embeddings applied to " << applied << " tokens\n";
    }

    Trainer trainer(std::move(model), std::move(train), std::move(dev), rng);
    TrainResult res = trainer.run();
    for (const EpochStats& st : res.history) {
        json row{{"epoch", st.epoch},
                 {"train_loss", st.train_loss},
                 {"train_exact", st.train_exact},
                 {"dev_exact", st.dev_exact}};
        std::cout << row.dump() << "\n";
    }

    std::string out = f.out_path.empty() ? "model.g2t" : f.out_path;
    std::ofstream ckpt(out, std::ios::binary | std::ios::trunc);
    if (!ckpt) throw Error("cannot open checkpoint file for writing: " + out);
    ckpt.write(reinterpret_cast<const char*>(res.best_checkpoint.data()),
               static_cast<std::streamsize>(res.best_checkpoint.size()));
    if (!ckpt) throw Error("failed writing checkpoint: " + out);

    json summary{{"best_epoch", res.best_epoch},
                 {"best_dev_exact", res.best_dev_exact},
                 {"checkpoint", out}};
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_eval(const CommonFlags& f) {
    Snapshot snap = load_checkpoint(f.checkpoint_path);
    TrainConfig cfg = snap.model.config;
    if (!f.graph.empty()) cfg.graph_type = graph_type_from(f.graph);
    if (!f.task.empty()) cfg.task = task_from(f.task);

    std::string data = f.data_path.empty() ? cfg.dev_path : f.data_path;
    if (data.empty()) throw Error("no data file: pass one or set dev_path in the config");
    std::vector<Example> split = load_dataset(data, cfg);

    std::vector<ExampleResult> rows;
    rows.reserve(split.size());
    for (const Example& ex : split) rows.push_back(evaluate_example(snap.model, ex, cfg.task));

    Sink sink(f.out_path);
    for (const auto& r : rows) {
        json row{{"id", r.id},
                 {"exact_match", r.exact},
                 {"solution_correct", r.solved},
                 {"prediction", r.prediction},
                 {"gold", r.gold}};
        sink.stream() << row.dump() << "\n";
    }
    MetricSummary s = summarize(rows);
    json summary{{"examples", s.count},
                 {"exact_match_rate", s.exact_rate()},
                 {"solution_accuracy_rate", s.solve_rate()}};
    sink.stream() << summary.dump() << "\n";
    return 0;
}

int cmd_predict(const CommonFlags& f) {
    Snapshot snap = load_checkpoint(f.checkpoint_path);
    TrainConfig cfg = snap.model.config;
    if (!f.graph.empty()) cfg.graph_type = graph_type_from(f.graph);
    if (!f.task.empty()) cfg.task = task_from(f.task);
    if (f.data_path.empty()) throw Error("predict needs an input file");

    Sink sink(f.out_path);
    for (const DatasetRecord& rec : read_records(f.data_path)) {
        Example ex = make_source_example(rec, cfg);
        OutputTree pred = greedy_prediction(snap.model, ex.graph);
        sink.stream() << linearize(pred) << "\n";
    }
    return 0;
}

int cmd_gradcheck(const CommonFlags& f) {
    TrainConfig cfg;
    cfg.model_dim = 6;
    cfg.hops = 2;
    cfg.dropout = 0.0;
    cfg.seed = 7; // probe default when neither --seed nor G2T_SEED is given
    apply_seed(cfg, f);

    Vocabs vocabs;
    for (const char* w : {"numbers", "grow", "fast"}) vocabs.input.add(w);
    vocabs.input.add(std::string(kRelPrefix) + "det");
    vocabs.input.add(std::string(kRelPrefix) + "nsubj");
    for (const char* t : {"n1", "n2", "x", "+", "*", "="}) vocabs.output.add(t);

    TextGraph graph;
    {
        DependencyParse dp;
        dp.tokens = {"numbers", "grow", "fast"};
        dp.root_index = 1;
        dp.arcs = {{1, "nsubj", 0}, {1, "det", 2}};
        graph = build_dependency_graph(dp.tokens, dp);
    }
    OutputTree gold = parse_to_tree("( n1 + n2 ) * x");

    Rng rng(cfg.seed);
    Model model = make_model(cfg, std::move(vocabs), rng);
    // keep the pooled-layer pre-activations off exact ReLU kinks, where the
    // two-sided difference quotient and the subgradient legitimately differ
    model.encoder.fc_b.set_values({0.01, 0.02, 0.03, 0.04, 0.05, 0.06});

    auto forward = [&]() -> Tensor { return model_loss(model, graph, gold); };
    Rng pick(17);
    GradCheckReport rep = check_gradients(forward, named_tensors(model), 4, 1e-5, &pick);

    std::cout << "probes: " << rep.checked << "\n";
    std::cout << "worst: " << rep.worst_tensor << "[" << rep.worst_index
              << "] relative error " << rep.max_rel_error << "\n";
    if (!rep.ok(1e-4)) {
        std::cerr << "gradient check FAILED (tolerance 1e-4): analytic " << rep.analytic
                  << " vs numeric " << rep.numeric << "\n";
        return 1;
    }
    std::cout << "gradient check passed (tolerance 1e-4)\n";
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"graph-to-tree structured translation toolkit"};
    app.require_subcommand(1);
    CommonFlags f;

    CLI::App* pre = app.add_subcommand("preprocess", "validate a dataset and print statistics");
    pre->add_option("--config", f.config_path, "run configuration file")->required();
    pre->add_option("--graph", f.graph, "graph type override: dependency|constituency|chain");
    pre->add_option("--task", f.task, "task override: sp|mwp");
    pre->add_option("--seed", f.seed, "seed override");
    pre->add_option("--out", f.out_path, "write the report here instead of stdout");

    CLI::App* train = app.add_subcommand("train", "train a model from a config");
    train->add_option("--config", f.config_path, "run configuration file")->required();
    train->add_option("--graph", f.graph, "graph type override: dependency|constituency|chain");
    train->add_option("--task", f.task, "task override: sp|mwp");
    train->add_option("--seed", f.seed, "seed override");
    train->add_option("--out", f.out_path, "checkpoint output path (default model.g2t)");

    CLI::App* eval = app.add_subcommand("eval", "score a checkpoint on a dataset");
    eval->add_option("--checkpoint", f.checkpoint_path, "trained model file")->required();
    eval->add_option("--graph", f.graph, "graph type override: dependency|constituency|chain");
    eval->add_option("--task", f.task, "task override: sp|mwp");
    eval->add_option("--out", f.out_path, "write the report here instead of stdout");
    eval->add_option("data", f.data_path, "dataset to score (default: config dev_path)");

    CLI::App* predict = app.add_subcommand("predict", "decode inputs into bracketed trees");
    predict->add_option("--checkpoint", f.checkpoint_path, "trained model file")->required();
    predict->add_option("--graph", f.graph, "graph type override: dependency|constituency|chain");
    predict->add_option("--task", f.task, "task override: sp|mwp");
    predict->add_option("--out", f.out_path, "write predictions here instead of stdout");
    predict->add_option("data", f.data_path, "input records, one JSON object per line")
        ->required();

    CLI::App* gradcheck =
        app.add_subcommand("gradcheck", "finite-difference check of the whole model");
    gradcheck->add_option("--seed", f.seed, "seed for the probe model");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (pre->parsed()) return cmd_preprocess(f);
        if (train->parsed()) return cmd_train(f);
        if (eval->parsed()) return cmd_eval(f);
        if (predict->parsed()) return cmd_predict(f);
        if (gradcheck->parsed()) return cmd_gradcheck(f);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace g2t
