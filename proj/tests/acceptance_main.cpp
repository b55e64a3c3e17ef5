// Acceptance gate for the toolkit: nine end-to-end checks, one line each.
// Run from the repository root so configs/ and tests/fixtures/ resolve.
// Optional arguments select a subset by number, e.g. "g2t_acceptance 1 8".

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "g2t/checkpoint.hpp"
#include "g2t/config.hpp"
#include "g2t/dataset.hpp"
#include "g2t/errors.hpp"
#include "g2t/evaluation.hpp"
#include "g2t/gradcheck.hpp"
#include "g2t/model.hpp"
#include "g2t/output_tree.hpp"
#include "g2t/tensor.hpp"
#include "g2t/text_graph.hpp"
#include "g2t/training.hpp"
#include "json.hpp"

using namespace g2t;
using json = nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

// ---------- shared fixtures ----------

// Smooth values away from ReLU kinks and pooling ties: strictly increasing
// with an irregular step, mixed signs.
std::vector<double> smooth_values(std::size_t n) {
    std::vector<double> out(n);
    double v = -1.3;
    for (std::size_t i = 0; i < n; ++i) {
        v += 0.23 + 0.011 * static_cast<double>((i * 5) % 7);
        out[i] = v;
    }
    return out;
}

Tensor smooth_param(Shape shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return Tensor::param(shape, smooth_values(n));
}

// Deterministic weighted sum so every output coordinate influences the loss.
Tensor probe(const Tensor& t) {
    std::vector<double> w(t.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = 0.31 + 0.17 * static_cast<double>((i * 7) % 11);
    }
    return sum(mul(t, Tensor::from(t.shape(), std::move(w))));
}

TextGraph five_node_graph() {
    TextGraph g;
    const std::vector<std::string> words = {"the", "dog", "ran"};
    const std::vector<std::string> rels = {"det", "nsubj"};
    int id = 0;
    for (const auto& w : words) {
        g.nodes.push_back({id, NodeKind::Word, w, id});
        ++id;
    }
    for (const auto& r : rels) {
        g.nodes.push_back({id, NodeKind::Relation, r, -1});
        ++id;
    }
    g.word_count = words.size();
    g.forward_adj.assign(g.size(), {});
    g.backward_adj.assign(g.size(), {});
    const std::vector<std::pair<int, int>> edges = {{0, 1}, {1, 2}, {1, 3},
                                                    {3, 0}, {2, 4}, {4, 1}};
    for (auto [a, b] : edges) {
        g.forward_adj[static_cast<std::size_t>(a)].push_back(b);
        g.backward_adj[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& l : g.forward_adj) std::sort(l.begin(), l.end());
    for (auto& l : g.backward_adj) std::sort(l.begin(), l.end());
    return g;
}

// One full toy-corpus training run, shared by the overfit, ablation and
// determinism checks so the gate stays fast.
struct ToyRun {
    TrainConfig cfg;
    std::vector<Example> train;
    std::vector<Example> dev;
    TrainResult res;
    std::vector<std::uint8_t> final_bytes;
    double seconds = 0.0;
    int epochs_ran = 0;
};

struct ToyArtifacts {
    TrainResult res;
    std::vector<std::uint8_t> final_bytes;
    double seconds = 0.0;
};

ToyArtifacts run_toy(const TrainConfig& cfg, const std::vector<Example>& train,
                     const std::vector<Example>& dev) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(cfg.seed);
    Model model = make_model(cfg, build_vocabs(train), rng);
    Trainer tr(std::move(model), train, dev, rng);
    ToyArtifacts out;
    out.res = tr.run();
    out.final_bytes = checkpoint_bytes(tr.model(), tr.adam(), tr.rng().state(),
                                       tr.completed_epochs());
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::optional<ToyRun> g_toy;

const ToyRun& ensure_toy_run() {
    if (!g_toy) {
        ToyRun r;
        r.cfg = load_config("configs/toy_mwp.cfg");
        r.train = load_dataset(r.cfg.train_path, r.cfg);
        r.dev = load_dataset(r.cfg.dev_path, r.cfg);
        ToyArtifacts art = run_toy(r.cfg, r.train, r.dev);
        r.res = std::move(art.res);
        r.final_bytes = std::move(art.final_bytes);
        r.seconds = art.seconds;
        r.epochs_ran = static_cast<int>(r.res.history.size());
        g_toy = std::move(r);
    }
    return *g_toy;
}

// ---------- 1. gradient integrity ----------

struct OpCheck {
    std::string name;
    std::vector<NamedTensor> params;
    std::function<Tensor()> forward;
};

std::vector<OpCheck> op_checks() {
    std::vector<OpCheck> ops;
    auto def = [&ops](std::string name, std::vector<NamedTensor> params,
                      std::function<Tensor()> fwd) {
        ops.push_back({std::move(name), std::move(params), std::move(fwd)});
    };

    Tensor a = smooth_param({2, 3});
    Tensor b = Tensor::param({2, 3}, {0.7, -0.4, 0.9, -1.2, 0.3, 0.5});
    def("add", {{"a", a}, {"b", b}}, [=] { return probe(add(a, b)); });
    def("sub", {{"a", a}, {"b", b}}, [=] { return probe(sub(a, b)); });
    def("mul", {{"a", a}, {"b", b}}, [=] { return probe(mul(a, b)); });
    def("neg", {{"a", a}}, [=] { return probe(neg(a)); });
    def("scale", {{"a", a}}, [=] { return probe(scale(a, 1.7)); });
    def("sigmoid", {{"a", a}}, [=] { return probe(sigmoid(a)); });
    def("tanh", {{"a", a}}, [=] { return probe(tanh(a)); });
    def("relu", {{"a", a}}, [=] { return probe(relu(a)); });

    Tensor v = smooth_param({5});
    def("softmax", {{"v", v}}, [=] { return probe(softmax(v)); });
    def("log_softmax", {{"v", v}}, [=] { return probe(log_softmax(v)); });
    def("sum", {{"a", a}}, [=] { return sum(a); });
    def("pick", {{"v", v}}, [=] { return pick(v, 2); });

    Tensor m34 = smooth_param({3, 4});
    def("max_pool_rows", {{"m", m34}}, [=] { return probe(max_pool_rows(m34)); });

    Tensor m23 = smooth_param({2, 3});
    Tensor m32 = smooth_param({3, 2});
    def("matmul", {{"a", m23}, {"b", m32}}, [=] { return probe(matmul(m23, m32)); });
    Tensor v4 = smooth_param({4});
    def("matvec", {{"m", m34}, {"v", v4}}, [=] { return probe(matvec(m34, v4)); });
    Tensor v3 = smooth_param({3});
    def("vecmat", {{"v", v3}, {"m", m34}}, [=] { return probe(vecmat(v3, m34)); });
    def("add_bias_rows", {{"m", m34}, {"b", v4}},
        [=] { return probe(add_bias_rows(m34, v4)); });

    Tensor c1 = smooth_param({1, 3});
    def("concat_rows", {{"a", m23}, {"b", c1}},
        [=] { return probe(concat({m23, c1}, 0)); });
    Tensor c2 = smooth_param({2, 2});
    def("concat_cols", {{"a", m23}, {"b", c2}},
        [=] { return probe(concat({m23, c2}, 1)); });

    Tensor v6 = smooth_param({6});
    def("slice", {{"v", v6}}, [=] { return probe(slice(v6, 1, 3)); });
    def("row_of", {{"m", m34}}, [=] { return probe(row_of(m34, 1)); });
    Tensor m43 = smooth_param({4, 3});
    def("gather_rows", {{"m", m43}},
        [=] { return probe(gather_rows(m43, {2, 0, 2})); });
    Tensor r1 = smooth_param({3});
    Tensor r2 = Tensor::param({3}, {0.4, -0.9, 1.1});
    def("stack_rows", {{"a", r1}, {"b", r2}},
        [=] { return probe(stack_rows({r1, r2})); });
    def("adjacency_mean", {{"m", m43}}, [=] {
        return probe(adjacency_mean(m43, {{1, 2}, {}, {0, 3}, {2}}));
    });

    Tensor x = smooth_param({3});
    Tensor h = Tensor::param({2}, {0.2, -0.5});
    Tensor c = Tensor::param({2}, {-0.3, 0.6});
    Tensor Wx = smooth_param({8, 3});
    Tensor Wh = smooth_param({8, 2});
    Tensor bg = smooth_param({8});
    def("lstm_cell",
        {{"x", x}, {"h", h}, {"c", c}, {"Wx", Wx}, {"Wh", Wh}, {"b", bg}}, [=] {
            LstmState st = lstm_cell(x, {h, c}, {Wx, Wh, bg});
            return add(probe(st.h), probe(st.c));
        });

    return ops;
}

Outcome criterion_gradients() {
    const auto t0 = std::chrono::steady_clock::now();

    double worst_op = 0.0;
    std::string worst_op_name;
    std::size_t op_count = 0;
    for (const auto& op : op_checks()) {
        GradCheckReport rep = check_gradients(op.forward, op.params, 0, 1e-5);
        if (!rep.ok(1e-4)) {
            return {false, "op " + op.name + " rel err " + fmt("%.2e", rep.max_rel_error) +
                               " at " + rep.worst_tensor};
        }
        if (rep.max_rel_error > worst_op) {
            worst_op = rep.max_rel_error;
            worst_op_name = op.name;
        }
        ++op_count;
    }

    // Full encoder+decoder loss: 5-node graph, 3-node target tree.
    TrainConfig cfg;
    cfg.model_dim = 4;
    cfg.hops = 2;
    Vocabs vocabs;
    for (const char* w : {"the", "dog", "ran"}) vocabs.input.add(w);
    vocabs.input.add(std::string(kRelPrefix) + "det");
    vocabs.input.add(std::string(kRelPrefix) + "nsubj");
    for (const char* t : {"a", "b", "c", "+", "*"}) vocabs.output.add(t);

    Rng rng(41);
    Model model = make_model(cfg, vocabs, rng);
    // nonzero output bias keeps ReLU pre-activations off their kink
    model.encoder.fc_b.set_values({0.01, 0.02, 0.03, 0.04});

    TextGraph graph = five_node_graph();
    OutputTree gold = parse_to_tree("( a + b ) * ( c )");
    auto forward = [&] { return model_loss(model, graph, gold); };

    Rng pick_rng(17);
    GradCheckReport rep = check_gradients(forward, named_tensors(model), 4, 1e-5, &pick_rng);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!rep.ok(1e-4)) {
        return {false, "full model rel err " + fmt("%.2e", rep.max_rel_error) + " at " +
                           rep.worst_tensor + "[" + std::to_string(rep.worst_index) + "]"};
    }
    if (secs >= 60.0) return {false, "took " + fmt("%.1f", secs) + " s (budget 60)"};
    std::ostringstream os;
    os << op_count << " ops worst " << fmt("%.1e", worst_op) << " (" << worst_op_name
       << "); full model " << fmt("%.1e", rep.max_rel_error) << " over " << rep.checked
       << " coords; " << fmt("%.1f", secs) << " s";
    return {true, os.str()};
}

// ---------- 2. graph construction conformance ----------

bool transpose_symmetric(const TextGraph& g) {
    std::size_t fwd_edges = 0, bwd_edges = 0;
    for (std::size_t a = 0; a < g.size(); ++a) {
        fwd_edges += g.forward_adj[a].size();
        bwd_edges += g.backward_adj[a].size();
        for (int b : g.forward_adj[a]) {
            const auto& back = g.backward_adj[static_cast<std::size_t>(b)];
            if (std::find(back.begin(), back.end(), static_cast<int>(a)) == back.end()) {
                return false;
            }
        }
    }
    return fwd_edges == bwd_edges;
}

bool no_unary_relation_chain(const TextGraph& g) {
    for (std::size_t v = g.word_count; v < g.size(); ++v) {
        if (g.forward_adj[v].size() == 1 && !g.is_word(g.forward_adj[v][0])) return false;
    }
    return true;
}

std::string random_conllu(Rng& rng, std::vector<std::string>& tokens_out) {
    static const std::vector<std::string> words = {"cows", "sleep", "dogs",  "run", "happy",
                                                   "small", "the",  "quick", "see", "old"};
    static const std::vector<std::string> labels = {"nsubj", "obj",    "det",
                                                    "amod",  "advmod", "nmod"};
    const std::size_t n = 3 + rng.index(8);
    tokens_out.clear();
    for (std::size_t i = 0; i < n; ++i) tokens_out.push_back(words[rng.index(words.size())]);

    // random tree: a shuffled order, each node attaching to an earlier one
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<int> head(n, 0); // 1-based; 0 marks the root
    std::vector<std::string> deprel(n);
    deprel[order[0]] = "root";
    for (std::size_t k = 1; k < n; ++k) {
        const std::size_t parent = order[rng.index(k)];
        head[order[k]] = static_cast<int>(parent) + 1;
        deprel[order[k]] = labels[rng.index(labels.size())];
    }

    std::ostringstream os;
    for (std::size_t i = 0; i < n; ++i) {
        os << (i + 1) << '\t' << tokens_out[i] << "\t_\t_\t_\t_\t" << head[i] << '\t'
           << deprel[i] << "\t_\t_\n";
    }
    return os.str();
}

std::string random_ptb(Rng& rng, int depth, std::vector<std::string>& tokens_out) {
    static const std::vector<std::string> words = {"cows", "sleep", "dogs", "run",
                                                   "the",  "small", "old",  "see"};
    static const std::vector<std::string> pos = {"NN", "VB", "DT", "JJ"};
    static const std::vector<std::string> cats = {"NP", "VP", "PP", "S", "ADJP"};
    if (depth >= 3 || rng.bernoulli(0.35)) {
        const std::string& tok = words[rng.index(words.size())];
        tokens_out.push_back(tok);
        return "(" + pos[rng.index(pos.size())] + " " + tok + ")";
    }
    // single-child spans are generated on purpose: the builder must collapse them
    const std::size_t kids = 1 + rng.index(3);
    std::string out = "(" + cats[rng.index(cats.size())];
    for (std::size_t k = 0; k < kids; ++k) out += " " + random_ptb(rng, depth + 1, tokens_out);
    return out + ")";
}

Outcome criterion_graphs() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(2026);
    std::size_t dep_nodes = 0, const_nodes = 0;

    for (int i = 0; i < 50; ++i) {
        std::vector<std::string> tokens;
        DependencyParse dp = parse_conllu(random_conllu(rng, tokens));
        TextGraph g = build_dependency_graph(tokens, dp);
        dep_nodes += g.size();
        if (g.size() != tokens.size() + dp.arcs.size()) {
            return {false, "dependency node count " + std::to_string(g.size()) + " != " +
                               std::to_string(tokens.size() + dp.arcs.size())};
        }
        if (dp.arcs.size() != tokens.size() - 1) {
            return {false, "expected " + std::to_string(tokens.size() - 1) + " non-root arcs"};
        }
        if (!transpose_symmetric(g)) return {false, "dependency adjacency not a transpose pair"};
        for (const auto& node : g.nodes) {
            if (node.label == "root") return {false, "root label leaked into the graph"};
        }
    }

    for (int i = 0; i < 50; ++i) {
        std::vector<std::string> tokens;
        std::string text;
        do {
            tokens.clear();
            text = "(TOP " + random_ptb(rng, 0, tokens) + ")";
        } while (tokens.size() < 2);
        ConstituencyParse cp = parse_ptb(text);
        TextGraph g = build_constituency_graph(tokens, cp, true);
        const_nodes += g.size();
        if (!transpose_symmetric(g)) return {false, "constituency adjacency not a transpose pair"};
        if (!no_unary_relation_chain(g)) return {false, "residual unary relation chain"};
    }

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= 5.0) return {false, "took " + fmt("%.2f", secs) + " s (budget 5)"};
    std::ostringstream os;
    os << "50 dependency (" << dep_nodes << " nodes) + 50 constituency (" << const_nodes
       << " nodes); " << fmt("%.2f", secs) << " s";
    return {true, os.str()};
}

// ---------- 3. tree round-trip ----------

std::string random_expr(Rng& rng, int depth) {
    static const std::vector<std::string> toks = {"a",  "b",  "x",   "1",  "2.5",
                                                  "+",  "*",  "=",   "n1", "-"};
    const std::size_t items = 1 + rng.index(4);
    std::string out;
    for (std::size_t i = 0; i < items; ++i) {
        if (!out.empty()) out += " ";
        if (depth < 3 && rng.bernoulli(0.3)) {
            out += "( " + random_expr(rng, depth + 1) + " )";
        } else {
            out += toks[rng.index(toks.size())];
        }
    }
    return out;
}

Outcome criterion_roundtrip() {
    const auto t0 = std::chrono::steady_clock::now();

    std::ifstream in("tests/fixtures/sample_problems.jsonl");
    if (!in) return {false, "cannot open tests/fixtures/sample_problems.jsonl"};
    std::size_t fixture_count = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        for (const char* key : {"gold", "prediction"}) {
            const std::string expr = j.at(key).get<std::string>();
            if (linearize(parse_to_tree(expr)) != canonical_spacing(expr)) {
                return {false, std::string("fixture ") + j.at("id").get<std::string>() + " " +
                                   key + " does not round-trip"};
            }
            ++fixture_count;
        }
    }
    if (fixture_count != 20) {
        return {false, "expected 20 fixture expressions, saw " + std::to_string(fixture_count)};
    }

    Rng rng(777);
    for (int i = 0; i < 1000; ++i) {
        const std::string expr = random_expr(rng, 0);
        if (linearize(parse_to_tree(expr)) != expr) {
            return {false, "random expression does not round-trip: " + expr};
        }
    }

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= 5.0) return {false, "took " + fmt("%.2f", secs) + " s (budget 5)"};
    return {true, "20 fixture expressions + 1000 random; " + fmt("%.2f", secs) + " s"};
}

// ---------- 4. overfit oracle ----------

Outcome criterion_overfit() {
    const ToyRun& toy = ensure_toy_run();
    int full_match_epoch = 0;
    for (const EpochStats& st : toy.res.history) {
        if (st.train_exact == 1.0) {
            full_match_epoch = st.epoch;
            break;
        }
    }
    if (full_match_epoch == 0) {
        return {false, "never reached 100% train exact-match in " +
                           std::to_string(toy.epochs_ran) + " epochs"};
    }
    if (full_match_epoch > 300) {
        return {false, "needed " + std::to_string(full_match_epoch) + " epochs (budget 300)"};
    }
    if (toy.seconds >= 600.0) {
        return {false, "took " + fmt("%.0f", toy.seconds) + " s (budget 600)"};
    }
    std::ostringstream os;
    os << "100% train exact-match at epoch " << full_match_epoch << " of "
       << toy.epochs_ran << "; " << fmt("%.1f", toy.seconds) << " s";
    return {true, os.str()};
}

// ---------- 5. ablation ordering ----------

Outcome criterion_ablation() {
    const ToyRun& toy = ensure_toy_run();
    TrainConfig ablated = toy.cfg;
    ablated.parent_feeding = false;
    ablated.sibling_feeding = false;
    ablated.stop_at_full_train_match = false;
    ablated.epochs = toy.epochs_ran; // same budget the full model used
    ToyArtifacts art = run_toy(ablated, toy.train, toy.dev);

    const double full_dev = toy.res.best_dev_exact;
    const double ablated_dev = art.res.best_dev_exact;
    std::ostringstream os;
    os << "full dev " << fmt("%.2f", full_dev) << " vs no-feeding dev "
       << fmt("%.2f", ablated_dev) << " over " << toy.epochs_ran << " epochs";
    if (full_dev < ablated_dev) return {false, os.str()};
    return {true, os.str()};
}

// ---------- 6. attention invariants ----------

Outcome criterion_attention() {
    const ToyRun& toy = ensure_toy_run();
    Rng rng(toy.cfg.seed);
    Model model = make_model(toy.cfg, build_vocabs(toy.train), rng);

    double worst = 0.0;
    std::size_t steps = 0, beta_steps = 0;
    bool failed = false;
    auto observer = [&](const Attention& att) {
        ++steps;
        for (const Tensor* w : {&att.alpha, &att.beta}) {
            if (!w->defined()) continue;
            if (w == &att.beta) ++beta_steps;
            double s = 0.0;
            for (double x : w->values()) s += x;
            worst = std::max(worst, std::abs(s - 1.0));
        }
    };

    std::vector<Example> all = toy.train;
    all.insert(all.end(), toy.dev.begin(), toy.dev.end());
    for (const Example& ex : all) {
        decode_greedy(encode_graph(model, ex.graph), model.decoder, model.vocabs.output,
                      decode_limits(toy.cfg), observer);
    }
    if (steps == 0 || beta_steps == 0) return {false, "observer saw no attention steps"};
    if (worst > 1e-9) return {false, "weight sum off by " + fmt("%.2e", worst)};

    // chain graphs carry no relation nodes: the relation branch must vanish
    std::size_t chain_steps = 0;
    auto chain_observer = [&](const Attention& att) {
        ++chain_steps;
        if (att.beta.defined()) failed = true;
        for (double x : att.c2.values()) {
            if (x != 0.0) failed = true;
        }
    };
    for (const Example& ex : all) {
        TextGraph chain = build_chain_graph(ex.source);
        decode_greedy(encode_graph(model, chain), model.decoder, model.vocabs.output,
                      decode_limits(toy.cfg), chain_observer);
    }
    if (failed || chain_steps == 0) {
        return {false, "relation branch not exactly zero on chain graphs"};
    }
    std::ostringstream os;
    os << steps << " graph steps (worst sum error " << fmt("%.1e", worst) << "), "
       << chain_steps << " chain steps with zero relation context";
    return {true, os.str()};
}

// ---------- 7. determinism and persistence ----------

Outcome criterion_determinism() {
    const ToyRun& toy = ensure_toy_run();

    // a second full run must reproduce both checkpoints bitwise
    ToyArtifacts again = run_toy(toy.cfg, toy.train, toy.dev);
    if (again.res.best_checkpoint != toy.res.best_checkpoint) {
        return {false, "best checkpoints differ between identical runs"};
    }
    if (again.final_bytes != toy.final_bytes) {
        return {false, "final checkpoints differ between identical runs"};
    }

    // save mid-run, reload, continue: must equal the uninterrupted run
    TrainConfig cfg = toy.cfg;
    cfg.stop_at_full_train_match = false;
    cfg.epochs = 4;

    Rng rng_a(cfg.seed);
    Model model_a = make_model(cfg, build_vocabs(toy.train), rng_a);
    Trainer a(std::move(model_a), toy.train, toy.dev, rng_a);
    for (int i = 0; i < 4; ++i) a.run_epoch();

    Rng rng_b(cfg.seed);
    Model model_b = make_model(cfg, build_vocabs(toy.train), rng_b);
    Trainer b(std::move(model_b), toy.train, toy.dev, rng_b);
    b.run_epoch();
    b.run_epoch();
    Snapshot snap = checkpoint_from_bytes(
        checkpoint_bytes(b.model(), b.adam(), b.rng().state(), b.completed_epochs()));
    Trainer resumed(snap.model, toy.train, toy.dev, Rng(0));
    resumed.restore(snap.adam, snap.rng_state, snap.completed_epochs);
    resumed.run_epoch();
    resumed.run_epoch();

    const auto bytes_a =
        checkpoint_bytes(a.model(), a.adam(), a.rng().state(), a.completed_epochs());
    const auto bytes_r = checkpoint_bytes(resumed.model(), resumed.adam(),
                                          resumed.rng().state(), resumed.completed_epochs());
    if (bytes_a != bytes_r) return {false, "resumed run diverged from uninterrupted run"};

    std::ostringstream os;
    os << "identical reruns (" << toy.final_bytes.size() << " byte checkpoints); resume after "
       << "epoch 2 of 4 matches bitwise";
    return {true, os.str()};
}

// ---------- 8. solver oracle ----------

std::optional<double> bisect_equation(const std::string& equation) {
    const std::vector<std::string> tokens = tokenize_bracketed(equation);
    const auto eq = std::find(tokens.begin(), tokens.end(), "=");
    if (eq == tokens.end()) return std::nullopt;
    const std::vector<std::string> lhs(tokens.begin(), eq);
    const std::vector<std::string> rhs(eq + 1, tokens.end());
    auto residual = [&](double x) -> std::optional<double> {
        auto l = eval_expression(lhs, x);
        auto r = eval_expression(rhs, x);
        if (!l || !r) return std::nullopt;
        return *l - *r;
    };
    double lo = -1e6, hi = 1e6;
    auto flo = residual(lo), fhi = residual(hi);
    if (!flo || !fhi || (*flo < 0) == (*fhi < 0)) return std::nullopt;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        auto fm = residual(mid);
        if (!fm) return std::nullopt;
        if ((*fm < 0) == (*flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

Outcome criterion_solver() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(88);
    auto lit = [](double v) { return fmt("%.2f", v); };
    double worst = 0.0;

    for (int i = 0; i < 100; ++i) {
        const double s = rng.uniform(0.5, 8.0);
        const double t = rng.uniform(0.5, 8.0);
        const double r = rng.uniform(0.5, 60.0);
        double b = rng.uniform(0.5, 40.0);
        std::string equation;
        switch (i % 6) {
        case 0: equation = "( " + lit(s) + " * x ) + " + lit(b) + " = " + lit(s * r + b); break;
        case 1:
            b = 0.5 * s * r;
            equation = "( " + lit(s) + " * x ) - " + lit(b) + " = " + lit(s * r - b);
            break;
        case 2: equation = "( x / " + lit(s) + " ) + " + lit(b) + " = " + lit(r / s + b); break;
        case 3:
            equation = "( " + lit(s) + " * x ) + ( " + lit(t) + " * x ) = " + lit((s + t) * r);
            break;
        case 4: equation = lit(b + r) + " - x = " + lit(b); break;
        case 5: equation = "x = ( " + lit(b) + " + ( " + lit(s) + " * " + lit(r) + " ) )"; break;
        }
        auto analytic = solve_linear(equation);
        auto oracle = bisect_equation(equation);
        if (!analytic) return {false, "no solution for: " + equation};
        if (!oracle) return {false, "oracle found no sign change for: " + equation};
        const double diff = std::abs(*analytic - *oracle);
        worst = std::max(worst, diff);
        if (diff > 1e-6) {
            return {false, "solver " + fmt("%.9f", *analytic) + " vs oracle " +
                               fmt("%.9f", *oracle) + " for: " + equation};
        }
    }
    if (solve_linear("x * x = 4").has_value()) {
        return {false, "nonlinear equation x * x = 4 was not rejected"};
    }

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= 1.0) return {false, "took " + fmt("%.2f", secs) + " s (budget 1)"};
    std::ostringstream os;
    os << "100 affine equations, worst gap " << fmt("%.1e", worst)
       << "; nonlinear rejected; " << fmt("%.2f", secs) << " s";
    return {true, os.str()};
}

// ---------- 9. metric fixtures ----------

Outcome criterion_metrics() {
    std::ifstream in("tests/fixtures/sample_problems.jsonl");
    if (!in) return {false, "cannot open tests/fixtures/sample_problems.jsonl"};

    std::set<std::string> exact_ids, solved_ids, all_ids;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        const std::string id = j.at("id").get<std::string>();
        all_ids.insert(id);
        OutputTree gold = parse_to_tree(j.at("gold").get<std::string>());
        OutputTree pred = parse_to_tree(j.at("prediction").get<std::string>());
        NumberMap map;
        for (const auto& [marker, literal] : j.at("numbers").items()) {
            map.pairs.emplace_back(marker, literal.get<std::string>());
        }
        if (exact_match(pred, gold)) exact_ids.insert(id);
        if (solution_accuracy(pred, map, j.at("answer").get<double>())) solved_ids.insert(id);
    }

    const std::set<std::string> want_exact = {"s02", "s04", "s05", "s09"};
    const std::set<std::string> want_solved = {"s01", "s02", "s04", "s05",
                                               "s06", "s08", "s09"};
    auto join = [](const std::set<std::string>& s) {
        std::string out;
        for (const auto& v : s) out += (out.empty() ? "" : ",") + v;
        return out;
    };
    if (all_ids.size() != 10) {
        return {false, "expected 10 fixture rows, saw " + std::to_string(all_ids.size())};
    }
    if (exact_ids != want_exact) {
        return {false, "exact-match rows {" + join(exact_ids) + "} != {" + join(want_exact) + "}"};
    }
    if (solved_ids != want_solved) {
        return {false, "solved rows {" + join(solved_ids) + "} != {" + join(want_solved) + "}"};
    }
    return {true, "exact rows {" + join(exact_ids) + "}, solved rows {" + join(solved_ids) + "}"};
}

} // namespace

int main(int argc, char** argv) {
    if (!std::filesystem::exists("configs/toy_mwp.cfg")) {
        std::fprintf(stderr, "run from the repository root (configs/toy_mwp.cfg not found)\n");
        return 2;
    }

    struct Criterion {
        int number;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "gradient integrity", criterion_gradients},
        {2, "graph construction conformance", criterion_graphs},
        {3, "tree round-trip", criterion_roundtrip},
        {4, "overfit oracle", criterion_overfit},
        {5, "ablation ordering", criterion_ablation},
        {6, "attention invariants", criterion_attention},
        {7, "determinism and persistence", criterion_determinism},
        {8, "solver oracle", criterion_solver},
        {9, "metric fixtures", criterion_metrics},
    };

    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.number)) continue;
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s  %d. %-33s %s\n", out.pass ? "PASS" : "FAIL", c.number, c.name,
                    out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
