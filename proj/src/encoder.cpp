#include "g2t/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "g2t/errors.hpp"
#include "g2t/tokens.hpp"

namespace g2t {

namespace {

Tensor glorot(std::size_t rows, std::size_t cols, Rng& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    return Tensor::uniform({rows, cols}, -limit, limit, rng, /*requires_grad=*/true);
}

Tensor zero_param(Shape shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return Tensor::param(std::move(shape), std::vector<double>(n, 0.0));
}

LstmParams make_lstm(std::size_t hidden, std::size_t input, Rng& rng) {
    LstmParams p;
    p.Wx = glorot(4 * hidden, input, rng);
    p.Wh = glorot(4 * hidden, hidden, rng);
    p.b = zero_param({4 * hidden});
    return p;
}

} // namespace

EncoderParams make_encoder_params(const TrainConfig& cfg, const Vocab& input_vocab, Rng& rng) {
    EncoderParams p;
    p.dim = cfg.model_dim;
    p.hops = cfg.hops;
    p.use_bilstm = !cfg.no_bilstm;
    p.bidirectional = !cfg.original_graphsage;
    p.shared_stream_update = cfg.shared_stream_update;

    const std::size_t v = input_vocab.size();
    const std::size_t d = static_cast<std::size_t>(p.dim);
    p.word_emb = Tensor::uniform({v, d}, -0.05, 0.05, rng, true);
    p.rel_emb = Tensor::uniform({v, d}, -0.05, 0.05, rng, true);

    if (p.use_bilstm) {
        p.bilstm_fwd = make_lstm(d / 2, d, rng);
        p.bilstm_bwd = make_lstm(d / 2, d, rng);
    }
    if (p.bidirectional) {
        for (int k = 0; k < p.hops; ++k) {
            p.agg_fwd.push_back(glorot(d, d, rng));
            p.agg_bwd.push_back(glorot(d, d, rng));
        }
        p.gate_Wz = glorot(4 * d, d, rng);
    }
    for (int k = 0; k < p.hops; ++k) p.update_W.push_back(glorot(2 * d, d, rng));
    p.fc_W = glorot(2 * d, d, rng);
    p.fc_b = zero_param({d});
    return p;
}

std::vector<NamedTensor> named_tensors(const EncoderParams& p) {
    std::vector<NamedTensor> out;
    auto put = [&out](const std::string& name, const Tensor& t) {
        if (t.defined()) out.push_back({name, t});
    };
    put("word_emb", p.word_emb);
    put("rel_emb", p.rel_emb);
    put("bilstm.fwd.Wx", p.bilstm_fwd.Wx);
    put("bilstm.fwd.Wh", p.bilstm_fwd.Wh);
    put("bilstm.fwd.b", p.bilstm_fwd.b);
    put("bilstm.bwd.Wx", p.bilstm_bwd.Wx);
    put("bilstm.bwd.Wh", p.bilstm_bwd.Wh);
    put("bilstm.bwd.b", p.bilstm_bwd.b);
    for (std::size_t k = 0; k < p.agg_fwd.size(); ++k) {
        put("agg.fwd." + std::to_string(k + 1), p.agg_fwd[k]);
        put("agg.bwd." + std::to_string(k + 1), p.agg_bwd[k]);
    }
    put("gate.Wz", p.gate_Wz);
    for (std::size_t k = 0; k < p.update_W.size(); ++k) {
        put("update." + std::to_string(k + 1), p.update_W[k]);
    }
    put("fc.W", p.fc_W);
    put("fc.b", p.fc_b);
    return out;
}

std::size_t load_pretrained_embeddings(const std::string& path, const Vocab& input_vocab,
                                       const Tensor& word_emb) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("embeddings: cannot open '" + path + "'");
    const std::size_t dim = word_emb.cols();
    std::vector<double> values = word_emb.values();
    std::size_t applied = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string token;
        ls >> token;
        std::vector<double> row;
        row.reserve(dim);
        double x = 0;
        while (ls >> x) row.push_back(x);
        if (row.size() != dim) {
            throw ParseError("embeddings line " + std::to_string(line_no) + ": expected " +
                             std::to_string(dim) + " values, got " + std::to_string(row.size()));
        }
        if (!input_vocab.contains(token)) continue;
        int id = input_vocab.id_of(token);
        if (id < static_cast<int>(kNumReserved)) continue;
        std::copy(row.begin(), row.end(), values.begin() + id * dim);
        ++applied;
    }
    word_emb.set_values(values);
    return applied;
}

Tensor init_node_states(const TextGraph& graph, const EncoderParams& p, const Vocab& input_vocab) {
    if (graph.size() == 0) throw EmptyInputError("encode: graph has no nodes");
    const std::size_t d = static_cast<std::size_t>(p.dim);

    // word embeddings in sentence order
    std::vector<Tensor> word_inputs(graph.word_count);
    std::vector<int> node_of_pos(graph.word_count, -1);
    for (const GraphNode& n : graph.nodes) {
        if (n.kind != NodeKind::Word) continue;
        word_inputs[n.seq_pos] = row_of(p.word_emb, input_vocab.id_of(n.label));
        node_of_pos[n.seq_pos] = n.id;
    }

    std::vector<Tensor> word_states(graph.word_count);
    if (p.use_bilstm) {
        const std::size_t h = d / 2;
        std::vector<Tensor> fwd(graph.word_count), bwd(graph.word_count);
        LstmState st{Tensor::zeros({h}), Tensor::zeros({h})};
        for (std::size_t i = 0; i < word_inputs.size(); ++i) {
            st = lstm_cell(word_inputs[i], st, p.bilstm_fwd);
            fwd[i] = st.h;
        }
        st = LstmState{Tensor::zeros({h}), Tensor::zeros({h})};
        for (std::size_t i = word_inputs.size(); i-- > 0;) {
            st = lstm_cell(word_inputs[i], st, p.bilstm_bwd);
            bwd[i] = st.h;
        }
        for (std::size_t i = 0; i < word_inputs.size(); ++i) {
            word_states[i] = concat({fwd[i], bwd[i]}, 0);
        }
    } else {
        word_states = word_inputs;
    }

    std::vector<Tensor> rows(graph.size());
    for (std::size_t i = 0; i < word_states.size(); ++i) rows[node_of_pos[i]] = word_states[i];
    for (const GraphNode& n : graph.nodes) {
        if (n.kind != NodeKind::Relation) continue;
        rows[n.id] = row_of(p.rel_emb, input_vocab.id_of(std::string(kRelPrefix) + n.label));
    }
    return stack_rows(rows);
}

Tensor aggregate_neighborhood(const Tensor& h_prev, const std::vector<std::vector<int>>& adj,
                              const Tensor& M) {
    return relu(matmul(adjacency_mean(h_prev, adj), M));
}

Tensor fuse(const Tensor& h1, const Tensor& h2, const Tensor& Wz) {
    if (h1.shape() != h2.shape()) {
        throw DimError("fuse: mismatched inputs " + shape_str(h1.shape()) + " vs " +
                       shape_str(h2.shape()));
    }
    Tensor gate_in = concat({h1, h2, mul(h1, h2), sub(h1, h2)}, 1);
    Tensor wg = sigmoid(matmul(gate_in, Wz));
    // h2 + wg*(h1 - h2): exact pass-through when h1 == h2
    return add(h2, mul(wg, sub(h1, h2)));
}

Tensor update_nodes(const Tensor& h_prev, const Tensor& h_msg, const Tensor& W) {
    return relu(matmul(concat({h_prev, h_msg}, 1), W));
}

EncodedGraph encode(const TextGraph& graph, const EncoderParams& p, const Vocab& input_vocab,
                    const EncodeOptions& opts) {
    Tensor h0 = init_node_states(graph, p, input_vocab);
    if (opts.dropout > 0.0 && opts.rng != nullptr) {
        h0 = dropout(h0, 1.0 - opts.dropout, *opts.rng);
    }

    Tensor z;
    if (!p.bidirectional) {
        Tensor h = h0;
        for (int k = 0; k < p.hops; ++k) {
            // plain mean aggregation over outgoing edges, no learned
            // aggregator map, no gating
            Tensor msg = adjacency_mean(h, graph.forward_adj);
            h = update_nodes(h, msg, p.update_W[k]);
        }
        z = concat({h, h}, 1);
    } else if (p.shared_stream_update) {
        Tensor h = h0;
        for (int k = 0; k < p.hops; ++k) {
            Tensor mf = aggregate_neighborhood(h, graph.forward_adj, p.agg_fwd[k]);
            Tensor mb = aggregate_neighborhood(h, graph.backward_adj, p.agg_bwd[k]);
            Tensor msg = fuse(mf, mb, p.gate_Wz);
            h = update_nodes(h, msg, p.update_W[k]);
        }
        z = concat({h, h}, 1);
    } else {
        Tensor hf = h0;
        Tensor hb = h0;
        for (int k = 0; k < p.hops; ++k) {
            Tensor mf = aggregate_neighborhood(hf, graph.forward_adj, p.agg_fwd[k]);
            Tensor mb = aggregate_neighborhood(hb, graph.backward_adj, p.agg_bwd[k]);
            Tensor msg = fuse(mf, mb, p.gate_Wz);
            hf = update_nodes(hf, msg, p.update_W[k]);
            hb = update_nodes(hb, msg, p.update_W[k]);
        }
        z = concat({hf, hb}, 1);
    }

    EncodedGraph out;
    out.z = z;
    out.g = max_pool_rows(relu(add_bias_rows(matmul(z, p.fc_W), p.fc_b)));
    out.node_kinds.reserve(graph.size());
    for (const GraphNode& n : graph.nodes) out.node_kinds.push_back(n.kind);
    return out;
}

} // namespace g2t
