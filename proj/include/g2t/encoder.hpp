#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "g2t/config.hpp"
#include "g2t/rng.hpp"
#include "g2t/tensor.hpp"
#include "g2t/text_graph.hpp"
#include "g2t/vocab.hpp"

namespace g2t {

// Parameters of the bidirectional graph encoder. Ablation variants leave the
// tensors they never touch undefined, so parameter counts reflect the actual
// model.
struct EncoderParams {
    int dim = 0;  // node state width; word states are two half-width LSTM halves
    int hops = 0; // neighborhood aggregation rounds

    bool use_bilstm = true;
    bool bidirectional = true; // false: plain forward-only mean aggregation, no fusion
    bool shared_stream_update = false;

    Tensor word_emb; // {V, dim} rows indexed by input-vocab id
    Tensor rel_emb;  // {V, dim} rows indexed by input-vocab id of the prefixed label

    LstmParams bilstm_fwd; // hidden dim/2
    LstmParams bilstm_bwd;

    std::vector<Tensor> agg_fwd; // per hop {dim, dim}
    std::vector<Tensor> agg_bwd;
    Tensor gate_Wz;              // {4*dim, dim}
    std::vector<Tensor> update_W; // per hop {2*dim, dim}, shared by both streams

    Tensor fc_W; // {2*dim, dim}
    Tensor fc_b; // {dim}
};

EncoderParams make_encoder_params(const TrainConfig& cfg, const Vocab& input_vocab, Rng& rng);

// Defined tensors in a fixed order, names relative to the encoder.
std::vector<NamedTensor> named_tensors(const EncoderParams& p);

// Pretrained embedding text format: one line per token, "token v1 ... vdim".
// Rows for tokens present in the vocabulary are written into word_emb;
// returns how many were applied. Tokens not in the file keep their random
// initialization.
std::size_t load_pretrained_embeddings(const std::string& path, const Vocab& input_vocab,
                                       const Tensor& word_emb);

struct EncodedGraph {
    Tensor z; // {n, 2*dim} per-node states, both stream histories concatenated
    Tensor g; // {dim} pooled graph embedding
    std::vector<NodeKind> node_kinds;
};

struct EncodeOptions {
    double dropout = 0.0; // applied to initial node states when rng is set
    Rng* rng = nullptr;
};

// Initial node states: word nodes from a BiLSTM pass over the sentence (or
// raw embeddings when disabled), relation nodes from the label embedding
// table. Unseen labels fall back to the unk row.
Tensor init_node_states(const TextGraph& graph, const EncoderParams& p, const Vocab& input_vocab);

// Mean over the listed neighbors (zero for none), then linear map + ReLU.
Tensor aggregate_neighborhood(const Tensor& h_prev, const std::vector<std::vector<int>>& adj,
                              const Tensor& M);

// Gated combination: h2 + w_g*(h1 - h2) with
// w_g = sigmoid(W_z * [h1; h2; h1*h2; h1-h2]). Equal inputs pass through
// bitwise unchanged.
Tensor fuse(const Tensor& h1, const Tensor& h2, const Tensor& Wz);

// ReLU(W * concat(previous state, neighborhood message)) per node.
Tensor update_nodes(const Tensor& h_prev, const Tensor& h_msg, const Tensor& W);

EncodedGraph encode(const TextGraph& graph, const EncoderParams& p, const Vocab& input_vocab,
                    const EncodeOptions& opts = {});

} // namespace g2t
