#pragma once

#include <functional>
#include <string>
#include <vector>

#include "g2t/config.hpp"
#include "g2t/encoder.hpp"
#include "g2t/output_tree.hpp"
#include "g2t/tensor.hpp"
#include "g2t/vocab.hpp"

namespace g2t {

// Parameters of the hierarchical tree decoder. The LSTM consumes
// concat(token embedding, parent feed, sibling feed), so its input width is
// three times the state width.
struct DecoderParams {
    int dim = 0;
    AttentionMode attention = AttentionMode::Separated;
    bool parent_feeding = true;
    bool sibling_feeding = true;

    Tensor emb;       // {V_out, dim}
    LstmParams lstm;  // input 3*dim, hidden dim
    Tensor attn_Wa;   // {dim, 2*dim} bilinear score; undefined when attention is off
    Tensor Wc;        // {5*dim, dim}
    Tensor bc;        // {dim}
    Tensor Wv;        // {dim, V_out}
    Tensor bv;        // {V_out}
    Tensor bridge_Wh; // {dim, dim} graph embedding -> initial h
    Tensor bridge_Wc; // {dim, dim} graph embedding -> initial c
};

DecoderParams make_decoder_params(const TrainConfig& cfg, const Vocab& output_vocab, Rng& rng);

// Defined tensors in a fixed order, names relative to the decoder.
std::vector<NamedTensor> named_tensors(const DecoderParams& p);

// One attention application. Word and relation nodes get independent
// softmaxes whose contexts occupy separate slots of the combiner input.
struct Attention {
    Tensor s_tilde; // {dim} post-attention state
    Tensor alpha;   // weights over word nodes; undefined when attention is off
    Tensor beta;    // weights over relation nodes; only in separated mode with both kinds
    Tensor c1;      // {2*dim} word context fed to the combiner
    Tensor c2;      // {2*dim} relation context fed to the combiner
};

Attention attend(const EncodedGraph& enc, const Tensor& s_t, const DecoderParams& p);

// Feeds carried between steps and across the tree.
struct DecoderState {
    LstmState lstm;
    Tensor parent_feed;  // post-attention state captured when this node was spawned
    Tensor sibling_feed; // final hidden state of the completed preceding sibling
};

struct StepResult {
    Tensor logits; // {V_out}
    LstmState state;
    Attention att; // att.s_tilde is what a spawned child receives as parent feed
};

StepResult step(const DecoderState& st, int y_prev, const DecoderParams& p,
                const EncodedGraph& enc);

struct DecodeLimits {
    int max_len = 60;   // tokens per node
    int max_nodes = 30; // tree nodes overall
    int max_depth = 8;  // root has depth 1
};

// Greedy decoding, breadth-first over spawned sub-tasks. Emitting the
// subtree placeholder enqueues a child initialized with the LSTM state and
// post-attention state of that step; when a limit forbids the child, the
// placeholder is recorded as unk instead. Empty nodes come back as a single
// unk token so every result linearizes and reparses.
OutputTree decode_greedy(const EncodedGraph& enc, const DecoderParams& p,
                         const Vocab& output_vocab, const DecodeLimits& limits,
                         const std::function<void(const Attention&)>& observer = nullptr);

// Sum of token cross-entropies over every node of the gold tree under
// teacher forcing, with parent/sibling feeds taken from the gold structure.
Tensor teacher_forced_loss(const OutputTree& gold, const EncodedGraph& enc,
                           const DecoderParams& p, const Vocab& output_vocab);

} // namespace g2t
