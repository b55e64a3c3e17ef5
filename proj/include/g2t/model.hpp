#pragma once

#include <vector>

#include "g2t/config.hpp"
#include "g2t/decoder.hpp"
#include "g2t/encoder.hpp"
#include "g2t/output_tree.hpp"
#include "g2t/tensor.hpp"
#include "g2t/text_graph.hpp"
#include "g2t/vocab.hpp"

namespace g2t {

// A complete translation model: configuration, vocabularies, and the
// parameters of both halves.
struct Model {
    TrainConfig config;
    Vocabs vocabs;
    EncoderParams encoder;
    DecoderParams decoder;
};

// Builds every parameter the config calls for, drawing from rng in a fixed
// order: same (config, vocabs, seed) gives bitwise-identical parameters.
Model make_model(const TrainConfig& cfg, Vocabs vocabs, Rng& rng);

// All defined parameters under globally unique "enc."/"dec." names, in a
// stable order. Optimizer state, checkpoints and gradient checks index this
// list by position.
std::vector<NamedTensor> named_tensors(const Model& m);

DecodeLimits decode_limits(const TrainConfig& cfg);

// Forward passes over one example.
EncodedGraph encode_graph(const Model& m, const TextGraph& graph, const EncodeOptions& opts = {});
Tensor model_loss(const Model& m, const TextGraph& graph, const OutputTree& gold,
                  const EncodeOptions& opts = {});
OutputTree greedy_prediction(const Model& m, const TextGraph& graph);

} // namespace g2t
