#include "g2t/model.hpp"

#include <unordered_set>

#include "g2t/errors.hpp"

namespace g2t {

Model make_model(const TrainConfig& cfg, Vocabs vocabs, Rng& rng) {
    Model m;
    m.config = cfg;
    m.vocabs = std::move(vocabs);
    m.encoder = make_encoder_params(cfg, m.vocabs.input, rng);
    m.decoder = make_decoder_params(cfg, m.vocabs.output, rng);
    // Pretrained embeddings are applied by the caller: checkpoint loading
    // rebuilds models long after the embedding file may have moved.
    return m;
}

std::vector<NamedTensor> named_tensors(const Model& m) {
    std::vector<NamedTensor> out;
    for (const auto& nt : named_tensors(m.encoder)) out.push_back({"enc." + nt.name, nt.tensor});
    for (const auto& nt : named_tensors(m.decoder)) out.push_back({"dec." + nt.name, nt.tensor});

    std::unordered_set<std::string> seen;
    for (const auto& nt : out) {
        if (!seen.insert(nt.name).second) {
            throw ContractError("duplicate parameter name: " + nt.name);
        }
    }
    return out;
}

DecodeLimits decode_limits(const TrainConfig& cfg) {
    DecodeLimits lim;
    lim.max_len = cfg.max_len;
    lim.max_nodes = cfg.max_nodes;
    lim.max_depth = cfg.max_depth;
    return lim;
}

EncodedGraph encode_graph(const Model& m, const TextGraph& graph, const EncodeOptions& opts) {
    return encode(graph, m.encoder, m.vocabs.input, opts);
}

Tensor model_loss(const Model& m, const TextGraph& graph, const OutputTree& gold,
                  const EncodeOptions& opts) {
    EncodedGraph enc = encode(graph, m.encoder, m.vocabs.input, opts);
    return teacher_forced_loss(gold, enc, m.decoder, m.vocabs.output);
}

OutputTree greedy_prediction(const Model& m, const TextGraph& graph) {
    EncodedGraph enc = encode(graph, m.encoder, m.vocabs.input);
    return decode_greedy(enc, m.decoder, m.vocabs.output, decode_limits(m.config));
}

} // namespace g2t
