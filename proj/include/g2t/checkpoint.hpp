#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "g2t/model.hpp"
#include "g2t/training.hpp"

namespace g2t {

// A checkpoint captures everything a resumed run needs: the config echo,
// both vocabularies, every named parameter, the Adam moments, the random
// stream, and the epoch counter.
struct Snapshot {
    Model model;
    AdamState adam;
    std::string rng_state;
    int completed_epochs = 0;
};

// Versioned little-endian binary container. Serialization is a pure
// function of the state, so identical runs write identical bytes.
std::vector<std::uint8_t> checkpoint_bytes(const Model& model, const AdamState& adam,
                                           const std::string& rng_state, int completed_epochs);

// Rebuilds the model from the embedded config and vocabularies, then
// overwrites every tensor with the stored values. Malformed or truncated
// input raises ParseError.
Snapshot checkpoint_from_bytes(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::string& path, const Model& model, const AdamState& adam,
                     const std::string& rng_state, int completed_epochs);
Snapshot load_checkpoint(const std::string& path);

} // namespace g2t
