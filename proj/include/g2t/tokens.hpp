#pragma once

namespace g2t {

// Reserved vocabulary tokens. Every vocabulary places these at ids 0..4.
inline constexpr const char* kPadTok = "⟨pad⟩";
inline constexpr const char* kUnkTok = "⟨unk⟩";
inline constexpr const char* kBosTok = "⟨s⟩";
inline constexpr const char* kEosTok = "⟨/s⟩";
inline constexpr const char* kSubTreeTok = "⟨N⟩"; // placeholder that spawns a child task

enum ReservedId : int {
    kPadId = 0,
    kUnkId = 1,
    kBosId = 2,
    kEosId = 3,
    kSubTreeId = 4,
    kNumReserved = 5,
};

// Relation labels live in the same input vocabulary as words, under this
// prefix so "nsubj" the label never collides with "nsubj" the word.
inline constexpr const char* kRelPrefix = "rel:";

} // namespace g2t
