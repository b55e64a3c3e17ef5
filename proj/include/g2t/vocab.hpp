#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "g2t/tokens.hpp"

namespace g2t {

// Token <-> id table. The five reserved tokens always occupy ids 0..4;
// lookups of unknown tokens resolve to the unk id.
class Vocab {
public:
    Vocab();

    int add(const std::string& token); // inserts if absent, returns the id
    int id_of(const std::string& token) const;
    bool contains(const std::string& token) const;
    const std::string& token_of(int id) const;
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    // Rebuild from a stored token list (checkpoint load). The list must
    // start with the reserved tokens.
    static Vocab from_tokens(const std::vector<std::string>& tokens);

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> ids_;
};

struct Vocabs {
    Vocab input;  // source words plus prefixed relation labels
    Vocab output; // target-side tokens
};

} // namespace g2t
