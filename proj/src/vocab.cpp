#include "g2t/vocab.hpp"

#include "g2t/errors.hpp"

namespace g2t {

Vocab::Vocab() {
    for (const char* t : {kPadTok, kUnkTok, kBosTok, kEosTok, kSubTreeTok}) add(t);
}

int Vocab::add(const std::string& token) {
    auto it = ids_.find(token);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(tokens_.size());
    tokens_.push_back(token);
    ids_.emplace(token, id);
    return id;
}

int Vocab::id_of(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnkId : it->second;
}

bool Vocab::contains(const std::string& token) const { return ids_.count(token) != 0; }

const std::string& Vocab::token_of(int id) const {
    if (id < 0 || id >= static_cast<int>(tokens_.size())) {
        throw ContractError("vocab: id " + std::to_string(id) + " out of range (size " +
                            std::to_string(tokens_.size()) + ")");
    }
    return tokens_[static_cast<std::size_t>(id)];
}

Vocab Vocab::from_tokens(const std::vector<std::string>& tokens) {
    Vocab v;
    if (tokens.size() < kNumReserved) {
        throw ContractError("vocab: stored token list is missing the reserved tokens");
    }
    for (int i = 0; i < kNumReserved; ++i) {
        if (tokens[static_cast<std::size_t>(i)] != v.tokens_[static_cast<std::size_t>(i)]) {
            throw ContractError("vocab: stored token list does not start with reserved tokens");
        }
    }
    for (std::size_t i = kNumReserved; i < tokens.size(); ++i) {
        if (v.contains(tokens[i])) {
            throw ContractError("vocab: duplicate stored token '" + tokens[i] + "'");
        }
        v.add(tokens[i]);
    }
    return v;
}

} // namespace g2t
