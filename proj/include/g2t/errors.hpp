#pragma once

#include <stdexcept>
#include <string>

namespace g2t {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape or dimension disagreement between tensor operands.
class DimError : public Error {
public:
    explicit DimError(const std::string& msg) : Error(msg) {}
};

// Malformed textual input (bracketed expressions, CoNLL-U, PTB, JSONL).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

// An operation received an empty input where at least one element is required.
class EmptyInputError : public Error {
public:
    explicit EmptyInputError(const std::string& msg) : Error(msg) {}
};

// API misuse: a precondition that valid callers must uphold was violated.
class ContractError : public Error {
public:
    explicit ContractError(const std::string& msg) : Error(msg) {}
};

// Training aborted (non-finite loss or gradient); carries the tensor name.
class TrainingAbort : public Error {
public:
    explicit TrainingAbort(const std::string& msg) : Error(msg) {}
};

} // namespace g2t
