#pragma once

#include <stdexcept>
#include <string>

namespace feedtune {

// Query budget is spent; the holder refuses further evaluations.
class budget_exhausted_error : public std::runtime_error {
public:
    budget_exhausted_error() : std::runtime_error("budget_exhausted") {}
};

// Candidate/operand shapes disagree.
class dimension_mismatch_error : public std::invalid_argument {
public:
    explicit dimension_mismatch_error(const std::string& what)
        : std::invalid_argument(what) {}
};

// Malformed or out-of-contract wire message.
class protocol_error : public std::runtime_error {
public:
    explicit protocol_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace feedtune
