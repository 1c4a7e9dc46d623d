#pragma once

#include <stdexcept>
#include <string>

namespace proxit {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

// KL divergence requested with p_i > 0 where q_i = 0.
struct SupportViolation : Error {
    using Error::Error;
};

struct NotStochastic : Error {
    using Error::Error;
};

struct NegativeEntry : Error {
    using Error::Error;
};

struct InvalidParams : Error {
    using Error::Error;
};

struct TooLarge : Error {
    using Error::Error;
};

// Every log-coordinate entry is -inf: no distribution exists.
struct AllZero : Error {
    using Error::Error;
};

struct InvalidCode : Error {
    using Error::Error;
};

struct SizeMismatch : Error {
    using Error::Error;
};

// Text-format ingestion failure; line is 1-based.
struct ParseError : Error {
    ParseError(int line_no, const std::string& what)
        : Error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
    int line;
};

}  // namespace proxit
