#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tflab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class WidthMismatch : public Error {
public:
    using Error::Error;
};

// Input outside an operation's domain (even value to an odd inversion, bit
// index past the word, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t pos)
        : Error(msg + " at position " + std::to_string(pos)), position(pos) {}
    std::size_t position;
};

class EvalError : public Error {
public:
    using Error::Error;
};

class NotDifferentiable : public Error {
public:
    using Error::Error;
};

class NotMeasurePreserving : public Error {
public:
    NotMeasurePreserving(unsigned bit_index, std::uint64_t a, std::uint64_t b)
        : Error("bit " + std::to_string(bit_index) + " is not separable: inputs " +
                std::to_string(a) + " and " + std::to_string(b) + " agree"),
          bit(bit_index), witness_a(a), witness_b(b) {}
    unsigned bit;
    std::uint64_t witness_a;
    std::uint64_t witness_b;
};

class PolicyInapplicable : public Error {
public:
    using Error::Error;
};

class OverCap : public Error {
public:
    using Error::Error;
};

class NonIntegerValued : public Error {
public:
    NonIntegerValued(std::uint64_t z)
        : Error("polynomial is not integer valued at z = " + std::to_string(z)), witness(z) {}
    std::uint64_t witness;
};

// A generator spec failed validation or was used before being validated.
class SpecError : public Error {
public:
    using Error::Error;
};

}  // namespace tflab
