#pragma once

#include <stdexcept>
#include <string>

namespace condaj {

// Malformed input text (CSV rows, scenario files, rate expressions).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Well-formed input that violates a model invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The kernel puts no mass near the evaluation point, or a density is zero.
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace condaj
