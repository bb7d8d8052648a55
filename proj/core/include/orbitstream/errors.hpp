#pragma once

#include <stdexcept>
#include <string>

namespace orbitstream {

/// Malformed input file; the message names the offending line.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input that parses but violates a domain invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Potential evaluated where the regularized distance vanishes.
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Critical-gain search found no sustained oscillation.
class TuningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace orbitstream
