#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tnvqc {

// Shape or extent disagreement between tensors (mismatched paired axes,
// reshape to a different element count, gradient/parameter shape mismatch).
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Axis, qubit, or site index out of range.
struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// Invalid argument value: wrong length, pixel outside [0,255], feature
// outside its domain, empty dataset, non-finite angle.
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// API misuse: stale contraction trace, optimizer state reused across
// differently-shaped parameter vectors.
struct UsageError : std::logic_error {
    using std::logic_error::logic_error;
};

// Invalid configuration combination (e.g. classifier logits requested from
// a model whose output dimension is not 2).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed binary file (IDX or checkpoint). Carries the byte offset at
// which parsing failed.
struct FormatError : std::runtime_error {
    FormatError(const std::string& what, std::uint64_t byte_offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          offset(byte_offset) {}
    std::uint64_t offset;
};

// Numerical breakdown: overflow/underflow in a contraction sweep,
// non-finite loss, unnormalized statevector.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tnvqc
