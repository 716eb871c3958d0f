// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace simcse {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor shapes that do not conform to an operation's contract.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Invalid configuration or arguments supplied by the caller.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed or missing input data (files, rows, labels).
class DataError : public Error {
public:
    using Error::Error;
};

// Corrupt, truncated or version-mismatched checkpoint.
class IntegrityError : public Error {
public:
    using Error::Error;
};

// Mathematically undefined quantity (zero-norm cosine, constant-input correlation).
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace simcse
