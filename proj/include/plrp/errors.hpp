#pragma once

#include <stdexcept>
#include <string>

namespace plrp {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor or layer shapes do not chain.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Malformed or unreadable file, or inconsistent dataset.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Non-finite values, divergence, or an undefined numerical operation.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration values (pruning proportions, rule parameters, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace plrp
