#pragma once

#include <stdexcept>
#include <string>

namespace vsnt {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Incompatible tensor extents or layer geometry.
class ShapeError : public Error {
public:
    using Error::Error;
};

// NaN or Inf produced by an operation on finite inputs.
class NumericError : public Error {
public:
    using Error::Error;
};

// Misuse of the autodiff tape (non-scalar backward, double backward, ...).
class GraphError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Filesystem problems: missing files, unreadable sources.
class IoError : public Error {
public:
    using Error::Error;
};

// Malformed on-disk data (PPM, checkpoint, manifest lines).
class FormatError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace vsnt
