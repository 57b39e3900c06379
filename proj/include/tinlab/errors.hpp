#pragma once

#include <stdexcept>
#include <string>

namespace tinlab {

// Every failure raised by the library derives from Error so callers can
// catch at one level and still dispatch on the category.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shapes or lengths disagree, or a window does not fit the data.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Invalid hyperparameter or construction request (eps <= 0, fast >= slow, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Value outside the mathematical domain of an operation (negative volume, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// API misuse: backward before forward, step after done, unbound inputs.
class UsageError : public Error {
public:
    using Error::Error;
};

// Malformed file or document.
class FormatError : public Error {
public:
    using Error::Error;
};

// Index or date outside the available history.
class RangeError : public Error {
public:
    using Error::Error;
};

} // namespace tinlab
