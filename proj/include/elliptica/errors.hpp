#pragma once

#include <stdexcept>
#include <string>

namespace elliptica {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain (e.g. Im tau too small,
/// q-series argument off its annulus).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Evaluation at (or numerically indistinguishable from) a lattice pole.
class PoleError : public Error {
public:
    using Error::Error;
};

/// A series stopped by the max-terms cap before reaching its tolerance.
/// Carries the magnitude of the last term considered.
class TruncationError : public Error {
public:
    TruncationError(const std::string& what, double last_term)
        : Error(what), last_term_magnitude(last_term) {}
    double last_term_magnitude;
};

/// Invalid configuration (unknown check id, bad CLI arguments, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

}
