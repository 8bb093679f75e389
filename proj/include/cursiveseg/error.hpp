#pragma once

#include <stdexcept>
#include <string>

namespace cseg {

// Base for every error raised by the library. The CLI maps the subclasses
// onto its exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or truncated input bytes (images, models, training files).
class DecodeError : public Error {
public:
    using Error::Error;
};

// Bad user-supplied data: manifests, missing files, inconsistent settings.
class InputError : public Error {
public:
    using Error::Error;
};

// Parameters that do not fit together (e.g. a model trained for a different window).
class ConfigError : public Error {
public:
    using Error::Error;
};

// A caller broke a documented precondition or an internal invariant failed.
class ContractError : public Error {
public:
    using Error::Error;
};

}  // namespace cseg
