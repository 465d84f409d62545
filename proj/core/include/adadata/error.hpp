#pragma once

#include <stdexcept>
#include <string>

namespace adadata {

// Base of every error thrown by the library. The CLI maps the subclasses onto
// process exit codes (see tools/cli/commands.cpp).
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
  public:
    using Error::Error;
};

class IndexError : public Error {
  public:
    using Error::Error;
};

class ParameterError : public Error {
  public:
    using Error::Error;
};

class ContractError : public Error {
  public:
    using Error::Error;
};

// Malformed or inconsistent data: corpora, model files, prefix files.
class InputError : public Error {
  public:
    using Error::Error;
};

class EncodingError : public InputError {
  public:
    using InputError::InputError;
};

class CompatibilityError : public InputError {
  public:
    using InputError::InputError;
};

class TrainingError : public Error {
  public:
    using Error::Error;
};

} // namespace adadata
