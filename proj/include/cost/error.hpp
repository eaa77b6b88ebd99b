#pragma once

#include <stdexcept>
#include <string>

namespace cost {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (lexicon line, PNG, JSON row, dimension mismatch).
class FormatError : public Error {
public:
  using Error::Error;
};

/// Lexicon tables violate an invariant (synonym chains, reused canonical keys).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Mask pixel refers to a segment id missing from the metadata.
class IntegrityError : public Error {
public:
  using Error::Error;
};

/// A score is not defined for the given inputs (empty GT or empty prediction).
class UndefinedScoreError : public Error {
public:
  using Error::Error;
};

/// Aggregation over zero scorable images.
class EmptyReportError : public Error {
public:
  using Error::Error;
};

/// Bad run configuration (empty question bucket, unknown task, ...).
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace cost
