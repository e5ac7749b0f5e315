#pragma once

#include <stdexcept>
#include <string>

namespace kbreg {

// Every exception carries a stable machine-readable code used by the CLI.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(msg), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

struct NotPositiveDefinite : Error {
  explicit NotPositiveDefinite(const std::string& msg, long pivot = -1)
      : Error("NOT_POSITIVE_DEFINITE", msg), pivot_index(pivot) {}
  long pivot_index;
};

struct SingularMatrix : Error {
  explicit SingularMatrix(const std::string& msg) : Error("SINGULAR_MATRIX", msg) {}
};

struct SingularDesign : Error {
  explicit SingularDesign(const std::string& msg) : Error("SINGULAR_DESIGN", msg) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& msg) : Error("DIMENSION_MISMATCH", msg) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error("DOMAIN_ERROR", msg) {}
};

struct DegenerateVariance : Error {
  explicit DegenerateVariance(const std::string& msg) : Error("DEGENERATE_VARIANCE", msg) {}
};

struct NegativeVariance : Error {
  explicit NegativeVariance(const std::string& msg) : Error("NEGATIVE_VARIANCE", msg) {}
};

struct NonFiniteObjective : Error {
  explicit NonFiniteObjective(const std::string& msg) : Error("NON_FINITE_OBJECTIVE", msg) {}
};

struct OptimizerDivergence : Error {
  explicit OptimizerDivergence(const std::string& msg) : Error("OPTIMIZER_DIVERGENCE", msg) {}
};

struct NonFiniteTarget : Error {
  explicit NonFiniteTarget(const std::string& msg) : Error("NON_FINITE_TARGET", msg) {}
};

struct SequenceTooShort : Error {
  explicit SequenceTooShort(const std::string& msg) : Error("SEQUENCE_TOO_SHORT", msg) {}
};

struct NonEquidistantGrid : Error {
  explicit NonEquidistantGrid(const std::string& msg) : Error("NON_EQUIDISTANT_GRID", msg) {}
};

struct DuplicateInputs : Error {
  explicit DuplicateInputs(const std::string& msg) : Error("DUPLICATE_INPUTS", msg) {}
};

struct BadK : Error {
  explicit BadK(const std::string& msg) : Error("BAD_K", msg) {}
};

struct IndexOutOfRange : Error {
  explicit IndexOutOfRange(const std::string& msg) : Error("INDEX_OUT_OF_RANGE", msg) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error("PARSE_ERROR", msg) {}
};

struct EmptyDataset : Error {
  explicit EmptyDataset(const std::string& msg) : Error("EMPTY_DATASET", msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error("CONFIG_ERROR", msg) {}
};

struct FormDisagreement : Error {
  explicit FormDisagreement(const std::string& msg) : Error("FORM_DISAGREEMENT", msg) {}
};

}  // namespace kbreg
