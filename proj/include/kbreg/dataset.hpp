#pragma once

#include "kbreg/numerics.hpp"

namespace kbreg {

// N input rows of dimension d paired with N scalar outputs.
struct Dataset {
  Matrix inputs;   // N x d
  Vector outputs;  // N

  Index size() const { return outputs.size(); }
  Index dim() const { return inputs.cols(); }

  static Dataset make(Matrix inputs, Vector outputs) {
    if (inputs.rows() != outputs.size())
      throw DimensionMismatch("Dataset: " + std::to_string(inputs.rows()) + " input rows vs " +
                              std::to_string(outputs.size()) + " outputs");
    if (inputs.rows() == 0) throw EmptyDataset("Dataset: no rows");
    if (!inputs.allFinite() || !outputs.allFinite())
      throw DomainError("Dataset: non-finite values");
    return Dataset{std::move(inputs), std::move(outputs)};
  }

  // convenience for scalar inputs
  static Dataset make1d(const Vector& x, Vector outputs) {
    Matrix in(x.size(), 1);
    in.col(0) = x;
    return make(std::move(in), std::move(outputs));
  }
};

}  // namespace kbreg
