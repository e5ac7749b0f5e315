#pragma once

#include "kbreg/rvm.hpp"

namespace kbreg {

// Probabilistic kernel ridge regression: the RVM specialization
// Sigma_rho = Psi^-1. Implemented standalone so the equivalence tests
// exercise an independent code path. Requires a symmetric positive-definite
// design.
class QgpModel {
public:
  static QgpModel make(Dataset data, KernelSpec kernel, double noise_var, double jitter = 0.0);

  const Dataset& data() const { return data_; }
  const BasisSet& basis() const { return basis_; }
  const Matrix& design() const { return design_; }
  double noise_var() const { return noise_var_; }
  const CholFactor& design_factor() const { return design_factor_; }  // chol(Psi)
  const CholFactor& train_factor() const { return train_factor_; }    // chol(Psi + se2 I)

private:
  Dataset data_;
  BasisSet basis_;
  Matrix design_;
  double noise_var_ = 0.0;
  CholFactor design_factor_;
  CholFactor train_factor_;
  Vector coef_;  // (Psi + se2 I)^-1 y

public:
  const Vector& coefficients() const { return coef_; }
};

// rho_hat = (Psi + se2 I)^-1 y, covariance Psi^-1 - (Psi + se2 I)^-1.
WeightPosterior weight_posterior(const QgpModel& model);

// mean psi(x)^T (Psi + se2 I)^-1 y,
// variance psi(x)^T Psi^-1 psi(x) - psi(x)^T (Psi + se2 I)^-1 psi(x).
PointPrediction predict(const QgpModel& model, const Vector& x);

// mean Psi (Psi + se2 I)^-1 y, covariance Psi - Psi (Psi + se2 I)^-1 Psi.
GaussianState smooth(const QgpModel& model);

}  // namespace kbreg
