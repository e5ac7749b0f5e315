#pragma once

#include <functional>
#include <optional>

#include "kbreg/rvm.hpp"

namespace kbreg {

using KernelFn = std::function<double(const Vector&, const Vector&)>;

struct JointPosterior {
  Matrix points;  // P x d
  Vector mean;    // P
  Matrix cov;     // P x P
};

// Zero-mean Gaussian process regression. The kernel is either a named spec or
// an arbitrary symmetric covariance function (the dual-kernel route).
class GpModel {
public:
  static GpModel make(Dataset data, KernelSpec kernel, double noise_var, double jitter = 0.0);
  static GpModel make(Dataset data, KernelFn kernel, double noise_var, double jitter = 0.0);

  const Dataset& data() const { return data_; }
  const std::optional<KernelSpec>& kernel_spec() const { return spec_; }
  double kernel(const Vector& x, const Vector& z) const { return kernel_(x, z); }
  const Matrix& design() const { return design_; }
  double noise_var() const { return noise_var_; }
  const CholFactor& train_factor() const { return train_factor_; }  // chol(Psi + se2 I)
  const Vector& coefficients() const { return coef_; }              // (Psi + se2 I)^-1 y

  Vector kernel_vector(const Vector& x) const;        // psi(x) against the training inputs
  Matrix kernel_cross(const Matrix& points) const;    // N x P
  Matrix kernel_matrix(const Matrix& points) const;   // P x P

private:
  Dataset data_;
  std::optional<KernelSpec> spec_;
  KernelFn kernel_;
  Matrix design_;
  double noise_var_ = 0.0;
  CholFactor train_factor_;
  Vector coef_;
};

PointPrediction predict(const GpModel& model, const Vector& x);
JointPosterior predict_joint(const GpModel& model, const Matrix& points);
GaussianState smooth(const GpModel& model);

// One column per draw; covariance jittered by at most max_jitter (warned and
// recorded in the factor) before factorization.
Matrix sample_prior(const GpModel& model, const Matrix& points, SeededRng& rng, int count,
                    double max_jitter = 1e-8);
Matrix sample_posterior(const GpModel& model, const Matrix& points, SeededRng& rng, int count,
                        double max_jitter = 1e-8);

}  // namespace kbreg
