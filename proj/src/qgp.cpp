#include "kbreg/qgp.hpp"

#include <cmath>

namespace kbreg {

namespace {

double clamp_variance(double v, const char* where) {
  if (v >= 0.0) return v;
  if (v < -1e-10)
    throw NegativeVariance(std::string(where) + ": variance " + fmt_g(v) + " below clamp threshold");
  warn(std::string(where) + ": clamping small negative variance " + fmt_g(v));
  return 0.0;
}

}  // namespace

QgpModel QgpModel::make(Dataset data, KernelSpec kernel, double noise_var, double jitter) {
  kernel.validate();
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var))
    throw DomainError("QgpModel: noise variance must be finite and nonnegative");
  if (kernel.scalar_only() && data.dim() != 1)
    throw DomainError("QgpModel: kernel '" + kernel_family_name(kernel.family) +
                      "' requires scalar inputs");

  QgpModel m;
  m.data_ = std::move(data);
  m.basis_ = BasisSet::homogeneous(kernel, m.data_.inputs);
  DesignMatrix dm = design_matrix(m.basis_, m.data_.inputs);
  if (!dm.symmetric_flag)
    throw DomainError("QgpModel: design matrix is not symmetric; use RVM for such bases");
  m.design_ = symmetrized(dm.matrix);
  m.noise_var_ = noise_var;
  m.design_factor_ = psd_factorize(m.design_, jitter);
  Matrix train = m.design_;
  train.diagonal().array() += noise_var;
  m.train_factor_ = noise_var == 0.0 && jitter == 0.0 ? m.design_factor_
                                                      : psd_factorize(train, jitter);
  m.coef_ = psd_solve(m.train_factor_, m.data_.outputs);
  return m;
}

WeightPosterior weight_posterior(const QgpModel& model) {
  const Index n = model.data().size();
  const Matrix eye = Matrix::Identity(n, n);
  Matrix cov = psd_solve(model.design_factor(), eye) - psd_solve(model.train_factor(), eye);
  return WeightPosterior{model.coefficients(), symmetrized(cov)};
}

PointPrediction predict(const QgpModel& model, const Vector& x) {
  const Vector psi = design_vector(model.basis(), x);
  const double mean = psi.dot(model.coefficients());
  // both quadratic forms through triangular solves against the stored factors
  const Vector a = model.design_factor().lower.triangularView<Eigen::Lower>().solve(psi);
  const Vector b = model.train_factor().lower.triangularView<Eigen::Lower>().solve(psi);
  const double var = a.squaredNorm() - b.squaredNorm();
  return PointPrediction{mean, clamp_variance(var, "qgp::predict")};
}

GaussianState smooth(const QgpModel& model) {
  const Matrix& psi = model.design();
  const Matrix solved = psd_solve(model.train_factor(), psi);
  return GaussianState{psi * model.coefficients(), symmetrized(psi - psi * solved)};
}

}  // namespace kbreg
