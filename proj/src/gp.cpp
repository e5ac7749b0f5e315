#include "kbreg/gp.hpp"

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

GpModel GpModel::make(Dataset data, KernelSpec kernel, double noise_var, double jitter) {
  kernel.validate();
  if (kernel.scalar_only() && data.dim() != 1)
    throw DomainError("GpModel: kernel '" + kernel_family_name(kernel.family) +
                      "' requires scalar inputs");
  KernelSpec spec = kernel;
  GpModel m = make(std::move(data),
                   KernelFn([spec](const Vector& x, const Vector& z) {
                     return eval_kernel(spec, x, z);
                   }),
                   noise_var, jitter);
  m.spec_ = std::move(spec);
  return m;
}

GpModel GpModel::make(Dataset data, KernelFn kernel, double noise_var, double jitter) {
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var))
    throw DomainError("GpModel: noise variance must be finite and nonnegative");

  GpModel m;
  m.data_ = std::move(data);
  m.kernel_ = std::move(kernel);
  m.noise_var_ = noise_var;

  const Index n = m.data_.size();
  Matrix design(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      design(i, j) = m.kernel_(m.data_.inputs.row(i).transpose(), m.data_.inputs.row(j).transpose());
  if (max_asymmetry(design) > 1e-10)
    throw DomainError("GpModel: kernel does not produce a symmetric covariance matrix");
  m.design_ = symmetrized(design);

  Matrix train = m.design_;
  train.diagonal().array() += noise_var;
  m.train_factor_ = psd_factorize(train, jitter);
  m.coef_ = psd_solve(m.train_factor_, m.data_.outputs);
  return m;
}

Vector GpModel::kernel_vector(const Vector& x) const {
  Vector v(data_.size());
  for (Index i = 0; i < data_.size(); ++i) v(i) = kernel_(x, data_.inputs.row(i).transpose());
  return v;
}

Matrix GpModel::kernel_cross(const Matrix& points) const {
  Matrix v(data_.size(), points.rows());
  for (Index p = 0; p < points.rows(); ++p) v.col(p) = kernel_vector(points.row(p).transpose());
  return v;
}

Matrix GpModel::kernel_matrix(const Matrix& points) const {
  Matrix c(points.rows(), points.rows());
  for (Index i = 0; i < points.rows(); ++i)
    for (Index j = 0; j < points.rows(); ++j)
      c(i, j) = kernel_(points.row(i).transpose(), points.row(j).transpose());
  return symmetrized(c);
}

PointPrediction predict(const GpModel& model, const Vector& x) {
  const Vector psi = model.kernel_vector(x);
  const double mean = psi.dot(model.coefficients());
  const Vector half = model.train_factor().lower.triangularView<Eigen::Lower>().solve(psi);
  const double var = model.kernel(x, x) - half.squaredNorm();
  return PointPrediction{mean, clamp_variance(var, "gp::predict")};
}

JointPosterior predict_joint(const GpModel& model, const Matrix& points) {
  const Matrix v = model.kernel_cross(points);       // N x P
  const Matrix c = model.kernel_matrix(points);      // P x P
  const Vector mean = v.transpose() * model.coefficients();
  const Matrix cov = symmetrized(c - v.transpose() * psd_solve(model.train_factor(), v));
  return JointPosterior{points, mean, cov};
}

GaussianState smooth(const GpModel& model) {
  const Matrix& psi = model.design();
  const Matrix solved = psd_solve(model.train_factor(), psi);
  return GaussianState{psi * model.coefficients(), symmetrized(psi - psi * solved)};
}

Matrix sample_prior(const GpModel& model, const Matrix& points, SeededRng& rng, int count,
                    double max_jitter) {
  const Matrix c = model.kernel_matrix(points);
  return mvn_sample(Vector::Zero(points.rows()), c, rng, count, max_jitter);
}

Matrix sample_posterior(const GpModel& model, const Matrix& points, SeededRng& rng, int count,
                        double max_jitter) {
  const JointPosterior joint = predict_joint(model, points);
  return mvn_sample(joint.mean, joint.cov, rng, count, max_jitter);
}

}  // namespace kbreg
