#include "kbreg/rvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kbreg/evidence.hpp"

namespace kbreg {

namespace {

constexpr double kVarianceClamp = -1e-10;

double clamp_variance(double v, const char* where) {
  if (v >= 0.0) return v;
  if (v < kVarianceClamp)
    throw NegativeVariance(std::string(where) + ": variance " + fmt_g(v) + " below clamp threshold");
  warn(std::string(where) + ": clamping small negative variance " + fmt_g(v));
  return 0.0;
}

void check_close(const Vector& a, const Vector& b, double tol, const char* what) {
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  const double diff = (a - b).cwiseAbs().maxCoeff();
  if (diff > tol * scale)
    throw FormDisagreement(std::string(what) + " forms disagree by " + std::to_string(diff));
}

void check_close(const Matrix& a, const Matrix& b, double tol, const char* what) {
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  const double diff = (a - b).cwiseAbs().maxCoeff();
  if (diff > tol * scale)
    throw FormDisagreement(std::string(what) + " forms disagree by " + std::to_string(diff));
}

}  // namespace

RvmModel RvmModel::make(Dataset data, BasisSet basis, Matrix prior_cov, double noise_var) {
  RvmModel m;
  if (basis.size() == 0) throw DomainError("RvmModel: empty basis");
  if (prior_cov.rows() != basis.size() || prior_cov.cols() != basis.size())
    throw DimensionMismatch("RvmModel: prior covariance order does not match basis size");
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var))
    throw DomainError("RvmModel: noise variance must be finite and nonnegative");
  if (max_asymmetry(prior_cov) > 1e-10)
    throw DomainError("RvmModel: prior covariance is not symmetric");

  m.data_ = std::move(data);
  m.basis_ = std::move(basis);
  m.prior_cov_ = symmetrized(prior_cov);
  m.noise_var_ = noise_var;
  m.design_ = cross_design(m.basis_, m.data_.inputs);
  m.dual_ = symmetrized(m.design_ * m.prior_cov_ * m.design_.transpose());
  m.gram_ = m.dual_;
  m.gram_.diagonal().array() += noise_var;
  try {
    m.factor_ = psd_factorize(m.gram_);
  } catch (const NotPositiveDefinite& e) {
    if (noise_var == 0.0)
      throw SingularDesign("RvmModel: noise-free model needs an invertible design (pivot " +
                           std::to_string(e.pivot_index) + " failed)");
    throw;
  }
  m.weight_mean_ = m.prior_cov_ * m.design_.transpose() * psd_solve(m.factor_, m.data_.outputs);
  return m;
}

WeightPosterior weight_posterior(const RvmModel& model, bool cross_check) {
  const Matrix psi_sigma = model.design() * model.prior_cov();  // Psi Sigma_rho, N x M
  const Matrix cov =
      symmetrized(model.prior_cov() -
                  psi_sigma.transpose() * psd_solve(model.marginal_factor(), psi_sigma));
  WeightPosterior post{model.weight_mean(), cov};

  if (cross_check) {
    if (model.noise_var() <= 0.0)
      throw DomainError("weight_posterior: cross_check needs noise_var > 0");
    // (1/se2)(Psi^T Psi / se2 + Sigma_rho^-1)^-1 Psi^T y  and
    // (Psi^T Psi + se2 Sigma_rho^-1)^-1 Psi^T y
    const double se2 = model.noise_var();
    const Matrix prior_inv = psd_inverse(psd_factorize(model.prior_cov()));
    const Matrix gtg = model.design().transpose() * model.design();
    const CholFactor f0 = psd_factorize(symmetrized(gtg / se2 + prior_inv));
    const Vector mean0 = psd_solve(f0, Vector(model.design().transpose() * model.data().outputs)) / se2;
    const CholFactor f1 = psd_factorize(symmetrized(gtg + se2 * prior_inv));
    const Vector mean1 = psd_solve(f1, Vector(model.design().transpose() * model.data().outputs));
    check_close(mean0, post.mean, 1e-8, "weight posterior mean");
    check_close(mean1, post.mean, 1e-8, "weight posterior mean");
    check_close(psd_inverse(f0), post.cov, 1e-8, "weight posterior covariance");
  }
  return post;
}

PointPrediction predict(const RvmModel& model, const Vector& x) {
  const Vector psi = design_vector(model.basis(), x);
  const double mean = psi.dot(model.weight_mean());
  const Vector sig_psi = model.prior_cov() * psi;
  const Vector u = model.design() * sig_psi;  // Psi Sigma_rho psi(x)
  const double var = psi.dot(sig_psi) - u.dot(psd_solve(model.marginal_factor(), u));
  return PointPrediction{mean, clamp_variance(var, "rvm::predict")};
}

GaussianState smooth(const RvmModel& model) {
  const Matrix& k = model.marginal_cov();  // with noise on the diagonal
  const Matrix dual = k - model.noise_var() * Matrix::Identity(k.rows(), k.cols());
  const Matrix solved = psd_solve(model.marginal_factor(), dual);
  return GaussianState{dual * psd_solve(model.marginal_factor(), model.data().outputs),
                       symmetrized(dual - dual * solved)};
}

GaussianState induced_prior(const RvmModel& model, const Matrix& points) {
  Matrix cov = dual_kernel_matrix(model.basis(), model.prior_cov(), points);
  return GaussianState{Vector::Zero(points.rows()), std::move(cov)};
}

Matrix sample_prior(const RvmModel& model, const Matrix& points, SeededRng& rng, int count,
                    SamplePath path) {
  const Matrix v = cross_design(model.basis(), points);  // P x M
  if (path == SamplePath::WeightSpace) {
    const Matrix weights =
        mvn_sample(Vector::Zero(model.basis().size()), model.prior_cov(), rng, count, 1e-8);
    return v * weights;
  }
  const Matrix cov = symmetrized(v * model.prior_cov() * v.transpose());
  return mvn_sample(Vector::Zero(points.rows()), cov, rng, count, 1e-8);
}

Matrix sample_posterior(const RvmModel& model, const Matrix& points, SeededRng& rng, int count,
                        SamplePath path) {
  const Matrix v = cross_design(model.basis(), points);
  if (path == SamplePath::WeightSpace) {
    const WeightPosterior post = weight_posterior(model);
    const Matrix weights = mvn_sample(post.mean, post.cov, rng, count, 1e-8);
    return v * weights;
  }
  const Matrix v_sigma_psi = v * model.prior_cov() * model.design().transpose();  // P x N
  const Vector mean = v_sigma_psi * psd_solve(model.marginal_factor(), model.data().outputs);
  const Matrix cov =
      symmetrized(v * model.prior_cov() * v.transpose() -
                  v_sigma_psi * psd_solve(model.marginal_factor(), Matrix(v_sigma_psi.transpose())));
  return mvn_sample(mean, cov, rng, count, 1e-8);
}

namespace {

// one golden-section pass maximizing g over [lo, hi]
std::pair<double, double> golden_max(const std::function<double(double)>& g, double lo, double hi,
                                     int iters) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = g(c), fd = g(d);
  double best_t = fc > fd ? c : d;
  double best_f = std::max(fc, fd);
  for (int it = 0; it < iters; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = g(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = g(d);
    }
    if (fc > best_f) { best_f = fc; best_t = c; }
    if (fd > best_f) { best_f = fd; best_t = d; }
  }
  return {best_t, best_f};
}

}  // namespace

RelevanceResult learn_relevance(const RvmModel& model, int max_iter, double prune_threshold) {
  const Index m = model.basis().size();
  Matrix offdiag = model.prior_cov();
  offdiag.diagonal().setZero();
  if (offdiag.cwiseAbs().maxCoeff() > 1e-12 * (1.0 + model.prior_cov().diagonal().cwiseAbs().maxCoeff()))
    throw DomainError("learn_relevance: prior covariance must be diagonal");

  Vector alpha = model.prior_cov().diagonal().cwiseInverse();
  const double lo = std::log(1e-8), hi = std::log(1e8);

  auto objective = [&](const Vector& a) {
    return log_marginal_rvm(model.design(), Matrix(a.cwiseInverse().asDiagonal()),
                            model.noise_var(), model.data().outputs);
  };

  double current = objective(alpha);
  if (!std::isfinite(current))
    throw OptimizerDivergence("learn_relevance: objective non-finite at the initial precisions");

  int sweeps = 0;
  for (; sweeps < max_iter; ++sweeps) {
    const double before = current;
    for (Index i = 0; i < m; ++i) {
      auto g = [&](double t) {
        Vector trial = alpha;
        trial(i) = std::exp(t);
        const double v = objective(trial);
        return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
      };
      auto [t_best, f_best] = golden_max(g, lo, hi, 60);
      if (f_best > current) {
        alpha(i) = std::exp(t_best);
        current = f_best;
      }
    }
    if (!std::isfinite(current))
      throw OptimizerDivergence("learn_relevance: objective diverged");
    if (current - before <= 1e-8 * (1.0 + std::abs(before))) {
      ++sweeps;
      break;
    }
  }

  RelevanceResult result{alpha, {}, {}, model, current, sweeps};
  for (Index i = 0; i < m; ++i) {
    if (alpha(i) > prune_threshold)
      result.pruned.push_back(i);
    else
      result.surviving.push_back(i);
  }
  if (result.surviving.empty()) {
    // keep the most relevant basis so the refitted model stays usable
    Index keep = 0;
    alpha.minCoeff(&keep);
    result.surviving.push_back(keep);
    result.pruned.erase(std::find(result.pruned.begin(), result.pruned.end(), keep));
  }

  BasisSet sub;
  Vector sub_var(static_cast<Index>(result.surviving.size()));
  for (Index j = 0; j < static_cast<Index>(result.surviving.size()); ++j) {
    sub.entries.push_back(model.basis().entries[result.surviving[j]]);
    sub_var(j) = 1.0 / alpha(result.surviving[j]);
  }
  result.refitted =
      RvmModel::make(model.data(), std::move(sub), Matrix(sub_var.asDiagonal()), model.noise_var());
  return result;
}

}  // namespace kbreg
