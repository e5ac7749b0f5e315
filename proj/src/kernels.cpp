#include "kbreg/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace kbreg {

namespace {

double lp_norm(const Vector& d, double p) {
  if (std::isinf(p)) return d.cwiseAbs().maxCoeff();
  if (p == 2.0) return d.norm();
  if (p == 1.0) return d.cwiseAbs().sum();
  return std::pow(d.cwiseAbs().array().pow(p).sum(), 1.0 / p);
}

double scalar_input(const Vector& x, const char* family) {
  if (x.size() != 1)
    throw DomainError(std::string(family) + " kernel requires scalar inputs, got dimension " +
                      std::to_string(x.size()));
  return x(0);
}

long integer_lag(double a, double b) {
  const double tau = std::abs(a - b);
  const double k = std::round(tau);
  if (std::abs(tau - k) > 1e-9)
    throw DomainError("ar1-discrete kernel requires integer time indices");
  return static_cast<long>(k);
}

}  // namespace

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "squared-exp-general") return KernelFamily::SquaredExpGeneral;
  if (name == "radial-exponential") return KernelFamily::RadialExponential;
  if (name == "boxcar") return KernelFamily::Boxcar;
  if (name == "wiener") return KernelFamily::Wiener;
  if (name == "brownian-bridge") return KernelFamily::BrownianBridge;
  if (name == "ornstein-uhlenbeck") return KernelFamily::OrnsteinUhlenbeck;
  if (name == "ar1-discrete") return KernelFamily::Ar1Discrete;
  throw DomainError("unknown kernel family '" + name + "'");
}

std::string kernel_family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::SquaredExpGeneral: return "squared-exp-general";
    case KernelFamily::RadialExponential: return "radial-exponential";
    case KernelFamily::Boxcar: return "boxcar";
    case KernelFamily::Wiener: return "wiener";
    case KernelFamily::BrownianBridge: return "brownian-bridge";
    case KernelFamily::OrnsteinUhlenbeck: return "ornstein-uhlenbeck";
    case KernelFamily::Ar1Discrete: return "ar1-discrete";
  }
  return "?";
}

double KernelSpec::param(const std::string& name, double fallback) const {
  auto it = params.find(name);
  return it == params.end() ? fallback : it->second;
}

double KernelSpec::require(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end())
    throw DomainError("kernel '" + kernel_family_name(family) + "' is missing parameter '" + name +
                      "'");
  return it->second;
}

bool KernelSpec::scalar_only() const {
  switch (family) {
    case KernelFamily::Wiener:
    case KernelFamily::BrownianBridge:
    case KernelFamily::OrnsteinUhlenbeck:
    case KernelFamily::Ar1Discrete: return true;
    default: return false;
  }
}

bool KernelSpec::has_mean_function() const { return family == KernelFamily::OrnsteinUhlenbeck; }

void KernelSpec::validate() const {
  auto positive = [&](const std::string& name) {
    if (require(name) <= 0.0)
      throw DomainError("kernel parameter '" + name + "' must be strictly positive");
  };
  auto norm_order = [&]() {
    const double p = param("p", 2.0);
    if (p < 1.0) throw DomainError("norm order p must be >= 1");
  };
  switch (family) {
    case KernelFamily::SquaredExpGeneral:
      positive("a");
      positive("lambda");
      if (param("beta", 2.0) <= 0.0)
        throw DomainError("kernel parameter 'beta' must be strictly positive");
      if (param("v1", 0.0) < 0.0 || param("v2", 0.0) < 0.0)
        throw DomainError("offset variances v1, v2 must be nonnegative");
      norm_order();
      break;
    case KernelFamily::RadialExponential:
      positive("lambda");
      norm_order();
      break;
    case KernelFamily::Boxcar:
      positive("epsilon");
      norm_order();
      break;
    case KernelFamily::Wiener:
    case KernelFamily::BrownianBridge: break;
    case KernelFamily::OrnsteinUhlenbeck:
      positive("theta");
      positive("sigma");
      break;
    case KernelFamily::Ar1Discrete:
      positive("process_var");
      if (std::abs(require("gamma")) >= 1.0) throw DomainError("ar1 kernel requires |gamma| < 1");
      break;
  }
}

KernelSpec KernelSpec::squared_exp(double a, double lambda, double beta, double v1, double v2) {
  return KernelSpec{KernelFamily::SquaredExpGeneral,
                    {{"a", a}, {"lambda", lambda}, {"beta", beta}, {"v1", v1}, {"v2", v2}}};
}

KernelSpec KernelSpec::radial_exp(double lambda, double p) {
  return KernelSpec{KernelFamily::RadialExponential, {{"lambda", lambda}, {"p", p}}};
}

KernelSpec KernelSpec::boxcar(double epsilon, double p) {
  return KernelSpec{KernelFamily::Boxcar, {{"epsilon", epsilon}, {"p", p}}};
}

KernelSpec KernelSpec::wiener() { return KernelSpec{KernelFamily::Wiener, {}}; }

KernelSpec KernelSpec::brownian_bridge() { return KernelSpec{KernelFamily::BrownianBridge, {}}; }

KernelSpec KernelSpec::ornstein_uhlenbeck(double theta, double sigma, double mu0, double nu) {
  return KernelSpec{KernelFamily::OrnsteinUhlenbeck,
                    {{"theta", theta}, {"sigma", sigma}, {"mu0", mu0}, {"nu", nu}}};
}

KernelSpec KernelSpec::ar1(double gamma, double process_var) {
  return KernelSpec{KernelFamily::Ar1Discrete, {{"gamma", gamma}, {"process_var", process_var}}};
}

double eval_kernel(const KernelSpec& spec, const Vector& x, const Vector& z, bool same_datum) {
  if (x.size() != z.size()) throw DimensionMismatch("eval_kernel: input dimensions differ");
  if (!x.allFinite() || !z.allFinite()) throw DomainError("eval_kernel: non-finite input");

  switch (spec.family) {
    case KernelFamily::SquaredExpGeneral: {
      const double r = lp_norm(x - z, spec.param("p", 2.0));
      double v = spec.require("a") *
                     std::exp(-std::pow(r, spec.param("beta", 2.0)) / spec.require("lambda")) +
                 spec.param("v1", 0.0);
      if (same_datum) v += spec.param("v2", 0.0);
      return v;
    }
    case KernelFamily::RadialExponential: {
      const double r = lp_norm(x - z, spec.param("p", 2.0));
      return std::exp(-r / spec.require("lambda"));
    }
    case KernelFamily::Boxcar: {
      const double r = lp_norm(x - z, spec.param("p", 2.0));
      return r <= spec.require("epsilon") ? 1.0 : 0.0;
    }
    case KernelFamily::Wiener: {
      const double a = scalar_input(x, "wiener");
      const double b = scalar_input(z, "wiener");
      if (a < 0.0 || b < 0.0) throw DomainError("wiener kernel requires nonnegative inputs");
      return std::min(a, b);
    }
    case KernelFamily::BrownianBridge: {
      const double a = scalar_input(x, "brownian-bridge");
      const double b = scalar_input(z, "brownian-bridge");
      if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0)
        throw DomainError("brownian-bridge kernel requires inputs in [0,1]");
      return std::min(a, b) - a * b;
    }
    case KernelFamily::OrnsteinUhlenbeck: {
      const double a = scalar_input(x, "ornstein-uhlenbeck");
      const double b = scalar_input(z, "ornstein-uhlenbeck");
      if (a < 0.0 || b < 0.0)
        throw DomainError("ornstein-uhlenbeck kernel requires nonnegative inputs");
      const double theta = spec.require("theta");
      const double sigma = spec.require("sigma");
      return sigma * sigma / (2.0 * theta) * std::exp(-theta * (a + b)) *
             (std::exp(2.0 * theta * std::min(a, b)) - 1.0);
    }
    case KernelFamily::Ar1Discrete: {
      const double gamma = spec.require("gamma");
      const double sv2 = spec.require("process_var");
      const long k = integer_lag(scalar_input(x, "ar1-discrete"), scalar_input(z, "ar1-discrete"));
      return std::pow(gamma, static_cast<double>(k)) * sv2 / (1.0 - gamma * gamma);
    }
  }
  throw DomainError("eval_kernel: unhandled family");
}

double mean_function(const KernelSpec& spec, const Vector& x) {
  if (spec.family != KernelFamily::OrnsteinUhlenbeck) return 0.0;
  const double t = scalar_input(x, "ornstein-uhlenbeck");
  const double theta = spec.require("theta");
  const double mu0 = spec.param("mu0", 0.0);
  const double nu = spec.param("nu", 0.0);
  return std::exp(-theta * t) * mu0 + nu * (1.0 - std::exp(-theta * t));
}

BasisSet BasisSet::homogeneous(const KernelSpec& spec, const Matrix& centers) {
  spec.validate();
  BasisSet basis;
  basis.entries.reserve(centers.rows());
  for (Index i = 0; i < centers.rows(); ++i)
    basis.entries.push_back({centers.row(i).transpose(), spec});
  return basis;
}

Vector design_vector(const BasisSet& basis, const Vector& x) {
  if (basis.size() == 0) throw DomainError("design_vector: empty basis");
  Vector v(basis.size());
  for (Index n = 0; n < basis.size(); ++n)
    v(n) = eval_kernel(basis.entries[n].spec, x, basis.entries[n].center);
  return v;
}

Matrix cross_design(const BasisSet& basis, const Matrix& points) {
  Matrix v(points.rows(), basis.size());
  for (Index p = 0; p < points.rows(); ++p)
    v.row(p) = design_vector(basis, points.row(p).transpose()).transpose();
  return v;
}

DesignMatrix design_matrix(const BasisSet& basis, const Matrix& inputs) {
  if (basis.size() != inputs.rows())
    throw DimensionMismatch("design_matrix: basis size " + std::to_string(basis.size()) +
                            " vs " + std::to_string(inputs.rows()) + " inputs");
  const Index n = inputs.rows();
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      m(i, j) = eval_kernel(basis.entries[j].spec, inputs.row(i).transpose(),
                            basis.entries[j].center, i == j);
  const bool symmetric = max_asymmetry(m) <= 1e-10;
  return DesignMatrix{std::move(m), symmetric};
}

CovarianceReport validate_covariance(const DesignMatrix& m, double jitter) {
  CovarianceReport report;
  report.asymmetry = max_asymmetry(m.matrix);
  report.symmetric = report.asymmetry <= 1e-10;
  try {
    CholFactor f = psd_factorize(m.matrix, jitter);
    report.positive_definite = true;
    report.min_chol_diag = f.lower.diagonal().minCoeff();
  } catch (const NotPositiveDefinite& e) {
    report.positive_definite = false;
    report.failed_pivot = e.pivot_index;
  }
  return report;
}

double dual_kernel(const BasisSet& basis, const Matrix& prior_cov, const Vector& x,
                   const Vector& z) {
  if (prior_cov.rows() != basis.size() || prior_cov.cols() != basis.size())
    throw DimensionMismatch("dual_kernel: prior covariance order does not match basis size");
  const Vector px = design_vector(basis, x);
  const Vector pz = design_vector(basis, z);
  return px.dot(prior_cov * pz);
}

Matrix dual_kernel_matrix(const BasisSet& basis, const Matrix& prior_cov, const Matrix& points) {
  if (prior_cov.rows() != basis.size() || prior_cov.cols() != basis.size())
    throw DimensionMismatch("dual_kernel_matrix: prior covariance order does not match basis size");
  const Matrix v = cross_design(basis, points);
  return symmetrized(v * prior_cov * v.transpose());
}

double induced_correlation(const BasisSet& basis, const Matrix& prior_cov, const Vector& x,
                           const Vector& z) {
  const double kxx = dual_kernel(basis, prior_cov, x, x);
  const double kzz = dual_kernel(basis, prior_cov, z, z);
  const double denom = std::sqrt(kxx) * std::sqrt(kzz);
  if (!(denom > 1e-300))
    throw DegenerateVariance("induced_correlation: vanishing prior variance at an input");
  return dual_kernel(basis, prior_cov, x, z) / denom;
}

}  // namespace kbreg
