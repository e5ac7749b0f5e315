#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kbreg/dataset.hpp"
#include "kbreg/numerics.hpp"

namespace kbreg {

enum class KernelFamily {
  SquaredExpGeneral,   // a exp(-|x-z|^beta / lambda) + v1 + v2*delta_ij
  RadialExponential,   // exp(-||x-z||_p / lambda)
  Boxcar,              // 1 inside ||x-z||_p <= epsilon, else 0
  Wiener,              // min{x,z}
  BrownianBridge,      // min{x,z} - x z, inputs in [0,1]
  OrnsteinUhlenbeck,   // sigma^2/(2 theta) e^{-theta(x+z)} (e^{2 theta min{x,z}} - 1)
  Ar1Discrete,         // gamma^{|t-t'|} sigma_v^2 / (1 - gamma^2)
};

KernelFamily kernel_family_from_string(const std::string& name);
std::string kernel_family_name(KernelFamily family);

struct KernelSpec {
  KernelFamily family;
  std::map<std::string, double> params;

  double param(const std::string& name, double fallback) const;
  double require(const std::string& name) const;
  bool scalar_only() const;       // wiener / brownian-bridge / OU / ar1
  bool has_mean_function() const; // only OU

  // Throws DomainError on parameter violations (scales <= 0, |gamma| >= 1,
  // beta <= 0, p < 1).
  void validate() const;

  static KernelSpec squared_exp(double a, double lambda, double beta = 2.0, double v1 = 0.0,
                                double v2 = 0.0);
  static KernelSpec radial_exp(double lambda, double p = 2.0);
  static KernelSpec boxcar(double epsilon, double p = 2.0);
  static KernelSpec wiener();
  static KernelSpec brownian_bridge();
  static KernelSpec ornstein_uhlenbeck(double theta, double sigma, double mu0, double nu);
  static KernelSpec ar1(double gamma, double process_var);
};

// same_datum enables the v2*delta_ij term; it is set only for training-index
// identity, never for numerically equal test inputs.
double eval_kernel(const KernelSpec& spec, const Vector& x, const Vector& z,
                   bool same_datum = false);

// Table-2 prior mean; zero for every family except Ornstein-Uhlenbeck.
double mean_function(const KernelSpec& spec, const Vector& x);

// One kernel per training input, centred there. Heterogeneous sets are the
// RVM generalization; GP/Q-GP require a single spec.
struct BasisSet {
  struct Entry {
    Vector center;
    KernelSpec spec;
  };
  std::vector<Entry> entries;

  Index size() const { return static_cast<Index>(entries.size()); }
  static BasisSet homogeneous(const KernelSpec& spec, const Matrix& centers);
};

// psi(x) = [psi_1(x, x_1), ..., psi_N(x, x_N)]^T
Vector design_vector(const BasisSet& basis, const Vector& x);

// P x M matrix of stacked design vectors, row p = psi(x_p)^T.
Matrix cross_design(const BasisSet& basis, const Matrix& points);

struct DesignMatrix {
  Matrix matrix;        // N x N
  bool symmetric_flag;  // max asymmetry <= 1e-10
};

DesignMatrix design_matrix(const BasisSet& basis, const Matrix& inputs);

struct CovarianceReport {
  bool symmetric = false;
  bool positive_definite = false;
  double asymmetry = 0.0;
  double min_chol_diag = 0.0;
  long failed_pivot = -1;
  bool ok_for_gp() const { return symmetric && positive_definite; }
};

CovarianceReport validate_covariance(const DesignMatrix& m, double jitter = 0.0);

// k_dual(x, z) = psi(x)^T Sigma_rho psi(z)
double dual_kernel(const BasisSet& basis, const Matrix& prior_cov, const Vector& x,
                   const Vector& z);

// K_dual = Psi Sigma_rho Psi^T evaluated on the given points.
Matrix dual_kernel_matrix(const BasisSet& basis, const Matrix& prior_cov, const Matrix& points);

// corr(f(x), f(z)) under the induced prior; |value| <= 1.
double induced_correlation(const BasisSet& basis, const Matrix& prior_cov, const Vector& x,
                           const Vector& z);

}  // namespace kbreg
