#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "kbreg/errors.hpp"

namespace kbreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Warnings (asymmetry drift, variance clamping, jitter fallback) go through a
// single hook so tests and the CLI can capture them.
using WarningHandler = std::function<void(const std::string&)>;
void set_warning_handler(WarningHandler handler);
void warn(const std::string& msg);

// short %g rendering for log/warning text
std::string fmt_g(double v);

double max_asymmetry(const Matrix& m);
Matrix symmetrized(const Matrix& m);

// Lower Cholesky factor of a symmetric positive-definite matrix.
struct CholFactor {
  Matrix lower;
  double jitter = 0.0;  // jitter actually added to the diagonal
  Index order() const { return lower.rows(); }
};

// Factor m + jitter*I. The input is symmetrized first (warning above 1e-10
// asymmetry). No automatic jitter escalation: a non-positive pivot throws
// NotPositiveDefinite carrying the failing pivot index.
CholFactor psd_factorize(const Matrix& m, double jitter = 0.0);

// Semidefinite variant used for sampling: zero pivots are allowed as long as
// the matrix stays consistent with positive semidefiniteness.
CholFactor psd_factorize_semidefinite(const Matrix& m, double jitter = 0.0);

// Try jitter 0 first, then the given fallback (warned and recorded in the
// returned factor).
CholFactor psd_factorize_with_fallback(const Matrix& m, double fallback_jitter);

Matrix psd_solve(const CholFactor& f, const Matrix& b);
Vector psd_solve(const CholFactor& f, const Vector& b);
Matrix psd_inverse(const CholFactor& f);
double psd_logdet(const CholFactor& f);

// Deterministic source of standard-normal draws; identical seed gives a
// bit-identical sequence.
struct SeededRng {
  explicit SeededRng(std::uint64_t seed) : seed(seed), engine(seed) {}
  std::uint64_t seed;
  std::mt19937_64 engine;
  double normal() { return dist_(engine); }
  double uniform() { return unif_(engine); }

private:
  std::normal_distribution<double> dist_{0.0, 1.0};
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

// count draws from N(mean, cov), one draw per column. cov may be singular
// (degenerate directions give deterministic coordinates).
Matrix mvn_sample(const Vector& mean, const Matrix& cov, SeededRng& rng, int count,
                  double jitter = 0.0);
Matrix mvn_sample(const Vector& mean, const CholFactor& factor, SeededRng& rng, int count);

// (Z + U L V^T)^-1 computed through the matrix inversion lemma:
//   Z^-1 - Z^-1 U (L^-1 + V^T Z^-1 U)^-1 V^T Z^-1
Matrix woodbury_inverse(const Matrix& z, const Matrix& u, const Matrix& l, const Matrix& v);

// Central finite differences (fn(x+h e_i) - fn(x-h e_i)) / (2h).
Vector finite_diff_grad(const std::function<double(const Vector&)>& fn, const Vector& x,
                        double h);

}  // namespace kbreg
