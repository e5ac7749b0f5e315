#include "kbreg/numerics.hpp"
#include <cstdio>

#include <cmath>
#include <iostream>
#include <sstream>

namespace kbreg {

namespace {

WarningHandler& handler() {
  static WarningHandler h = [](const std::string& msg) {
    std::cerr << "warning: " << msg << "\n";
  };
  return h;
}



// Column-oriented Cholesky. strict=false permits zero pivots (PSD sampling
// path); in that case the remaining column must vanish too.
CholFactor chol_impl(const Matrix& m, double jitter, bool strict) {
  if (m.rows() != m.cols())
    throw DimensionMismatch("psd_factorize: matrix is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()));
  if (jitter < 0.0) throw DomainError("psd_factorize: negative jitter");
  if (!m.allFinite()) throw DomainError("psd_factorize: non-finite entries");

  const double asym = max_asymmetry(m);
  if (asym > 1e-10)
    warn("psd_factorize: input asymmetry " + fmt_g(asym) + " exceeds 1e-10");

  Matrix a = symmetrized(m);
  const Index n = a.rows();
  a.diagonal().array() += jitter;

  const double scale = n > 0 ? a.diagonal().cwiseAbs().maxCoeff() : 0.0;
  const double tol = 1e-14 * (1.0 + scale);

  Matrix lower = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double d = a(j, j) - lower.row(j).head(j).squaredNorm();
    if (strict ? d <= tol : d < -tol)
      throw NotPositiveDefinite(
          "factorization failed at pivot " + std::to_string(j) + " (value " + fmt_g(d) + ")",
          static_cast<long>(j));
    if (!strict && d <= tol) {
      // rank-deficient direction: column must be (numerically) zero
      for (Index i = j + 1; i < n; ++i) {
        const double r = a(i, j) - lower.row(i).head(j).dot(lower.row(j).head(j));
        if (std::abs(r) > 1e3 * tol)
          throw NotPositiveDefinite("matrix is indefinite at pivot " + std::to_string(j),
                                    static_cast<long>(j));
      }
      continue;  // L(j,j) = 0, column stays zero
    }
    lower(j, j) = std::sqrt(d);
    if (j + 1 < n) {
      lower.col(j).tail(n - j - 1) =
          (a.col(j).tail(n - j - 1) -
           lower.bottomLeftCorner(n - j - 1, j) * lower.row(j).head(j).transpose()) /
          lower(j, j);
    }
  }
  return CholFactor{std::move(lower), jitter};
}

}  // namespace

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void set_warning_handler(WarningHandler h) { handler() = std::move(h); }

void warn(const std::string& msg) {
  if (handler()) handler()(msg);
}

double max_asymmetry(const Matrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

CholFactor psd_factorize(const Matrix& m, double jitter) { return chol_impl(m, jitter, true); }

CholFactor psd_factorize_semidefinite(const Matrix& m, double jitter) {
  return chol_impl(m, jitter, false);
}

CholFactor psd_factorize_with_fallback(const Matrix& m, double fallback_jitter) {
  try {
    return psd_factorize_semidefinite(m, 0.0);
  } catch (const NotPositiveDefinite&) {
    if (fallback_jitter <= 0.0) throw;
    warn("psd_factorize: falling back to jitter " + fmt_g(fallback_jitter));
    return psd_factorize_semidefinite(m, fallback_jitter);
  }
}

Matrix psd_solve(const CholFactor& f, const Matrix& b) {
  if (b.rows() != f.order())
    throw DimensionMismatch("psd_solve: rhs has " + std::to_string(b.rows()) + " rows, factor order " +
                            std::to_string(f.order()));
  Matrix x = f.lower.triangularView<Eigen::Lower>().solve(b);
  f.lower.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Vector psd_solve(const CholFactor& f, const Vector& b) {
  Matrix x = psd_solve(f, Matrix(b));
  return Vector(x.col(0));
}

Matrix psd_inverse(const CholFactor& f) {
  return psd_solve(f, Matrix(Matrix::Identity(f.order(), f.order())));
}

double psd_logdet(const CholFactor& f) {
  double acc = 0.0;
  for (Index i = 0; i < f.order(); ++i) {
    const double d = f.lower(i, i);
    if (d <= 0.0) throw NotPositiveDefinite("psd_logdet: zero pivot in factor", static_cast<long>(i));
    acc += std::log(d);
  }
  return 2.0 * acc;
}

Matrix mvn_sample(const Vector& mean, const CholFactor& factor, SeededRng& rng, int count) {
  if (mean.size() != factor.order())
    throw DimensionMismatch("mvn_sample: mean size does not match factor order");
  if (count < 0) throw DomainError("mvn_sample: negative count");
  const Index p = mean.size();
  Matrix draws(p, count);
  Vector z(p);
  for (int s = 0; s < count; ++s) {
    for (Index i = 0; i < p; ++i) z(i) = rng.normal();
    draws.col(s) = mean + factor.lower.triangularView<Eigen::Lower>() * z;
  }
  return draws;
}

Matrix mvn_sample(const Vector& mean, const Matrix& cov, SeededRng& rng, int count, double jitter) {
  if (mean.size() != cov.rows())
    throw DimensionMismatch("mvn_sample: mean size does not match covariance order");
  CholFactor f = psd_factorize_with_fallback(cov, jitter);
  return mvn_sample(mean, f, rng, count);
}

Matrix woodbury_inverse(const Matrix& z, const Matrix& u, const Matrix& l, const Matrix& v) {
  const Index n = z.rows();
  const Index k = l.rows();
  if (z.cols() != n || l.cols() != k || u.rows() != n || u.cols() != k || v.rows() != n ||
      v.cols() != k)
    throw DimensionMismatch("woodbury_inverse: nonconforming dimensions");

  Eigen::FullPivLU<Matrix> zlu(z);
  if (!zlu.isInvertible()) throw SingularMatrix("woodbury_inverse: Z is singular");
  Eigen::FullPivLU<Matrix> llu(l);
  if (!llu.isInvertible()) throw SingularMatrix("woodbury_inverse: L is singular");

  const Matrix zinv_u = zlu.solve(u);                       // Z^-1 U
  const Matrix inner = llu.inverse() + v.transpose() * zinv_u;  // L^-1 + V^T Z^-1 U
  Eigen::FullPivLU<Matrix> ilu(inner);
  if (!ilu.isInvertible()) throw SingularMatrix("woodbury_inverse: inner matrix is singular");

  const Matrix zinv = zlu.inverse();
  return zinv - zinv_u * ilu.solve(v.transpose() * zinv);
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& fn, const Vector& x, double h) {
  if (h <= 0.0) throw DomainError("finite_diff_grad: step must be positive");
  Vector g(x.size());
  Vector xp = x, xm = x;
  for (Index i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + h;
    xm(i) = x(i) - h;
    const double fp = fn(xp);
    const double fm = fn(xm);
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NonFiniteObjective("finite_diff_grad: objective non-finite near coordinate " +
                               std::to_string(i));
    g(i) = (fp - fm) / (2.0 * h);
    xp(i) = x(i);
    xm(i) = x(i);
  }
  return g;
}

}  // namespace kbreg
