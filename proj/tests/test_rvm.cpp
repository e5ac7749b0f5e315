#include <doctest.h>

#include <cmath>
#include <random>

#include "kbreg/rvm.hpp"

using namespace kbreg;

namespace {

Vector scalar(double x) {
  Vector v(1);
  v << x;
  return v;
}

Vector linspace(double from, double to, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i)
    v(i) = n == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

RvmModel gaussian_rvm(const Vector& x, const Vector& y, double lambda, double prior_var,
                      double noise_var) {
  const Dataset data = Dataset::make1d(x, y);
  BasisSet basis = BasisSet::homogeneous(KernelSpec::squared_exp(1.0, lambda), data.inputs);
  const Matrix prior = prior_var * Matrix::Identity(x.size(), x.size());
  return RvmModel::make(data, std::move(basis), prior, noise_var);
}

}  // namespace

TEST_CASE("weight posterior: scalar case and closed forms") {
  // N=1, Psi=[1], Sigma_rho=[1], se2=1, y=[2] -> mean 1, cov 0.5
  const RvmModel m = gaussian_rvm(scalar(0.0), scalar(2.0), 2.0, 1.0, 1.0);
  const WeightPosterior post = weight_posterior(m, true);
  CHECK(post.mean(0) == doctest::Approx(1.0));
  CHECK(post.cov(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("weight posterior: noise-free interpolation gives Psi^-1 y") {
  const Vector x = linspace(0, 4, 5);
  Vector y(5);
  y << 1.0, -0.5, 0.7, 2.0, -1.2;
  const RvmModel m = gaussian_rvm(x, y, 2.0, 1.0, 0.0);
  const Vector direct = m.design().partialPivLu().solve(y);
  CHECK((weight_posterior(m).mean - direct).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("weight posterior: vanishing prior forces the weights to zero") {
  const Vector x = linspace(0, 4, 5);
  Vector y(5);
  y << 1.0, -0.5, 0.7, 2.0, -1.2;
  const RvmModel m = gaussian_rvm(x, y, 2.0, 1e-12, 1.0);
  CHECK(weight_posterior(m).mean.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("uninformative prior approaches the interpolant weights") {
  const Vector x = linspace(0, 4, 5);
  Vector y(5);
  y << 1.0, -0.5, 0.7, 2.0, -1.2;
  const RvmModel m = gaussian_rvm(x, y, 2.0, 1e12, 1.0);
  const Vector direct = m.design().partialPivLu().solve(y);
  CHECK((weight_posterior(m).mean - direct).cwiseAbs().maxCoeff() <=
        1e-4 * (1.0 + direct.cwiseAbs().maxCoeff()));
}

TEST_CASE("the three posterior forms agree on random well-conditioned instances") {
  std::mt19937 gen(17);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 8;
    Vector x(n), y(n);
    for (Index i = 0; i < n; ++i) {
      x(i) = static_cast<double>(i) + 0.2 * nd(gen);
      y(i) = nd(gen);
    }
    const RvmModel m = gaussian_rvm(x, y, 1.5, 2.0, 0.3);
    CHECK_NOTHROW(weight_posterior(m, true));  // cross-check throws on disagreement
  }
}

TEST_CASE("predict: single-datum closed form") {
  const RvmModel m = gaussian_rvm(scalar(0.0), scalar(2.0), 2.0, 1.0, 1.0);
  const PointPrediction p = predict(m, scalar(0.0));
  CHECK(p.mean == doctest::Approx(1.0));
  CHECK(p.variance == doctest::Approx(0.5));
}

TEST_CASE("predict: interpolation has zero variance everywhere and hits the data") {
  const Vector x = linspace(0, 4, 5);
  Vector y(5);
  y << 1.0, -0.5, 0.7, 2.0, -1.2;
  const RvmModel m = gaussian_rvm(x, y, 2.0, 1.0, 0.0);
  for (Index i = 0; i < 5; ++i) {
    const PointPrediction p = predict(m, scalar(x(i)));
    CHECK(std::abs(p.mean - y(i)) <= 1e-6);
  }
  for (double q = -1.0; q <= 5.0; q += 0.25)
    CHECK(predict(m, scalar(q)).variance <= 1e-10);
}

TEST_CASE("predict: localized bases H far field collapses to zero") {
  const Vector x = linspace(-1, 1, 3);
  Vector y(3);
  y << 1.0, 2.0, -1.0;
  const RvmModel m = gaussian_rvm(x, y, 2.0, 1.0, 0.25);
  const PointPrediction p = predict(m, scalar(50.0));
  CHECK(std::abs(p.mean) <= 1e-6);
  CHECK(p.variance <= 1e-6);
}

TEST_CASE("predict mean is linear in y") {
  const Vector x = linspace(0, 4, 6);
  std::mt19937 gen(5);
  std::normal_distribution<double> nd;
  Vector y1(6), y2(6);
  for (Index i = 0; i < 6; ++i) {
    y1(i) = nd(gen);
    y2(i) = nd(gen);
  }
  const double a = 0.7, b = -1.3;
  const RvmModel m1 = gaussian_rvm(x, y1, 2.0, 1.0, 0.4);
  const RvmModel m2 = gaussian_rvm(x, y2, 2.0, 1.0, 0.4);
  const RvmModel mc = gaussian_rvm(x, Vector(a * y1 + b * y2), 2.0, 1.0, 0.4);
  for (double q : {-0.3, 1.1, 2.9, 4.4}) {
    const double combined = predict(mc, scalar(q)).mean;
    const double separate = a * predict(m1, scalar(q)).mean + b * predict(m2, scalar(q)).mean;
    CHECK(std::abs(combined - separate) <= 1e-10 * (1.0 + std::abs(separate)));
  }
}

TEST_CASE("posterior weight covariance is dominated by the prior") {
  const Vector x = linspace(0, 4, 6);
  Vector y(6);
  y << 0.3, -1.0, 0.2, 1.4, 0.9, -0.4;
  const RvmModel m = gaussian_rvm(x, y, 2.0, 1.5, 0.3);
  const WeightPosterior post = weight_posterior(m);
  CHECK_NOTHROW(psd_factorize(Matrix(m.prior_cov() - post.cov), 1e-10));
}

TEST_CASE("smooth: interpolation, prior domination, and pointwise consistency") {
  const Vector x = linspace(0, 4, 5);
  Vector y(5);
  y << 1.0, -0.5, 0.7, 2.0, -1.2;

  const RvmModel interp = gaussian_rvm(x, y, 2.0, 1.0, 0.0);
  CHECK((smooth(interp).mean - y).cwiseAbs().maxCoeff() <= 1e-8);

  const RvmModel flooded = gaussian_rvm(x, y, 2.0, 1.0, 1e12);
  CHECK(smooth(flooded).mean.cwiseAbs().maxCoeff() <= 1e-6);

  const RvmModel m = gaussian_rvm(x, y, 2.0, 1.0, 0.3);
  const GaussianState state = smooth(m);
  for (Index i = 0; i < 5; ++i) {
    const PointPrediction p = predict(m, scalar(x(i)));
    CHECK(std::abs(state.mean(i) - p.mean) <= 1e-10);
    CHECK(std::abs(state.cov(i, i) - p.variance) <= 1e-10);
  }
}

TEST_CASE("induced prior matches the dual kernel forms") {
  const Vector x = linspace(0, 2, 3);
  Vector y(3);
  y << 0.0, 1.0, -1.0;
  const RvmModel m = gaussian_rvm(x, y, 2.0, 2.25, 0.25);

  Matrix one(1, 1);
  one << 0.7;
  const GaussianState p1 = induced_prior(m, one);
  const Vector psi = design_vector(m.basis(), scalar(0.7));
  CHECK(p1.mean(0) == 0.0);
  CHECK(p1.cov(0, 0) == doctest::Approx(psi.dot(m.prior_cov() * psi)));

  const GaussianState ptrain = induced_prior(m, m.data().inputs);
  const Matrix expected =
      m.design() * m.prior_cov() * m.design().transpose();
  CHECK((ptrain.cov - expected).cwiseAbs().maxCoeff() <= 1e-12);

  // zero prior covariance induces the null prior
  const Dataset data = Dataset::make1d(x, y);
  BasisSet basis = BasisSet::homogeneous(KernelSpec::squared_exp(1.0, 2.0), data.inputs);
  const RvmModel null_prior = RvmModel::make(data, std::move(basis), Matrix::Zero(3, 3), 0.5);
  CHECK(induced_prior(null_prior, data.inputs).cov.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sampling: empty draw count and determinism") {
  const Vector x = linspace(0, 2, 3);
  Vector y(3);
  y << 0.0, 1.0, -1.0;
  const RvmModel m = gaussian_rvm(x, y, 2.0, 1.0, 0.25);
  Matrix pts(2, 1);
  pts << 0.5, 1.5;

  SeededRng rng(9);
  CHECK(sample_prior(m, pts, rng, 0).cols() == 0);

  SeededRng ra(33), rb(33);
  const Matrix da = sample_posterior(m, pts, ra, 8);
  const Matrix db = sample_posterior(m, pts, rb, 8);
  CHECK((da - db).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("prior sampling moments match the induced prior covariance") {
  const Vector x = linspace(0, 3, 4);
  Vector y(4);
  y << 0.2, -0.1, 0.5, 0.3;
  const RvmModel m = gaussian_rvm(x, y, 2.0, 2.25, 0.25);
  Matrix pts(4, 1);
  pts << 0.2, 1.1, 1.9, 2.8;
  const GaussianState prior = induced_prior(m, pts);

  const int draws = 20000;
  SeededRng rng(101);
  const Matrix f = sample_prior(m, pts, rng, draws);
  const Vector mean = f.rowwise().mean();
  const Matrix centered = f.colwise() - mean;
  const Matrix cov = centered * centered.transpose() / static_cast<double>(draws);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) {
      const double se = std::sqrt((prior.cov(i, i) * prior.cov(j, j) +
                                   prior.cov(i, j) * prior.cov(i, j)) /
                                  static_cast<double>(draws));
      CHECK(std::abs(cov(i, j) - prior.cov(i, j)) <= 5.0 * se);
    }
}

TEST_CASE("weight-space and function-space sampling share their first two moments") {
  const Vector x = linspace(0, 3, 4);
  Vector y(4);
  y << 0.2, -0.1, 0.5, 0.3;
  const RvmModel m = gaussian_rvm(x, y, 2.0, 1.0, 0.25);
  Matrix pts(3, 1);
  pts << 0.4, 1.5, 2.6;

  const int draws = 20000;
  SeededRng ra(7), rb(8);
  const Matrix fw = sample_posterior(m, pts, ra, draws, SamplePath::WeightSpace);
  const Matrix ff = sample_posterior(m, pts, rb, draws, SamplePath::FunctionSpace);

  const Vector mw = fw.rowwise().mean();
  const Vector mf = ff.rowwise().mean();
  const Matrix cw = (fw.colwise() - mw) * (fw.colwise() - mw).transpose() / double(draws);
  const Matrix cf = (ff.colwise() - mf) * (ff.colwise() - mf).transpose() / double(draws);

  for (Index i = 0; i < 3; ++i) {
    const double se_mean = std::sqrt(2.0 * cw(i, i) / double(draws));
    CHECK(std::abs(mw(i) - mf(i)) <= 5.0 * se_mean);
    for (Index j = 0; j < 3; ++j) {
      const double se = std::sqrt(2.0 * (cw(i, i) * cw(j, j) + cw(i, j) * cw(i, j)) / double(draws));
      CHECK(std::abs(cw(i, j) - cf(i, j)) <= 5.0 * se);
    }
  }
}

TEST_CASE("learn_relevance recovers a sparse generator") {
  const Index n = 20;
  const Vector x = linspace(0, 10, n);
  const Dataset probe = Dataset::make1d(x, Vector::Zero(n));
  const BasisSet basis = BasisSet::homogeneous(KernelSpec::squared_exp(1.0, 0.5), probe.inputs);

  std::mt19937 gen(42);
  std::normal_distribution<double> nd(0.0, 0.05);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    const Vector xi = scalar(x(i));
    y(i) = 2.0 * eval_kernel(basis.entries[4].spec, xi, basis.entries[4].center) -
           1.5 * eval_kernel(basis.entries[13].spec, xi, basis.entries[13].center) + nd(gen);
  }

  const RvmModel m = RvmModel::make(Dataset::make1d(x, y), basis,
                                    Matrix(Matrix::Identity(n, n)), 0.0025);
  const RelevanceResult result = learn_relevance(m, 30, 1e6);

  CHECK(result.surviving.size() <= 6);
  const auto kept = [&](Index i) {
    return std::find(result.surviving.begin(), result.surviving.end(), i) !=
           result.surviving.end();
  };
  CHECK(kept(4));
  CHECK(kept(13));
  CHECK(result.refitted.basis().size() == static_cast<Index>(result.surviving.size()));
}

TEST_CASE("learn_relevance with an infinite threshold keeps every basis") {
  const Vector x = linspace(0, 4, 6);
  Vector y(6);
  y << 0.3, -1.0, 0.2, 1.4, 0.9, -0.4;
  const RvmModel m = gaussian_rvm(x, y, 1.0, 1.0, 0.1);
  const RelevanceResult result =
      learn_relevance(m, 10, std::numeric_limits<double>::infinity());
  CHECK(result.pruned.empty());
  CHECK(result.refitted.basis().size() == 6);
}

TEST_CASE("learn_relevance pushes most precisions to infinity on pure noise") {
  const Index n = 16;
  const Vector x = linspace(0, 8, n);
  std::mt19937 gen(1234);
  std::normal_distribution<double> nd(0.0, 0.3);
  Vector y(n);
  for (Index i = 0; i < n; ++i) y(i) = nd(gen);
  const RvmModel m = gaussian_rvm(x, y, 1.0, 1.0, 0.09);
  const RelevanceResult result = learn_relevance(m, 30, 1e6);
  Index above = 0;
  for (Index i = 0; i < n; ++i)
    if (result.alpha(i) > 1e6) ++above;
  CHECK(above * 2 >= n);
}

TEST_CASE("learn_relevance rejects a non-diagonal prior") {
  const Vector x = linspace(0, 2, 3);
  Vector y(3);
  y << 1.0, 0.0, -1.0;
  Matrix prior(3, 3);
  prior << 1.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 1.0;
  const Dataset data = Dataset::make1d(x, y);
  BasisSet basis = BasisSet::homogeneous(KernelSpec::squared_exp(1.0, 2.0), data.inputs);
  const RvmModel m = RvmModel::make(data, std::move(basis), prior, 0.1);
  CHECK_THROWS_AS(learn_relevance(m, 5, 1e6), DomainError);
}

TEST_CASE("noise-free model with a singular design is rejected") {
  Matrix inputs(2, 1);
  inputs << 0.0, 0.0;  // duplicate rows
  Vector y(2);
  y << 1.0, 1.0;
  const Dataset data = Dataset::make(inputs, y);
  BasisSet basis = BasisSet::homogeneous(KernelSpec::squared_exp(1.0, 2.0), data.inputs);
  CHECK_THROWS_AS(RvmModel::make(data, std::move(basis), Matrix(Matrix::Identity(2, 2)), 0.0),
                  SingularDesign);
}
