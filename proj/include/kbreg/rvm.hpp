#pragma once

#include <vector>

#include "kbreg/kernels.hpp"

namespace kbreg {

struct WeightPosterior {
  Vector mean;  // rho_hat
  Matrix cov;   // Sigma_{rho|y}
};

struct GaussianState {
  Vector mean;
  Matrix cov;
};

struct PointPrediction {
  double mean;
  double variance;
};

enum class SamplePath { WeightSpace, FunctionSpace };

// Bayesian linear-in-weights regression, y_i = psi(x_i)^T rho + e_i with a
// Gaussian N(0, Sigma_rho) prior over the weights. The basis may be smaller
// than the dataset after relevance pruning, so the design is N x M.
class RvmModel {
public:
  static RvmModel make(Dataset data, BasisSet basis, Matrix prior_cov, double noise_var);

  const Dataset& data() const { return data_; }
  const BasisSet& basis() const { return basis_; }
  const Matrix& design() const { return design_; }          // N x M
  const Matrix& prior_cov() const { return prior_cov_; }    // M x M
  double noise_var() const { return noise_var_; }
  const Matrix& marginal_cov() const { return gram_; }      // Psi Sigma_rho Psi^T + sigma_e^2 I
  const CholFactor& marginal_factor() const { return factor_; }
  const Vector& weight_mean() const { return weight_mean_; }

private:
  Dataset data_;
  BasisSet basis_;
  Matrix design_;
  Matrix prior_cov_;
  double noise_var_ = 0.0;
  Matrix dual_;        // Psi Sigma_rho Psi^T
  Matrix gram_;        // dual_ + sigma_e^2 I
  CholFactor factor_;  // chol(gram_)
  Vector weight_mean_;
};

// Mean by Sigma_rho Psi^T (Psi Sigma_rho Psi^T + sigma_e^2 I)^-1 y, covariance
// by the Woodbury form. cross_check additionally evaluates the two
// inverse-prior forms and throws FormDisagreement beyond 1e-8 relative.
WeightPosterior weight_posterior(const RvmModel& model, bool cross_check = false);

PointPrediction predict(const RvmModel& model, const Vector& x);

// Posterior over f = Psi rho at the training inputs.
GaussianState smooth(const RvmModel& model);

// Zero-mean prior over f at the given points; covariance is the dual kernel
// matrix there.
GaussianState induced_prior(const RvmModel& model, const Matrix& points);

// One column per draw, rows aligned with points. The weight-space path draws
// rho and forms Psi rho; the function-space path draws the multivariate
// Gaussian over f directly. Both are deterministic per seed.
Matrix sample_prior(const RvmModel& model, const Matrix& points, SeededRng& rng, int count,
                    SamplePath path = SamplePath::WeightSpace);
Matrix sample_posterior(const RvmModel& model, const Matrix& points, SeededRng& rng, int count,
                        SamplePath path = SamplePath::WeightSpace);

struct RelevanceResult {
  Vector alpha;                     // learned per-weight precisions
  std::vector<Index> pruned;        // indices with alpha above threshold
  std::vector<Index> surviving;
  RvmModel refitted;
  double final_log_marginal;
  int sweeps;
};

// Evidence maximization over log alpha (coordinate-wise golden section) for a
// diagonal prior; bases whose precision exceeds prune_threshold are removed
// and the model refitted on the survivors.
RelevanceResult learn_relevance(const RvmModel& model, int max_iter = 50,
                                double prune_threshold = 1e6);

}  // namespace kbreg
