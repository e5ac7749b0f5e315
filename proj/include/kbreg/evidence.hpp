#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kbreg/numerics.hpp"

namespace kbreg {

// Named positive hyperparameters (kernel parameters plus noise_var). All
// optimization and sampling happens in component-wise log space.
struct HyperParams {
  std::map<std::string, double> values;

  double at(const std::string& name) const;
  std::vector<std::string> names() const;
  Vector to_log_vector() const;
  static HyperParams from_log_vector(const std::vector<std::string>& names, const Vector& u);
};

using LogMarginalFn = std::function<double(const HyperParams&)>;
using LogPriorFn = std::function<double(const HyperParams&)>;

// log N(y | 0, C_yy)
double log_marginal_gaussian(const Matrix& cyy, const Vector& y);

// GP and Q-GP share C_yy = Psi + sigma_e^2 I.
double log_marginal_gp(const Matrix& design, double noise_var, const Vector& y);

// RVM: C_yy = Psi Sigma_rho Psi^T + sigma_e^2 I. design may be rectangular.
double log_marginal_rvm(const Matrix& design, const Matrix& prior_cov, double noise_var,
                        const Vector& y);

struct NllDecomposition {
  double fit_term;         // 1/2 y^T C^-1 y
  double complexity_term;  // 1/2 log det C
  double constant;         // N/2 log 2 pi
  double total() const { return fit_term + complexity_term + constant; }
};

NllDecomposition nll_decomposition(const Matrix& cyy, const Vector& y);

struct Bounds {
  std::map<std::string, std::pair<double, double>> box;  // inclusive, on theta
  bool contains(const HyperParams& theta) const;
};

struct OptTraceRow {
  int iteration;
  HyperParams theta;
  double nll;
};

struct OptimResult {
  HyperParams theta;
  double nll;
  std::vector<OptTraceRow> trace;  // accepted bests, non-increasing nll
  int evaluations;
};

// Nelder-Mead over log theta minimizing the negative log marginal, clamped to
// the bounds box. restarts additional runs start from deterministically
// perturbed theta0; the best result wins. max_iter == 0 returns theta0.
OptimResult optimize_type2(const LogMarginalFn& log_marginal, const HyperParams& theta0,
                           const Bounds& bounds, int max_iter, int restarts = 2);

struct McmcStep {
  double target_from;
  double target_to;
  double accept_prob;
  double uniform;
  bool accepted;
};

struct HyperPosterior {
  std::vector<HyperParams> draws;
  Vector log_weights;  // uniform (zero) for Metropolis draws
  double acceptance_rate;
  std::vector<McmcStep> steps;  // full proposal log for detailed-balance checks
};

// Random-walk Metropolis in log theta; the target includes the log-Jacobian
// of the exp transform. Deterministic per seed.
HyperPosterior sample_hyperposterior(const LogMarginalFn& log_marginal, const LogPriorFn& log_prior,
                                     const HyperParams& theta0, SeededRng& rng, int chain_len,
                                     double proposal_scale, int burn_in = 1000, int thin = 4);

// Independent log-normal prior with the given median and log-sd.
LogPriorFn lognormal_prior(const HyperParams& median, double log_sd = 1.0);

struct MixturePredictive {
  Matrix per_draw_mean;  // S x Q
  Matrix per_draw_var;   // S x Q
  Vector mean;           // f_bar
  Vector within_var;     // mean of conditional variances
  Vector between_var;    // variance of conditional means
  Vector total_var() const { return within_var + between_var; }
};

// builder returns (means, variances) at fixed query points for one theta.
using CurveBuilder = std::function<std::pair<Vector, Vector>(const HyperParams&)>;

MixturePredictive mixture_predictive(const CurveBuilder& builder,
                                     const std::vector<HyperParams>& draws);

// Rough simple-Monte-Carlo estimate of log p(y) over the prior.
double estimate_log_evidence(const LogMarginalFn& log_marginal,
                             const std::function<HyperParams(SeededRng&)>& prior_sampler,
                             SeededRng& rng, int draws);

}  // namespace kbreg
