#include "kbreg/kalman.hpp"

#include <cmath>

namespace kbreg {

StateSpaceAR1 StateSpaceAR1::make(double gamma, double process_var, double obs_var) {
  if (!(std::abs(gamma) < 1.0)) throw DomainError("StateSpaceAR1: |gamma| must be < 1");
  if (!(process_var > 0.0) || !std::isfinite(process_var))
    throw DomainError("StateSpaceAR1: process variance must be positive");
  if (!(obs_var >= 0.0) || !std::isfinite(obs_var))
    throw DomainError("StateSpaceAR1: observation variance must be nonnegative");
  return StateSpaceAR1{gamma, process_var, obs_var};
}

double stationary_variance(const StateSpaceAR1& model) {
  return model.process_var / (1.0 - model.gamma * model.gamma);
}

double ar1_kernel(const StateSpaceAR1& model, long t, long s) {
  const long tau = std::labs(t - s);
  return std::pow(model.gamma, static_cast<double>(tau)) * stationary_variance(model);
}

Matrix precision_matrix(const StateSpaceAR1& model, int n) {
  if (n < 2) throw DomainError("precision_matrix: need n >= 2");
  Matrix p = Matrix::Zero(n, n);
  const double inv = 1.0 / model.process_var;
  const double g = model.gamma;
  for (int i = 0; i < n; ++i) p(i, i) = (1.0 + g * g) * inv;
  p(0, 0) = inv;
  p(n - 1, n - 1) = inv;
  for (int i = 0; i + 1 < n; ++i) {
    p(i, i + 1) = -g * inv;
    p(i + 1, i) = -g * inv;
  }
  return p;
}

FilterTrack forward_filter(const StateSpaceAR1& model, const Vector& y) {
  return forward_filter(model, y, FilterInit{0.0, stationary_variance(model)});
}

FilterTrack forward_filter(const StateSpaceAR1& model, const Vector& y, const FilterInit& init) {
  if (!y.allFinite()) throw DomainError("forward_filter: non-finite observations");
  const Index n = y.size();
  FilterTrack track{Vector(n), Vector(n), Vector(n), Vector(n)};

  double mean = init.mean;
  double var = init.var;
  for (Index t = 0; t < n; ++t) {
    const double mean_pred = model.gamma * mean;
    const double var_pred = model.gamma * model.gamma * var + model.process_var;
    track.mean_pred(t) = mean_pred;
    track.var_pred(t) = var_pred;
    if (model.obs_var == 0.0) {
      mean = y(t);
      var = 0.0;
    } else {
      const double denom = var_pred + model.obs_var;
      mean = (model.obs_var / denom) * mean_pred + (var_pred / denom) * y(t);
      var = var_pred * model.obs_var / denom;
    }
    track.mean_filt(t) = mean;
    track.var_filt(t) = var;
  }
  return track;
}

SmoothTrack backward_smooth(const StateSpaceAR1& model, const FilterTrack& track) {
  const Index n = track.size();
  if (n == 0) throw DomainError("backward_smooth: empty track");
  SmoothTrack smooth{Vector(n), Vector(n)};
  smooth.mean(n - 1) = track.mean_filt(n - 1);
  smooth.var(n - 1) = track.var_filt(n - 1);
  for (Index t = n - 2; t >= 0; --t) {
    const double gain = model.gamma * track.var_filt(t) / track.var_pred(t + 1);
    smooth.mean(t) = track.mean_filt(t) + gain * (smooth.mean(t + 1) - track.mean_pred(t + 1));
    smooth.var(t) = track.var_filt(t) + gain * gain * (smooth.var(t + 1) - track.var_pred(t + 1));
  }
  return smooth;
}

std::pair<double, double> predict_lag(const StateSpaceAR1& model, const FilterTrack& track, int t,
                                      int tau) {
  if (t < 1 || t > track.size())
    throw IndexOutOfRange("predict_lag: t=" + std::to_string(t) + " outside 1.." +
                          std::to_string(track.size()));
  if (tau < 1) throw DomainError("predict_lag: tau must be >= 1");
  double mean = track.mean_filt(t - 1);
  double var = track.var_filt(t - 1);
  for (int i = 0; i < tau; ++i) {
    mean *= model.gamma;
    var = model.gamma * model.gamma * var + model.process_var;
  }
  return {mean, var};
}

}  // namespace kbreg
