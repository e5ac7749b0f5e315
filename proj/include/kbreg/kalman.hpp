#pragma once

#include "kbreg/numerics.hpp"

namespace kbreg {

// Discrete AR(1) state-space model over integer times 1..N:
//   f_t = gamma f_{t-1} + v_t,   y_t = f_t + e_t.
struct StateSpaceAR1 {
  double gamma;        // |gamma| < 1
  double process_var;  // sigma_v^2 > 0
  double obs_var;      // sigma_e^2 >= 0

  static StateSpaceAR1 make(double gamma, double process_var, double obs_var);
};

// sigma_v^2 / (1 - gamma^2)
double stationary_variance(const StateSpaceAR1& model);

// r(tau) = gamma^{|t - t'|} sigma_v^2 / (1 - gamma^2)
double ar1_kernel(const StateSpaceAR1& model, long t, long s);

// Tridiagonal inverse of the stationary covariance matrix.
Matrix precision_matrix(const StateSpaceAR1& model, int n);

struct FilterInit {
  double mean = 0.0;
  double var;
};

struct FilterTrack {
  Vector mean_pred, var_pred;  // mu_{t|t-1}, sigma^2_{t|t-1}
  Vector mean_filt, var_filt;  // mu_{t|t},   sigma^2_{t|t}
  Index size() const { return mean_filt.size(); }
};

// Forward Kalman recursion; defaults to the stationary initialization. The
// noise-free model takes the exact-observation branch.
FilterTrack forward_filter(const StateSpaceAR1& model, const Vector& y);
FilterTrack forward_filter(const StateSpaceAR1& model, const Vector& y, const FilterInit& init);

struct SmoothTrack {
  Vector mean, var;  // mu_{t|N}, sigma^2_{t|N}
};

// Backward recursion turning filtered marginals into p(f_t | y_{1:N}).
SmoothTrack backward_smooth(const StateSpaceAR1& model, const FilterTrack& track);

// p(f_{t+tau} | y_{1:t}) moments; t is 1-based within the track, tau >= 1.
std::pair<double, double> predict_lag(const StateSpaceAR1& model, const FilterTrack& track, int t,
                                      int tau);

}  // namespace kbreg
