#pragma once

#include "kbreg/gp.hpp"
#include "kbreg/qgp.hpp"
#include "kbreg/rvm.hpp"

namespace kbreg {

// Linear kernel smoothers: every method reduces to a query-dependent weight
// vector phi(x) with prediction phi(x) . y.
struct WeightProfile {
  Vector query;
  Vector weights;  // length N, dataset order
};

// phi(x)^T = psi(x)^T Sigma_rho Psi^T (Psi Sigma_rho Psi^T + se2 I)^-1
WeightProfile rvm_weights(const RvmModel& model, const Vector& x);

// phi(x)^T = psi(x)^T (Psi + se2 I)^-1
WeightProfile gp_weights(const GpModel& model, const Vector& x);
WeightProfile qgp_weights(const QgpModel& model, const Vector& x);

// Gaussian window h(x,z) = exp(-||x-z||^2 / lambda), normalized to sum 1.
// A vanishing denominator falls back to the uniform average with a warning.
WeightProfile nadaraya_watson_weights(const Matrix& inputs, const Vector& x, double lambda);

// 1/k on the k nearest inputs; distance ties resolved by ascending index.
WeightProfile knn_weights(const Matrix& inputs, const Vector& x, int k);

// h = d^-p off the nodes, exact indicator at a node.
WeightProfile idw_weights(const Matrix& inputs, const Vector& x, double exponent = 2.0);

// Lagrange polynomial weights over distinct scalar nodes.
WeightProfile lagrange_weights(const Vector& nodes, double x);

// Truncated ideal Fourier interpolator over an equidistant scalar grid.
WeightProfile sinc_weights(const Vector& nodes, double x);

double smoother_predict(const WeightProfile& profile, const Vector& y);

struct FilterSpec {
  Vector feedforward;  // a_0 .. a_R
  Vector feedback;     // b_1 .. b_L, empty for FIR
};

// f_t = sum_r a_r y_{t-r}, emitted only for full windows: t = R+1 .. N.
Vector fir_apply(const FilterSpec& spec, const Vector& y);

// f_t = sum_l b_l f_{t-l} + sum_r a_r y_{t-r}; feedback state before the
// first emitted output comes from init (zeros by default, last entry is the
// most recent prior output).
Vector iir_apply(const FilterSpec& spec, const Vector& y, const Vector& init = Vector());

}  // namespace kbreg
