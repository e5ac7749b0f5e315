#include "kbreg/smoothers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace kbreg {

WeightProfile rvm_weights(const RvmModel& model, const Vector& x) {
  const Vector psi = design_vector(model.basis(), x);
  const Vector u = model.design() * (model.prior_cov() * psi);
  return WeightProfile{x, psd_solve(model.marginal_factor(), u)};
}

WeightProfile gp_weights(const GpModel& model, const Vector& x) {
  return WeightProfile{x, psd_solve(model.train_factor(), model.kernel_vector(x))};
}

WeightProfile qgp_weights(const QgpModel& model, const Vector& x) {
  return WeightProfile{x, psd_solve(model.train_factor(), design_vector(model.basis(), x))};
}

WeightProfile nadaraya_watson_weights(const Matrix& inputs, const Vector& x, double lambda) {
  if (lambda <= 0.0) throw DomainError("nadaraya-watson: bandwidth must be positive");
  const Index n = inputs.rows();
  Vector h(n);
  for (Index i = 0; i < n; ++i)
    h(i) = std::exp(-(x - inputs.row(i).transpose()).squaredNorm() / lambda);
  const double total = h.sum();
  if (total < 1e-300) {
    warn("nadaraya-watson: all window weights underflowed; returning the plain average");
    return WeightProfile{x, Vector::Constant(n, 1.0 / static_cast<double>(n))};
  }
  return WeightProfile{x, h / total};
}

WeightProfile knn_weights(const Matrix& inputs, const Vector& x, int k) {
  const Index n = inputs.rows();
  if (k < 1 || k > n)
    throw BadK("knn: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  std::vector<Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  Vector dist(n);
  for (Index i = 0; i < n; ++i) dist(i) = (x - inputs.row(i).transpose()).norm();
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return dist(a) < dist(b); });
  Vector w = Vector::Zero(n);
  for (int i = 0; i < k; ++i) w(idx[static_cast<size_t>(i)]) = 1.0 / static_cast<double>(k);
  return WeightProfile{x, w};
}

WeightProfile idw_weights(const Matrix& inputs, const Vector& x, double exponent) {
  if (exponent <= 0.0) throw DomainError("idw: exponent must be positive");
  const Index n = inputs.rows();
  Vector w = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    if ((x - inputs.row(i).transpose()).norm() == 0.0) {
      w(i) = 1.0;  // exact node: interpolate
      return WeightProfile{x, w};
    }
  }
  for (Index i = 0; i < n; ++i)
    w(i) = std::pow((x - inputs.row(i).transpose()).norm(), -exponent);
  return WeightProfile{x, w / w.sum()};
}

WeightProfile lagrange_weights(const Vector& nodes, double x) {
  const Index n = nodes.size();
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (nodes(i) == nodes(j))
        throw DuplicateInputs("lagrange: nodes " + std::to_string(i) + " and " + std::to_string(j) +
                              " coincide");
  Vector w(n);
  for (Index k = 0; k < n; ++k) {
    double num = 1.0, den = 1.0;
    for (Index i = 0; i < n; ++i) {
      if (i == k) continue;
      num *= x - nodes(i);
      den *= nodes(k) - nodes(i);
    }
    w(k) = num / den;
  }
  Vector q(1);
  q << x;
  return WeightProfile{q, w};
}

WeightProfile sinc_weights(const Vector& nodes, double x) {
  const Index n = nodes.size();
  if (n < 2) throw NonEquidistantGrid("sinc: need at least two nodes to define the spacing");
  const double t0 = nodes(1) - nodes(0);
  if (t0 <= 0.0) throw NonEquidistantGrid("sinc: nodes must be strictly increasing");
  for (Index i = 1; i + 1 < n; ++i)
    if (std::abs((nodes(i + 1) - nodes(i)) - t0) > 1e-9)
      throw NonEquidistantGrid("sinc: spacing deviates at node " + std::to_string(i + 1));
  Vector w(n);
  for (Index i = 0; i < n; ++i) {
    double u = (x - nodes(i)) / t0;
    // snap near-integer offsets so node weights are exact Kronecker deltas
    if (std::abs(u - std::round(u)) < 1e-9) u = std::round(u);
    w(i) = u == 0.0 ? 1.0 : std::sin(std::numbers::pi * u) / (std::numbers::pi * u);
  }
  Vector q(1);
  q << x;
  return WeightProfile{q, w};
}

double smoother_predict(const WeightProfile& profile, const Vector& y) {
  if (profile.weights.size() != y.size())
    throw DimensionMismatch("smoother_predict: weight/output length mismatch");
  return profile.weights.dot(y);
}

Vector fir_apply(const FilterSpec& spec, const Vector& y) {
  const Index r = spec.feedforward.size() - 1;
  if (spec.feedforward.size() == 0) throw DomainError("fir: empty feedforward coefficients");
  if (y.size() <= r)
    throw SequenceTooShort("fir: need more than " + std::to_string(r) + " samples, got " +
                           std::to_string(y.size()));
  Vector out(y.size() - r);
  for (Index t = r; t < y.size(); ++t) {
    double acc = 0.0;
    for (Index i = 0; i <= r; ++i) acc += spec.feedforward(i) * y(t - i);
    out(t - r) = acc;
  }
  return out;
}

Vector iir_apply(const FilterSpec& spec, const Vector& y, const Vector& init) {
  if (spec.feedback.size() == 0) return fir_apply(spec, y);
  const Index r = spec.feedforward.size() - 1;
  const Index l = spec.feedback.size();
  if (spec.feedforward.size() == 0) throw DomainError("iir: empty feedforward coefficients");
  if (y.size() <= r)
    throw SequenceTooShort("iir: need more than " + std::to_string(r) + " samples, got " +
                           std::to_string(y.size()));

  Vector state = Vector::Zero(l);  // state(l-1) is the most recent prior output
  if (init.size() > 0) {
    if (init.size() > l) throw DimensionMismatch("iir: init longer than the feedback order");
    state.tail(init.size()) = init;
  }

  Vector out(y.size() - r);
  for (Index t = r; t < y.size(); ++t) {
    double acc = 0.0;
    for (Index i = 0; i <= r; ++i) acc += spec.feedforward(i) * y(t - i);
    const Index emitted = t - r;
    for (Index j = 1; j <= l; ++j) {
      const Index back = emitted - j;
      acc += spec.feedback(j - 1) * (back >= 0 ? out(back) : state(l + back));
    }
    out(emitted) = acc;
  }
  return out;
}

}  // namespace kbreg
