#include "kbreg/evidence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kbreg {

double HyperParams::at(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw DomainError("hyperparameter '" + name + "' is not set");
  return it->second;
}

std::vector<std::string> HyperParams::names() const {
  std::vector<std::string> out;
  out.reserve(values.size());
  for (const auto& [k, v] : values) out.push_back(k);
  return out;
}

Vector HyperParams::to_log_vector() const {
  Vector u(static_cast<Index>(values.size()));
  Index i = 0;
  for (const auto& [k, v] : values) {
    if (!(v > 0.0)) throw DomainError("hyperparameter '" + k + "' must be strictly positive");
    u(i++) = std::log(v);
  }
  return u;
}

HyperParams HyperParams::from_log_vector(const std::vector<std::string>& names, const Vector& u) {
  if (static_cast<Index>(names.size()) != u.size())
    throw DimensionMismatch("HyperParams::from_log_vector: name/value count mismatch");
  HyperParams theta;
  for (Index i = 0; i < u.size(); ++i) theta.values[names[i]] = std::exp(u(i));
  return theta;
}

NllDecomposition nll_decomposition(const Matrix& cyy, const Vector& y) {
  if (cyy.rows() != y.size())
    throw DimensionMismatch("nll_decomposition: covariance order does not match y");
  const CholFactor f = psd_factorize(cyy);
  const double fit = 0.5 * y.dot(psd_solve(f, y));
  const double complexity = 0.5 * psd_logdet(f);
  const double constant = 0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
  return NllDecomposition{fit, complexity, constant};
}

double log_marginal_gaussian(const Matrix& cyy, const Vector& y) {
  return -nll_decomposition(cyy, y).total();
}

double log_marginal_gp(const Matrix& design, double noise_var, const Vector& y) {
  Matrix cyy = design;
  cyy.diagonal().array() += noise_var;
  return log_marginal_gaussian(cyy, y);
}

double log_marginal_rvm(const Matrix& design, const Matrix& prior_cov, double noise_var,
                        const Vector& y) {
  Matrix cyy = symmetrized(design * prior_cov * design.transpose());
  cyy.diagonal().array() += noise_var;
  return log_marginal_gaussian(cyy, y);
}

bool Bounds::contains(const HyperParams& theta) const {
  for (const auto& [name, range] : box) {
    const double v = theta.at(name);
    if (v < range.first || v > range.second) return false;
  }
  return true;
}

namespace {

Vector clamp_to_bounds(Vector u, const std::vector<std::string>& names, const Bounds& bounds) {
  for (Index i = 0; i < u.size(); ++i) {
    auto it = bounds.box.find(names[i]);
    if (it == bounds.box.end()) continue;
    u(i) = std::clamp(u(i), std::log(it->second.first), std::log(it->second.second));
  }
  return u;
}

struct NmRun {
  Vector best_u;
  double best_nll;
  std::vector<OptTraceRow> trace;
  int evaluations = 0;
};

NmRun nelder_mead(const std::function<double(const Vector&)>& nll, const Vector& u0,
                  const std::vector<std::string>& names, const Bounds& bounds, int max_iter,
                  int trace_offset) {
  const Index m = u0.size();
  NmRun run;
  auto eval = [&](const Vector& u) {
    ++run.evaluations;
    const double v = nll(u);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Vector> simplex;
  std::vector<double> value;
  simplex.push_back(clamp_to_bounds(u0, names, bounds));
  value.push_back(eval(simplex[0]));
  for (Index i = 0; i < m; ++i) {
    Vector v = u0;
    v(i) += 0.25;
    simplex.push_back(clamp_to_bounds(v, names, bounds));
    value.push_back(eval(simplex.back()));
  }

  auto order = [&]() {
    std::vector<size_t> idx(simplex.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return value[a] < value[b]; });
    std::vector<Vector> s2;
    std::vector<double> v2;
    for (size_t i : idx) {
      s2.push_back(simplex[i]);
      v2.push_back(value[i]);
    }
    simplex.swap(s2);
    value.swap(v2);
  };

  order();
  run.best_u = simplex[0];
  run.best_nll = value[0];
  run.trace.push_back(
      {trace_offset, HyperParams::from_log_vector(names, simplex[0]), value[0]});

  for (int iter = 1; iter <= max_iter; ++iter) {
    Vector centroid = Vector::Zero(m);
    for (Index i = 0; i < m; ++i) centroid += simplex[static_cast<size_t>(i)];
    centroid /= static_cast<double>(m);

    const Vector worst = simplex.back();
    const double f_best = value.front();
    const double f_second = value[value.size() - 2];
    const double f_worst = value.back();

    Vector reflected = clamp_to_bounds(centroid + (centroid - worst), names, bounds);
    const double f_reflected = eval(reflected);

    if (f_reflected < f_best) {
      Vector expanded = clamp_to_bounds(centroid + 2.0 * (centroid - worst), names, bounds);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex.back() = expanded;
        value.back() = f_expanded;
      } else {
        simplex.back() = reflected;
        value.back() = f_reflected;
      }
    } else if (f_reflected < f_second) {
      simplex.back() = reflected;
      value.back() = f_reflected;
    } else {
      Vector contracted = clamp_to_bounds(centroid + 0.5 * (worst - centroid), names, bounds);
      const double f_contracted = eval(contracted);
      if (f_contracted < f_worst) {
        simplex.back() = contracted;
        value.back() = f_contracted;
      } else {
        for (size_t i = 1; i < simplex.size(); ++i) {
          simplex[i] = clamp_to_bounds(simplex[0] + 0.5 * (simplex[i] - simplex[0]), names, bounds);
          value[i] = eval(simplex[i]);
        }
      }
    }
    order();
    if (value[0] < run.best_nll) {
      run.best_nll = value[0];
      run.best_u = simplex[0];
      run.trace.push_back(
          {trace_offset + iter, HyperParams::from_log_vector(names, simplex[0]), value[0]});
    }
    const double spread = std::abs(value.back() - value.front());
    if (spread <= 1e-12 * (1.0 + std::abs(value.front()))) break;
  }
  return run;
}

}  // namespace

OptimResult optimize_type2(const LogMarginalFn& log_marginal, const HyperParams& theta0,
                           const Bounds& bounds, int max_iter, int restarts) {
  if (!bounds.contains(theta0)) throw DomainError("optimize_type2: theta0 violates the bounds");
  const std::vector<std::string> names = theta0.names();
  auto nll = [&](const Vector& u) {
    return -log_marginal(HyperParams::from_log_vector(names, u));
  };
  const Vector u0 = theta0.to_log_vector();
  const double nll0 = nll(u0);
  if (!std::isfinite(nll0))
    throw OptimizerDivergence("optimize_type2: objective non-finite at theta0");

  OptimResult result{theta0, nll0, {{0, theta0, nll0}}, 1};
  if (max_iter == 0) return result;

  SeededRng perturb(0x9e3779b97f4a7c15ULL);
  for (int r = 0; r <= restarts; ++r) {
    Vector start = u0;
    if (r > 0)
      for (Index i = 0; i < start.size(); ++i) start(i) += 0.3 * perturb.normal();
    NmRun run = nelder_mead(nll, start, names, bounds, max_iter,
                            static_cast<int>(result.trace.size()));
    result.evaluations += run.evaluations;
    for (const auto& row : run.trace)
      if (row.nll < result.nll - 0.0) {
        result.nll = row.nll;
        result.theta = row.theta;
        result.trace.push_back({static_cast<int>(result.trace.size()), row.theta, row.nll});
      }
  }
  return result;
}

HyperPosterior sample_hyperposterior(const LogMarginalFn& log_marginal, const LogPriorFn& log_prior,
                                     const HyperParams& theta0, SeededRng& rng, int chain_len,
                                     double proposal_scale, int burn_in, int thin) {
  if (chain_len < 1) throw DomainError("sample_hyperposterior: chain_len must be >= 1");
  if (thin < 1) thin = 1;
  const std::vector<std::string> names = theta0.names();

  auto target = [&](const Vector& u) {
    const HyperParams theta = HyperParams::from_log_vector(names, u);
    return log_marginal(theta) + log_prior(theta) + u.sum();  // exp-transform Jacobian
  };

  Vector u = theta0.to_log_vector();
  double t = target(u);
  if (!std::isfinite(t))
    throw NonFiniteTarget("sample_hyperposterior: target non-finite at theta0");

  HyperPosterior post;
  post.steps.reserve(chain_len);
  int accepted = 0;
  for (int step = 0; step < chain_len; ++step) {
    Vector proposal = u;
    for (Index i = 0; i < u.size(); ++i) proposal(i) += proposal_scale * rng.normal();
    const double t_prop = target(proposal);
    const double ratio = std::isfinite(t_prop) ? std::exp(std::min(0.0, t_prop - t)) : 0.0;
    const double uniform = rng.uniform();
    const bool accept = uniform < ratio;
    post.steps.push_back({t, t_prop, ratio, uniform, accept});
    if (accept) {
      u = proposal;
      t = t_prop;
      ++accepted;
    }
    if (step >= burn_in && (step - burn_in) % thin == 0)
      post.draws.push_back(HyperParams::from_log_vector(names, u));
  }
  if (post.draws.empty()) post.draws.push_back(HyperParams::from_log_vector(names, u));
  post.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(chain_len);
  post.log_weights = Vector::Zero(static_cast<Index>(post.draws.size()));
  return post;
}

LogPriorFn lognormal_prior(const HyperParams& median, double log_sd) {
  return [median, log_sd](const HyperParams& theta) {
    double acc = 0.0;
    for (const auto& [name, m] : median.values) {
      const double z = (std::log(theta.at(name)) - std::log(m)) / log_sd;
      acc += -0.5 * z * z - std::log(theta.at(name) * log_sd) -
             0.5 * std::log(2.0 * std::numbers::pi);
    }
    return acc;
  };
}

MixturePredictive mixture_predictive(const CurveBuilder& builder,
                                     const std::vector<HyperParams>& draws) {
  if (draws.empty()) throw DomainError("mixture_predictive: no hyperparameter draws");
  const Index s = static_cast<Index>(draws.size());

  auto first = builder(draws[0]);
  const Index q = first.first.size();
  MixturePredictive mix;
  mix.per_draw_mean.resize(s, q);
  mix.per_draw_var.resize(s, q);
  mix.per_draw_mean.row(0) = first.first.transpose();
  mix.per_draw_var.row(0) = first.second.transpose();
  for (Index i = 1; i < s; ++i) {
    auto [m, v] = builder(draws[static_cast<size_t>(i)]);
    if (m.size() != q || v.size() != q)
      throw DimensionMismatch("mixture_predictive: builder output size changed between draws");
    mix.per_draw_mean.row(i) = m.transpose();
    mix.per_draw_var.row(i) = v.transpose();
  }
  mix.mean = mix.per_draw_mean.colwise().mean().transpose();
  mix.within_var = mix.per_draw_var.colwise().mean().transpose();
  mix.between_var =
      (mix.per_draw_mean.rowwise() - mix.mean.transpose()).array().square().colwise().mean();
  return mix;
}

double estimate_log_evidence(const LogMarginalFn& log_marginal,
                             const std::function<HyperParams(SeededRng&)>& prior_sampler,
                             SeededRng& rng, int draws) {
  if (draws < 1) throw DomainError("estimate_log_evidence: draws must be >= 1");
  Vector logs(draws);
  for (int s = 0; s < draws; ++s) logs(s) = log_marginal(prior_sampler(rng));
  const double m = logs.maxCoeff();
  return m + std::log((logs.array() - m).exp().sum()) - std::log(static_cast<double>(draws));
}

}  // namespace kbreg
