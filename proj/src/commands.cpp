#include "kbreg/commands.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "kbreg/evidence.hpp"
#include "kbreg/gp.hpp"
#include "kbreg/kalman.hpp"
#include "kbreg/qgp.hpp"
#include "kbreg/rvm.hpp"
#include "kbreg/smoothers.hpp"

namespace kbreg {

namespace {

struct Context {
  const RunConfig& rc;
  Dataset data;
  std::uint64_t seed;
  double jitter;
  std::vector<std::string> warnings;

  std::string model() const { return rc.config.str("model"); }
};

KernelSpec kernel_from_config(const Config& cfg) {
  KernelSpec spec;
  spec.family = kernel_family_from_string(cfg.str("kernel.family"));
  for (const auto& [name, value] : cfg.section("kernel")) {
    if (name == "family") continue;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size())
      throw ConfigError("kernel." + name + ": not a number: '" + value + "'");
    spec.params[name] = v;
  }
  spec.validate();
  return spec;
}

Matrix query_points(const Context& ctx) {
  const Config& cfg = ctx.rc.config;
  if (cfg.has("points.file")) return read_matrix_csv(cfg.str("points.file"));
  if (cfg.has("grid.from")) {
    if (ctx.data.dim() != 1)
      throw ConfigError("grid.* needs one-dimensional inputs; use points.file instead");
    const double from = cfg.num("grid.from");
    const double to = cfg.num("grid.to");
    const long count = cfg.integer_or("grid.count", 0);
    if (count < 1) throw ConfigError("grid.count must be >= 1");
    Matrix pts(count, 1);
    for (long i = 0; i < count; ++i)
      pts(i, 0) = count == 1 ? from : from + (to - from) * static_cast<double>(i) /
                                                 static_cast<double>(count - 1);
    return pts;
  }
  throw ConfigError("no query points: set grid.from/grid.to/grid.count or points.file");
}

RvmModel build_rvm(const Context& ctx) {
  const Config& cfg = ctx.rc.config;
  const KernelSpec spec = kernel_from_config(cfg);
  BasisSet basis = BasisSet::homogeneous(spec, ctx.data.inputs);
  const std::string prior_kind = cfg.str_or("prior.kind", "diagonal");
  Matrix prior;
  if (prior_kind == "diagonal") {
    prior = cfg.num_or("prior.variance", 1.0) *
            Matrix::Identity(ctx.data.size(), ctx.data.size());
  } else if (prior_kind == "design-inverse") {
    const DesignMatrix dm = design_matrix(basis, ctx.data.inputs);
    if (!dm.symmetric_flag) throw ConfigError("prior.kind=design-inverse needs a symmetric design");
    prior = psd_inverse(psd_factorize(symmetrized(dm.matrix), ctx.jitter));
  } else {
    throw ConfigError("prior.kind must be 'diagonal' or 'design-inverse'");
  }
  return RvmModel::make(ctx.data, std::move(basis), std::move(prior),
                        cfg.num_or("noise_var", 0.0));
}

QgpModel build_qgp(const Context& ctx) {
  return QgpModel::make(ctx.data, kernel_from_config(ctx.rc.config),
                        ctx.rc.config.num_or("noise_var", 0.0), ctx.jitter);
}

GpModel build_gp(const Context& ctx) {
  return GpModel::make(ctx.data, kernel_from_config(ctx.rc.config),
                       ctx.rc.config.num_or("noise_var", 0.0), ctx.jitter);
}

StateSpaceAR1 build_kalman(const Context& ctx) {
  const Config& cfg = ctx.rc.config;
  return StateSpaceAR1::make(cfg.num("kalman.gamma"), cfg.num("kalman.process_var"),
                             cfg.num_or("noise_var", 0.0));
}

void require_integer_times(const Dataset& data) {
  if (data.dim() != 1) throw ConfigError("kalman needs a single input column of times 1..N");
  for (Index i = 0; i < data.size(); ++i)
    if (std::abs(data.inputs(i, 0) - static_cast<double>(i + 1)) > 1e-9)
      throw ConfigError("kalman needs uniformly sampled times 1..N; row " + std::to_string(i + 1) +
                        " has t=" + format_double(data.inputs(i, 0)));
}

void add_point_columns(TableOutput& table, const Matrix& pts) {
  for (Index c = 0; c < pts.cols(); ++c)
    table.add_column(pts.cols() == 1 ? "x" : "x" + std::to_string(c + 1), pts.col(c));
}

// mean/variance curves for the probabilistic models over arbitrary points
std::pair<Vector, Vector> predict_curve(const Context& ctx, const Matrix& pts) {
  const std::string model = ctx.model();
  Vector mean(pts.rows()), var(pts.rows());
  if (model == "rvm") {
    const RvmModel m = build_rvm(ctx);
    for (Index i = 0; i < pts.rows(); ++i) {
      const auto p = predict(m, pts.row(i).transpose());
      mean(i) = p.mean;
      var(i) = p.variance;
    }
  } else if (model == "qgp") {
    const QgpModel m = build_qgp(ctx);
    for (Index i = 0; i < pts.rows(); ++i) {
      const auto p = predict(m, pts.row(i).transpose());
      mean(i) = p.mean;
      var(i) = p.variance;
    }
  } else if (model == "gp") {
    const GpModel m = build_gp(ctx);
    for (Index i = 0; i < pts.rows(); ++i) {
      const auto p = predict(m, pts.row(i).transpose());
      mean(i) = p.mean;
      var(i) = p.variance;
    }
  } else {
    throw ConfigError("model '" + model + "' does not support this command");
  }
  return {mean, var};
}

TableOutput cmd_fit(const Context& ctx) {
  TableOutput t;
  const std::string model = ctx.model();
  if (model == "rvm") {
    const RvmModel m = build_rvm(ctx);
    const WeightPosterior post = weight_posterior(m);
    Vector idx(post.mean.size());
    for (Index i = 0; i < idx.size(); ++i) idx(i) = static_cast<double>(i + 1);
    t.add_column("index", idx);
    t.add_column("coef", post.mean);
    t.add_column("coef_var", post.cov.diagonal());
    t.metadata["log_marginal"] = format_double(
        log_marginal_rvm(m.design(), m.prior_cov(), m.noise_var(), m.data().outputs));
  } else if (model == "qgp") {
    const QgpModel m = build_qgp(ctx);
    const WeightPosterior post = weight_posterior(m);
    Vector idx(post.mean.size());
    for (Index i = 0; i < idx.size(); ++i) idx(i) = static_cast<double>(i + 1);
    t.add_column("index", idx);
    t.add_column("coef", post.mean);
    t.add_column("coef_var", post.cov.diagonal());
    t.metadata["log_marginal"] =
        format_double(log_marginal_gp(m.design(), m.noise_var(), m.data().outputs));
  } else if (model == "gp") {
    const GpModel m = build_gp(ctx);
    Vector idx(m.coefficients().size());
    for (Index i = 0; i < idx.size(); ++i) idx(i) = static_cast<double>(i + 1);
    t.add_column("index", idx);
    t.add_column("coef", m.coefficients());
    t.metadata["log_marginal"] =
        format_double(log_marginal_gp(m.design(), m.noise_var(), m.data().outputs));
  } else {
    throw ConfigError("fit supports models rvm, qgp, gp");
  }
  return t;
}

TableOutput cmd_predict(const Context& ctx) {
  TableOutput t;
  const Matrix pts = query_points(ctx);
  if (ctx.model() == "smoother") {
    const Config& cfg = ctx.rc.config;
    const std::string method = cfg.str("smoother.method");
    Vector mean(pts.rows());
    for (Index i = 0; i < pts.rows(); ++i) {
      WeightProfile w;
      const Vector x = pts.row(i).transpose();
      if (method == "nadaraya-watson")
        w = nadaraya_watson_weights(ctx.data.inputs, x, cfg.num("smoother.lambda"));
      else if (method == "knn")
        w = knn_weights(ctx.data.inputs, x, static_cast<int>(cfg.integer_or("smoother.k", 1)));
      else if (method == "idw")
        w = idw_weights(ctx.data.inputs, x, cfg.num_or("smoother.exponent", 2.0));
      else if (method == "lagrange")
        w = lagrange_weights(ctx.data.inputs.col(0), x(0));
      else if (method == "sinc")
        w = sinc_weights(ctx.data.inputs.col(0), x(0));
      else
        throw ConfigError("smoother.method must be nadaraya-watson, knn, idw, lagrange or sinc");
      mean(i) = smoother_predict(w, ctx.data.outputs);
    }
    add_point_columns(t, pts);
    t.add_column("mean", mean);
    return t;
  }
  const auto [mean, var] = predict_curve(ctx, pts);
  add_point_columns(t, pts);
  t.add_column("mean", mean);
  t.add_column("variance", var);
  return t;
}

CommandResult cmd_smooth(const Context& ctx) {
  GaussianState state;
  const std::string model = ctx.model();
  if (model == "rvm")
    state = smooth(build_rvm(ctx));
  else if (model == "qgp")
    state = smooth(build_qgp(ctx));
  else if (model == "gp")
    state = smooth(build_gp(ctx));
  else
    throw ConfigError("smooth supports models rvm, qgp, gp");

  TableOutput t;
  Vector idx(state.mean.size());
  for (Index i = 0; i < idx.size(); ++i) idx(i) = static_cast<double>(i + 1);
  t.add_column("index", idx);
  t.add_column("mean", state.mean);
  t.add_column("variance", state.cov.diagonal());

  TableOutput cov;
  for (Index c = 0; c < state.cov.cols(); ++c)
    cov.add_column("c" + std::to_string(c + 1), state.cov.col(c));
  return CommandResult{std::move(t), {{".cov.csv", std::move(cov)}}};
}

TableOutput cmd_sample(const Context& ctx) {
  const Config& cfg = ctx.rc.config;
  const Matrix pts = query_points(ctx);
  const int count = static_cast<int>(cfg.integer_or("sample.count", 10));
  const std::string target = cfg.str_or("sample.target", "posterior");
  const std::string space = cfg.str_or("sample.space", "weight");
  SeededRng rng(ctx.seed);

  Matrix draws;
  const std::string model = ctx.model();
  if (model == "gp") {
    const GpModel m = build_gp(ctx);
    draws = target == "prior" ? sample_prior(m, pts, rng, count)
                              : sample_posterior(m, pts, rng, count);
  } else if (model == "rvm") {
    const RvmModel m = build_rvm(ctx);
    const SamplePath path =
        space == "function" ? SamplePath::FunctionSpace : SamplePath::WeightSpace;
    draws = target == "prior" ? sample_prior(m, pts, rng, count, path)
                              : sample_posterior(m, pts, rng, count, path);
  } else {
    throw ConfigError("sample supports models gp and rvm");
  }

  TableOutput t;
  add_point_columns(t, pts);
  for (int s = 0; s < count; ++s) t.add_column("draw_" + std::to_string(s + 1), draws.col(s));
  t.metadata["sample.target"] = target;
  t.metadata["sample.count"] = std::to_string(count);
  return t;
}

TableOutput cmd_learn(const Context& ctx) {
  const Config& cfg = ctx.rc.config;
  const std::string model = ctx.model();
  if (model != "gp" && model != "qgp" && model != "rvm")
    throw ConfigError("learn supports models rvm, qgp, gp");

  const KernelSpec spec0 = kernel_from_config(cfg);
  HyperParams theta0;
  std::vector<std::string> names;
  if (cfg.has("learn.params")) {
    names = cfg.list("learn.params");
  } else {
    for (const auto& [k, v] : spec0.params)
      if (v > 0.0) names.push_back("kernel." + k);
    names.push_back("noise_var");
  }
  for (const auto& name : names) {
    if (name == "noise_var")
      theta0.values[name] = cfg.num_or("noise_var", 1.0);
    else if (name.rfind("kernel.", 0) == 0)
      theta0.values[name] = spec0.param(name.substr(7), 1.0);
    else
      throw ConfigError("learn.params: unknown parameter '" + name + "'");
  }

  Bounds bounds;
  for (const auto& [name, v] : theta0.values) {
    double lo = 1e-6, hi = 1e6;
    const std::string key = "learn.bounds." + name;
    if (cfg.has(key)) {
      const auto parts = cfg.list(key);
      if (parts.size() != 2) throw ConfigError(key + ": expected 'lo,hi'");
      lo = std::strtod(parts[0].c_str(), nullptr);
      hi = std::strtod(parts[1].c_str(), nullptr);
    }
    bounds.box[name] = {lo, hi};
  }

  const Dataset& data = ctx.data;
  const double prior_var = cfg.num_or("prior.variance", 1.0);
  auto log_marginal = [&, model](const HyperParams& theta) {
    KernelSpec spec = spec0;
    double noise = cfg.num_or("noise_var", 1.0);
    for (const auto& [name, v] : theta.values) {
      if (name == "noise_var")
        noise = v;
      else
        spec.params[name.substr(7)] = v;
    }
    const BasisSet basis = BasisSet::homogeneous(spec, data.inputs);
    const DesignMatrix dm = design_matrix(basis, data.inputs);
    if (model == "rvm") {
      const Matrix prior = prior_var * Matrix::Identity(data.size(), data.size());
      return log_marginal_rvm(dm.matrix, prior, noise, data.outputs);
    }
    return log_marginal_gp(symmetrized(dm.matrix), noise, data.outputs);
  };

  const OptimResult result = optimize_type2(
      log_marginal, theta0, bounds, static_cast<int>(cfg.integer_or("learn.max_iter", 200)),
      static_cast<int>(cfg.integer_or("learn.restarts", 2)));

  TableOutput t;
  Vector iter(static_cast<Index>(result.trace.size()));
  std::map<std::string, Vector> cols;
  for (const auto& name : theta0.names())
    cols[name] = Vector(static_cast<Index>(result.trace.size()));
  Vector nll(static_cast<Index>(result.trace.size()));
  for (size_t r = 0; r < result.trace.size(); ++r) {
    iter(static_cast<Index>(r)) = result.trace[r].iteration;
    for (const auto& name : theta0.names())
      cols[name](static_cast<Index>(r)) = result.trace[r].theta.at(name);
    nll(static_cast<Index>(r)) = result.trace[r].nll;
  }
  t.add_column("iteration", iter);
  for (const auto& [name, v] : cols) t.add_column(name, v);
  t.add_column("objective", nll);
  for (const auto& [name, v] : result.theta.values)
    t.metadata["learned." + name] = format_double(v);
  t.metadata["final_nll"] = format_double(result.nll);
  return t;
}

TableOutput cmd_relevance(const Context& ctx) {
  if (ctx.model() != "rvm") throw ConfigError("relevance needs model = rvm");
  const Config& cfg = ctx.rc.config;
  const RvmModel m = build_rvm(ctx);
  const RelevanceResult result =
      learn_relevance(m, static_cast<int>(cfg.integer_or("relevance.max_iter", 50)),
                      cfg.num_or("relevance.prune_threshold", 1e6));

  TableOutput t;
  const Index n = result.alpha.size();
  Vector idx(n), pruned = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) idx(i) = static_cast<double>(i + 1);
  for (Index i : result.pruned) pruned(i) = 1.0;
  t.add_column("index", idx);
  t.add_column("alpha", result.alpha);
  t.add_column("pruned", pruned);
  t.metadata["surviving"] = std::to_string(result.surviving.size());
  t.metadata["log_marginal"] = format_double(result.final_log_marginal);
  return t;
}

TableOutput cmd_kalman(const Context& ctx) {
  require_integer_times(ctx.data);
  const StateSpaceAR1 model = build_kalman(ctx);
  const FilterTrack track = forward_filter(model, ctx.data.outputs);
  const SmoothTrack smoothed = backward_smooth(model, track);

  TableOutput t;
  Vector idx(track.size());
  for (Index i = 0; i < idx.size(); ++i) idx(i) = static_cast<double>(i + 1);
  t.add_column("t", idx);
  t.add_column("mu_pred", track.mean_pred);
  t.add_column("var_pred", track.var_pred);
  t.add_column("mu_filt", track.mean_filt);
  t.add_column("var_filt", track.var_filt);
  t.add_column("mu_smooth", smoothed.mean);
  t.add_column("var_smooth", smoothed.var);
  return t;
}

TableOutput cmd_compare(const Context& ctx) {
  const Config& cfg = ctx.rc.config;
  const std::string pair = cfg.str("compare.pair");

  TableOutput t;
  if (pair == "gp-qgp") {
    const Matrix pts = query_points(ctx);
    const GpModel gp = build_gp(ctx);
    const QgpModel qgp = build_qgp(ctx);
    const Index p = pts.rows();
    Vector is_summary = Vector::Zero(p + 1);
    is_summary(p) = 1.0;
    Matrix coords(p + 1, pts.cols());
    coords.topRows(p) = pts;
    coords.row(p).setZero();
    Vector mean_a(p + 1), mean_b(p + 1), dmean(p + 1), var_a(p + 1), var_b(p + 1), dvar(p + 1);
    for (Index i = 0; i < p; ++i) {
      const auto a = predict(gp, pts.row(i).transpose());
      const auto b = predict(qgp, pts.row(i).transpose());
      mean_a(i) = a.mean;
      mean_b(i) = b.mean;
      dmean(i) = a.mean - b.mean;
      var_a(i) = a.variance;
      var_b(i) = b.variance;
      dvar(i) = a.variance - b.variance;
    }
    mean_a(p) = mean_b(p) = var_a(p) = var_b(p) = 0.0;
    dmean(p) = dmean.head(p).cwiseAbs().maxCoeff();
    dvar(p) = dvar.head(p).cwiseAbs().maxCoeff();
    t.add_column("is_summary", is_summary);
    add_point_columns(t, coords);
    t.add_column("mean_gp", mean_a);
    t.add_column("mean_qgp", mean_b);
    t.add_column("mean_delta", dmean);
    t.add_column("var_gp", var_a);
    t.add_column("var_qgp", var_b);
    t.add_column("var_delta", dvar);
    t.metadata["max_abs_mean_delta"] = format_double(dmean(p));
    t.metadata["max_abs_var_delta"] = format_double(dvar(p));
    return t;
  }

  if (pair == "kalman-gp") {
    require_integer_times(ctx.data);
    const StateSpaceAR1 model = build_kalman(ctx);
    const FilterTrack track = forward_filter(model, ctx.data.outputs);
    const SmoothTrack smoothed = backward_smooth(model, track);

    const KernelSpec ar1 = KernelSpec::ar1(model.gamma, model.process_var);
    const GpModel gp = GpModel::make(ctx.data, ar1, model.obs_var, ctx.jitter);
    const GaussianState batch = smooth(gp);

    const Index n = track.size();
    Vector is_summary = Vector::Zero(n + 1);
    is_summary(n) = 1.0;
    Vector idx(n + 1), mean_a(n + 1), mean_b(n + 1), dmean(n + 1), var_a(n + 1), var_b(n + 1),
        dvar(n + 1);
    for (Index i = 0; i < n; ++i) {
      idx(i) = static_cast<double>(i + 1);
      mean_a(i) = smoothed.mean(i);
      mean_b(i) = batch.mean(i);
      dmean(i) = smoothed.mean(i) - batch.mean(i);
      var_a(i) = smoothed.var(i);
      var_b(i) = batch.cov(i, i);
      dvar(i) = smoothed.var(i) - batch.cov(i, i);
    }
    idx(n) = 0.0;
    mean_a(n) = mean_b(n) = var_a(n) = var_b(n) = 0.0;
    dmean(n) = dmean.head(n).cwiseAbs().maxCoeff();
    dvar(n) = dvar.head(n).cwiseAbs().maxCoeff();
    t.add_column("is_summary", is_summary);
    t.add_column("t", idx);
    t.add_column("mean_kalman", mean_a);
    t.add_column("mean_gp", mean_b);
    t.add_column("mean_delta", dmean);
    t.add_column("var_kalman", var_a);
    t.add_column("var_gp", var_b);
    t.add_column("var_delta", dvar);
    t.metadata["max_abs_mean_delta"] = format_double(dmean(n));
    t.metadata["max_abs_var_delta"] = format_double(dvar(n));
    return t;
  }

  throw ConfigError("compare.pair must be 'gp-qgp' or 'kalman-gp'");
}

}  // namespace

CommandResult run_command(const RunConfig& rc) {
  Context ctx{rc,
              Dataset{},
              rc.seed.value_or(rc.config.uint_or("seed", 0)),
              rc.jitter.value_or(rc.config.num_or("jitter", 0.0)),
              {}};
  const std::string data_path = !rc.data_path.empty() ? rc.data_path : rc.config.str_or("data", "");
  if (data_path.empty()) throw ConfigError("no dataset: pass --data or set 'data' in the config");
  ctx.data = ingest_csv(data_path);

  // capture numeric warnings (jitter fallbacks, clamps) into the metadata
  std::vector<std::string>* sink = &ctx.warnings;
  set_warning_handler([sink](const std::string& msg) { sink->push_back(msg); });
  auto restore = [] {
    set_warning_handler([](const std::string& msg) { std::fputs(("warning: " + msg + "\n").c_str(), stderr); });
  };

  CommandResult result;
  try {
    if (rc.command == "fit")
      result.table = cmd_fit(ctx);
    else if (rc.command == "predict")
      result.table = cmd_predict(ctx);
    else if (rc.command == "smooth")
      result = cmd_smooth(ctx);
    else if (rc.command == "sample")
      result.table = cmd_sample(ctx);
    else if (rc.command == "learn")
      result.table = cmd_learn(ctx);
    else if (rc.command == "relevance")
      result.table = cmd_relevance(ctx);
    else if (rc.command == "kalman")
      result.table = cmd_kalman(ctx);
    else if (rc.command == "compare")
      result.table = cmd_compare(ctx);
    else
      throw ConfigError("unknown command '" + rc.command + "'");
  } catch (...) {
    restore();
    throw;
  }
  restore();

  auto finalize = [&](TableOutput& t) {
    t.metadata["config_digest"] = rc.config.digest;
    t.metadata["seed"] = std::to_string(ctx.seed);
    t.metadata["jitter"] = format_double(ctx.jitter);
    t.metadata["kbreg_version"] = "0.1.0";
    if (!ctx.warnings.empty()) {
      std::string joined;
      for (const auto& w : ctx.warnings) joined += (joined.empty() ? "" : " | ") + w;
      t.metadata["warnings"] = joined;
    }
  };
  finalize(result.table);
  for (auto& [suffix, table] : result.sidecars) finalize(table);
  return result;
}

}  // namespace kbreg
