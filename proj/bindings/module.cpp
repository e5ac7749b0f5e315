#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kbreg/commands.hpp"
#include "kbreg/evidence.hpp"
#include "kbreg/gp.hpp"
#include "kbreg/kalman.hpp"
#include "kbreg/qgp.hpp"
#include "kbreg/rvm.hpp"
#include "kbreg/smoothers.hpp"

namespace py = pybind11;
using namespace kbreg;

namespace {

KernelSpec spec_from_python(const std::string& family, const std::map<std::string, double>& params) {
  KernelSpec spec{kernel_family_from_string(family), params};
  spec.validate();
  return spec;
}

Matrix as_points(const Eigen::Ref<const Matrix>& pts) { return pts; }

}  // namespace

PYBIND11_MODULE(_kbreg, m) {
  m.doc() = "Bayesian kernel regression toolkit: RVM, quasi-GP, GP, linear smoothers, AR(1) Kalman";

  py::register_exception<Error>(m, "KbregError");

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y) {
             return Dataset::make(x, y);
           }),
           py::arg("inputs"), py::arg("outputs"))
      .def_property_readonly("inputs", [](const Dataset& d) { return d.inputs; })
      .def_property_readonly("outputs", [](const Dataset& d) { return d.outputs; })
      .def_property_readonly("size", &Dataset::size)
      .def_property_readonly("dim", &Dataset::dim);

  py::class_<KernelSpec>(m, "KernelSpec")
      .def(py::init(&spec_from_python), py::arg("family"), py::arg("params"))
      .def("eval",
           [](const KernelSpec& spec, const Eigen::Ref<const Vector>& x,
              const Eigen::Ref<const Vector>& z) { return eval_kernel(spec, x, z); })
      .def("mean",
           [](const KernelSpec& spec, const Eigen::Ref<const Vector>& x) {
             return mean_function(spec, x);
           })
      .def_property_readonly("family",
                             [](const KernelSpec& s) { return kernel_family_name(s.family); })
      .def_property_readonly("params", [](const KernelSpec& s) { return s.params; });

  py::class_<GaussianState>(m, "GaussianState")
      .def_readonly("mean", &GaussianState::mean)
      .def_readonly("cov", &GaussianState::cov);

  py::class_<WeightPosterior>(m, "WeightPosterior")
      .def_readonly("mean", &WeightPosterior::mean)
      .def_readonly("cov", &WeightPosterior::cov);

  py::class_<JointPosterior>(m, "JointPosterior")
      .def_readonly("points", &JointPosterior::points)
      .def_readonly("mean", &JointPosterior::mean)
      .def_readonly("cov", &JointPosterior::cov);

  py::class_<GpModel>(m, "GpModel")
      .def_static(
          "make",
          [](const Dataset& data, const KernelSpec& spec, double noise_var, double jitter) {
            return GpModel::make(data, spec, noise_var, jitter);
          },
          py::arg("data"), py::arg("kernel"), py::arg("noise_var"), py::arg("jitter") = 0.0)
      .def("predict",
           [](const GpModel& model, const Eigen::Ref<const Matrix>& pts) {
             Vector mean(pts.rows()), var(pts.rows());
             for (Index i = 0; i < pts.rows(); ++i) {
               const auto p = predict(model, pts.row(i).transpose());
               mean(i) = p.mean;
               var(i) = p.variance;
             }
             return py::make_tuple(mean, var);
           })
      .def("predict_joint",
           [](const GpModel& model, const Eigen::Ref<const Matrix>& pts) {
             return predict_joint(model, as_points(pts));
           })
      .def("smooth", [](const GpModel& model) { return smooth(model); })
      .def("sample_prior",
           [](const GpModel& model, const Eigen::Ref<const Matrix>& pts, std::uint64_t seed,
              int count) {
             SeededRng rng(seed);
             return sample_prior(model, as_points(pts), rng, count);
           })
      .def("sample_posterior",
           [](const GpModel& model, const Eigen::Ref<const Matrix>& pts, std::uint64_t seed,
              int count) {
             SeededRng rng(seed);
             return sample_posterior(model, as_points(pts), rng, count);
           })
      .def("log_marginal", [](const GpModel& model) {
        return log_marginal_gp(model.design(), model.noise_var(), model.data().outputs);
      });

  py::class_<QgpModel>(m, "QgpModel")
      .def_static(
          "make",
          [](const Dataset& data, const KernelSpec& spec, double noise_var, double jitter) {
            return QgpModel::make(data, spec, noise_var, jitter);
          },
          py::arg("data"), py::arg("kernel"), py::arg("noise_var"), py::arg("jitter") = 0.0)
      .def("predict",
           [](const QgpModel& model, const Eigen::Ref<const Matrix>& pts) {
             Vector mean(pts.rows()), var(pts.rows());
             for (Index i = 0; i < pts.rows(); ++i) {
               const auto p = predict(model, pts.row(i).transpose());
               mean(i) = p.mean;
               var(i) = p.variance;
             }
             return py::make_tuple(mean, var);
           })
      .def("smooth", [](const QgpModel& model) { return smooth(model); })
      .def("weight_posterior", [](const QgpModel& model) { return weight_posterior(model); })
      .def("log_marginal", [](const QgpModel& model) {
        return log_marginal_gp(model.design(), model.noise_var(), model.data().outputs);
      });

  py::class_<RvmModel>(m, "RvmModel")
      .def_static(
          "make",
          [](const Dataset& data, const KernelSpec& spec, const Eigen::Ref<const Matrix>& prior,
             double noise_var) {
            return RvmModel::make(data, BasisSet::homogeneous(spec, data.inputs), prior, noise_var);
          },
          py::arg("data"), py::arg("kernel"), py::arg("prior_cov"), py::arg("noise_var"))
      .def("predict",
           [](const RvmModel& model, const Eigen::Ref<const Matrix>& pts) {
             Vector mean(pts.rows()), var(pts.rows());
             for (Index i = 0; i < pts.rows(); ++i) {
               const auto p = predict(model, pts.row(i).transpose());
               mean(i) = p.mean;
               var(i) = p.variance;
             }
             return py::make_tuple(mean, var);
           })
      .def("smooth", [](const RvmModel& model) { return smooth(model); })
      .def("weight_posterior",
           [](const RvmModel& model, bool cross_check) {
             return weight_posterior(model, cross_check);
           },
           py::arg("cross_check") = false)
      .def("induced_prior",
           [](const RvmModel& model, const Eigen::Ref<const Matrix>& pts) {
             return induced_prior(model, as_points(pts));
           })
      .def("sample_prior",
           [](const RvmModel& model, const Eigen::Ref<const Matrix>& pts, std::uint64_t seed,
              int count, const std::string& path) {
             SeededRng rng(seed);
             return sample_prior(model, as_points(pts), rng, count,
                                 path == "function" ? SamplePath::FunctionSpace
                                                    : SamplePath::WeightSpace);
           },
           py::arg("points"), py::arg("seed"), py::arg("count"), py::arg("path") = "weight")
      .def("sample_posterior",
           [](const RvmModel& model, const Eigen::Ref<const Matrix>& pts, std::uint64_t seed,
              int count, const std::string& path) {
             SeededRng rng(seed);
             return sample_posterior(model, as_points(pts), rng, count,
                                     path == "function" ? SamplePath::FunctionSpace
                                                        : SamplePath::WeightSpace);
           },
           py::arg("points"), py::arg("seed"), py::arg("count"), py::arg("path") = "weight")
      .def("learn_relevance",
           [](const RvmModel& model, int max_iter, double prune_threshold) {
             const RelevanceResult r = learn_relevance(model, max_iter, prune_threshold);
             return py::make_tuple(r.alpha, r.pruned, r.refitted);
           },
           py::arg("max_iter") = 50, py::arg("prune_threshold") = 1e6)
      .def("log_marginal", [](const RvmModel& model) {
        return log_marginal_rvm(model.design(), model.prior_cov(), model.noise_var(),
                                model.data().outputs);
      });

  py::class_<StateSpaceAR1>(m, "StateSpaceAR1")
      .def(py::init(&StateSpaceAR1::make), py::arg("gamma"), py::arg("process_var"),
           py::arg("obs_var"))
      .def_readonly("gamma", &StateSpaceAR1::gamma)
      .def_readonly("process_var", &StateSpaceAR1::process_var)
      .def_readonly("obs_var", &StateSpaceAR1::obs_var)
      .def("stationary_variance", [](const StateSpaceAR1& m2) { return stationary_variance(m2); })
      .def("kernel", [](const StateSpaceAR1& m2, long t, long s) { return ar1_kernel(m2, t, s); })
      .def("precision_matrix",
           [](const StateSpaceAR1& m2, int n) { return precision_matrix(m2, n); });

  py::class_<FilterTrack>(m, "FilterTrack")
      .def_readonly("mean_pred", &FilterTrack::mean_pred)
      .def_readonly("var_pred", &FilterTrack::var_pred)
      .def_readonly("mean_filt", &FilterTrack::mean_filt)
      .def_readonly("var_filt", &FilterTrack::var_filt);

  py::class_<SmoothTrack>(m, "SmoothTrack")
      .def_readonly("mean", &SmoothTrack::mean)
      .def_readonly("var", &SmoothTrack::var);

  m.def("forward_filter",
        [](const StateSpaceAR1& model, const Eigen::Ref<const Vector>& y) {
          return forward_filter(model, y);
        });
  m.def("backward_smooth", &backward_smooth);
  m.def("predict_lag", [](const StateSpaceAR1& model, const FilterTrack& track, int t, int tau) {
    const auto [mean, var] = predict_lag(model, track, t, tau);
    return py::make_tuple(mean, var);
  });

  m.def("nadaraya_watson_weights",
        [](const Eigen::Ref<const Matrix>& inputs, const Eigen::Ref<const Vector>& x,
           double lambda) { return nadaraya_watson_weights(inputs, x, lambda).weights; });
  m.def("knn_weights", [](const Eigen::Ref<const Matrix>& inputs, const Eigen::Ref<const Vector>& x,
                          int k) { return knn_weights(inputs, x, k).weights; });
  m.def("idw_weights",
        [](const Eigen::Ref<const Matrix>& inputs, const Eigen::Ref<const Vector>& x,
           double exponent) { return idw_weights(inputs, x, exponent).weights; },
        py::arg("inputs"), py::arg("x"), py::arg("exponent") = 2.0);
  m.def("lagrange_weights", [](const Eigen::Ref<const Vector>& nodes, double x) {
    return lagrange_weights(nodes, x).weights;
  });
  m.def("sinc_weights", [](const Eigen::Ref<const Vector>& nodes, double x) {
    return sinc_weights(nodes, x).weights;
  });
  m.def("gp_weights", [](const GpModel& model, const Eigen::Ref<const Vector>& x) {
    return gp_weights(model, x).weights;
  });
  m.def("rvm_weights", [](const RvmModel& model, const Eigen::Ref<const Vector>& x) {
    return rvm_weights(model, x).weights;
  });
  m.def("fir_apply", [](const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& y) {
    return fir_apply(FilterSpec{a, Vector()}, y);
  });
  m.def("iir_apply", [](const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                        const Eigen::Ref<const Vector>& y) {
    return iir_apply(FilterSpec{a, b}, y);
  });

  m.def("log_marginal_gp", &log_marginal_gp);
  m.def("log_marginal_rvm", &log_marginal_rvm);
  m.def("mvn_sample", [](const Eigen::Ref<const Vector>& mean, const Eigen::Ref<const Matrix>& cov,
                         std::uint64_t seed, int count, double jitter) {
    SeededRng rng(seed);
    return mvn_sample(mean, cov, rng, count, jitter);
  }, py::arg("mean"), py::arg("cov"), py::arg("seed"), py::arg("count"), py::arg("jitter") = 0.0);
  m.def("woodbury_inverse", &woodbury_inverse);

  m.attr("__version__") = "0.1.0";
}
