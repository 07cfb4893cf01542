#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crf/error.hpp"
#include "crf/eval.hpp"
#include "crf/io.hpp"
#include "crf/preprocess.hpp"
#include "crf/synth.hpp"

namespace py = pybind11;

namespace {

std::vector<double> as_vec(const py::array_t<double>& a) {
  const auto buf = a.request();
  const auto* ptr = static_cast<const double*>(buf.ptr);
  return {ptr, ptr + buf.size};
}

py::array_t<double> make_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

crf::TuningCurve make_curve(const std::vector<double>& contrasts,
                            const std::vector<double>& responses,
                            const std::string& site_id) {
  if (contrasts.size() != responses.size())
    crf::fail(crf::ErrorKind::DataError, "contrast/response length mismatch");
  crf::TuningCurve c;
  c.site_id = site_id;
  for (std::size_t i = 0; i < contrasts.size(); ++i)
    c.points.push_back({contrasts[i], responses[i], 1});
  return c;
}

crf::KindConfig kind_config_from_kwargs(int n_neurons, int n_rules, int n_locals,
                                        double rbf_width, int mlp_epochs,
                                        int anfis_epochs, std::uint64_t seed) {
  crf::KindConfig kc;
  kc.hyper.n_neurons = n_neurons;
  kc.hyper.n_rules = n_rules;
  kc.hyper.n_locals = n_locals;
  kc.hyper.rbf_width = rbf_width;
  kc.mlp_epochs = mlp_epochs;
  kc.anfis_epochs = anfis_epochs;
  kc.train.seed = seed;
  return kc;
}

}  // namespace

PYBIND11_MODULE(_crfcore, m) {
  m.doc() = "contrast response function tuning core";

  py::register_exception<crf::Error>(m, "CrfError");

  py::class_<crf::KernelModel>(m, "KernelModel")
      .def_property_readonly(
          "kind", [](const crf::KernelModel& km) { return crf::to_string(km.kind); })
      .def_property_readonly(
          "params", [](const crf::KernelModel& km) { return km.params; })
      .def("eval", [](const crf::KernelModel& km, double phi) {
        return crf::eval(km, phi);
      })
      .def("eval",
           [](const crf::KernelModel& km, const py::array_t<double>& phi) {
             return make_array(crf::eval_many(km, as_vec(phi)));
           })
      .def("gradient", [](const crf::KernelModel& km, double phi) {
        return crf::gradient(km, phi);
      })
      .def("to_json",
           [](const crf::KernelModel& km) { return crf::model_to_json(km).dump(); })
      .def_static("from_json", [](const std::string& s) {
        return crf::model_from_json(crf::json::parse(s));
      });

  m.def("make_model",
        [](const std::string& kind, const std::vector<double>& params,
           int n_neurons, int n_rules, int n_locals, double rbf_width) {
          crf::KernelModel km;
          km.kind = crf::model_kind_from_string(kind);
          km.hyper.n_neurons = n_neurons;
          km.hyper.n_rules = n_rules;
          km.hyper.n_locals = n_locals;
          km.hyper.rbf_width = rbf_width;
          km.params = params;
          if (km.params.size() != crf::param_count(km.kind, km.hyper))
            crf::fail(crf::ErrorKind::InvalidConfig, "params length mismatch");
          return km;
        },
        py::arg("kind"), py::arg("params"), py::arg("n_neurons") = 3,
        py::arg("n_rules") = 2, py::arg("n_locals") = 2,
        py::arg("rbf_width") = 0.5);

  m.def("normalize_input", &crf::normalize_input);
  m.def("r_squared", [](const py::array_t<double>& y, const py::array_t<double>& yh) {
    return crf::r_squared(as_vec(y), as_vec(yh));
  });
  m.def("nmse", [](const py::array_t<double>& y, const py::array_t<double>& yh) {
    return crf::nmse(as_vec(y), as_vec(yh));
  });

  m.def("monotonicity_index",
        [](const std::vector<double>& contrasts, const std::vector<double>& responses) {
          const auto rep = crf::monotonicity_index(
              make_curve(contrasts, responses, "py"));
          py::dict d;
          d["mi"] = rep.mi;
          d["supersaturating"] =
              rep.cls == crf::MonotonicityClass::Supersaturating;
          return d;
        });

  m.def("butterworth_lowpass",
        [](const py::array_t<double>& x, double fs, double cutoff) {
          return make_array(crf::butterworth_lowpass(as_vec(x), fs, cutoff));
        });

  m.def("band_power",
        [](const py::array_t<double>& x, double fs, double lo, double hi,
           std::size_t start, std::size_t end) {
          return crf::band_power(as_vec(x), fs, {lo, hi}, start, end);
        },
        py::arg("samples"), py::arg("sample_rate"), py::arg("band_lo") = 30.0,
        py::arg("band_hi") = 90.0, py::arg("start") = 0, py::arg("end") = 0);

  m.def("fit_points",
        [](const py::array_t<double>& phi, const py::array_t<double>& y,
           const std::string& kind, int n_neurons, int n_rules, int n_locals,
           double rbf_width, int mlp_epochs, int anfis_epochs,
           std::uint64_t seed) {
          const auto pv = as_vec(phi);
          const auto yv = as_vec(y);
          if (pv.size() != yv.size())
            crf::fail(crf::ErrorKind::DataError, "length mismatch");
          std::vector<crf::DataPoint> data(pv.size());
          for (std::size_t i = 0; i < pv.size(); ++i) data[i] = {pv[i], yv[i]};
          const auto kc = kind_config_from_kwargs(n_neurons, n_rules, n_locals,
                                                  rbf_width, mlp_epochs,
                                                  anfis_epochs, seed);
          const auto fitted = crf::fit_any(
              data, {}, crf::model_kind_from_string(kind), kc);
          return fitted.model;
        },
        py::arg("phi"), py::arg("y"), py::arg("kind"), py::arg("n_neurons") = 3,
        py::arg("n_rules") = 2, py::arg("n_locals") = 2,
        py::arg("rbf_width") = 0.5, py::arg("mlp_epochs") = 12,
        py::arg("anfis_epochs") = 1, py::arg("seed") = 0);

  m.def("loocv",
        [](const std::vector<double>& contrasts, const std::vector<double>& responses,
           const std::string& kind, int n_neurons, int n_rules, int n_locals,
           double rbf_width, int mlp_epochs, int anfis_epochs,
           std::uint64_t seed) {
          crf::EvalConfig cfg;
          cfg.kind_config = kind_config_from_kwargs(n_neurons, n_rules, n_locals,
                                                    rbf_width, mlp_epochs,
                                                    anfis_epochs, seed);
          const auto res = crf::loocv(make_curve(contrasts, responses, "py"),
                                      crf::model_kind_from_string(kind), cfg);
          py::dict d;
          d["r2"] = res.r2;
          d["nmse"] = res.nmse_value;
          d["failed_folds"] = res.failed_folds;
          d["model"] = res.model;
          if (res.c50_estimate) d["c50"] = *res.c50_estimate;
          return d;
        },
        py::arg("contrasts"), py::arg("responses"), py::arg("kind"),
        py::arg("n_neurons") = 3, py::arg("n_rules") = 2, py::arg("n_locals") = 2,
        py::arg("rbf_width") = 0.5, py::arg("mlp_epochs") = 12,
        py::arg("anfis_epochs") = 1, py::arg("seed") = 0);

  m.def("default_corpus",
        [](std::uint64_t seed, double noise_sd) {
          py::list out;
          for (const auto& lc : crf::default_corpus(seed, noise_sd)) {
            py::dict d;
            d["site_id"] = lc.curve.site_id;
            d["kind"] = crf::to_string(lc.kind);
            d["true_params"] = lc.true_params;
            std::vector<double> contrasts, responses;
            for (const auto& p : lc.curve.points) {
              contrasts.push_back(p.contrast);
              responses.push_back(p.response);
            }
            d["contrasts"] = contrasts;
            d["responses"] = responses;
            out.append(d);
          }
          return out;
        },
        py::arg("seed"), py::arg("noise_sd") = crf::kDefaultCorpusNoiseSd);

  m.def("split_dataset",
        [](const py::array_t<double>& phi, const py::array_t<double>& y,
           std::uint64_t seed) {
          const auto pv = as_vec(phi);
          const auto yv = as_vec(y);
          std::vector<crf::DataPoint> data(pv.size());
          for (std::size_t i = 0; i < pv.size(); ++i) data[i] = {pv[i], yv[i]};
          const auto s = crf::split_dataset(data, seed);
          return py::make_tuple(s.train, s.val, s.test);
        });

  m.attr("default_corpus_seed") = crf::kDefaultCorpusSeed;
  m.attr("default_contrast_grid") = crf::kDefaultContrastGrid;
}
