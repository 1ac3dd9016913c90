// Python bindings: arrays in, arrays out. Matrices are float64 row-major.

#include "stct/errors.hpp"
#include "stct/io.hpp"
#include "stct/nmc.hpp"
#include "stct/noise.hpp"
#include "stct/oracle.hpp"
#include "stct/pipeline.hpp"
#include "stct/synthetic.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace stct;

namespace {

HardLabelVector to_labels(const std::vector<int>& v) { return HardLabelVector(v); }

py::dict nmc_result_dict(const nmc::NmcResult& r) {
  py::list trace;
  for (const auto& rec : r.trace.records) {
    py::dict d;
    d["round"] = rec.round;
    d["val_loss"] = rec.val_loss;
    d["agreement"] = rec.agreement;
    if (rec.label_acc) d["label_acc"] = *rec.label_acc;
    trace.append(d);
  }
  py::dict out;
  out["corrected"] = r.corrected.data();
  out["labels"] = harden(r.corrected).values();
  out["rounds"] = r.rounds();
  out["stop"] = r.stop == nmc::StopReason::Agreement ? "agreement" : "sampling_bound";
  out["trace"] = trace;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Noisy-label correction core";

  auto base = py::register_exception<Error>(m, "StctError", PyExc_RuntimeError);
  py::register_exception<InputDomainError>(m, "InputDomainError", base.ptr());
  py::register_exception<SingularityError>(m, "SingularityError", base.ptr());
  py::register_exception<DegenerateSplitError>(m, "DegenerateSplitError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
  py::register_exception<NonConvergenceError>(m, "NonConvergenceError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<UsageError>(m, "UsageError", base.ptr());

  m.def(
      "gaussian_mixture",
      [](int classes, long long n, int dim, double sep, std::uint64_t seed) {
        synthetic::MixtureSpec s;
        s.classes = classes;
        s.n = n;
        s.dim = dim;
        s.sep = sep;
        s.seed = seed;
        const Dataset d = synthetic::gaussian_mixture(s);
        return py::make_tuple(d.features.data(), d.clean_labels->values());
      },
      py::arg("classes") = 10, py::arg("n") = 5000, py::arg("dim") = 32, py::arg("sep") = 6.0,
      py::arg("seed") = 17, "Returns (features, labels) from a seeded isotropic Gaussian mixture.");

  m.def(
      "symmetric_noise",
      [](const std::vector<int>& labels, int classes, double rate, std::uint64_t seed, bool include_self) {
        const auto t = noise::make_symmetric_T(
            classes, rate,
            include_self ? noise::SymmetricConvention::IncludeSelf : noise::SymmetricConvention::ExcludeSelf);
        const auto noisy = noise::inject_noise(to_labels(labels), t, seed);
        return py::make_tuple(noisy.labels.values(), noisy.mask);
      },
      py::arg("labels"), py::arg("classes"), py::arg("rate"), py::arg("seed") = 1, py::arg("include_self") = true,
      "Returns (noisy_labels, flipped_mask).");

  m.def("required_sampling_times", &nmc::required_sampling_times, py::arg("n"), py::arg("r"),
        py::arg("beta") = 0.9999);

  m.def(
      "run_nmc",
      [](const Matrix& features, const std::vector<int>& labels, int classes, double r, double eta,
         std::uint64_t seed, std::optional<std::vector<int>> clean) {
        nmc::NmcConfig cfg;
        cfg.r = r;
        cfg.eta = eta;
        cfg.seed = seed;
        std::optional<HardLabelVector> truth;
        if (clean) truth = to_labels(*clean);
        py::gil_scoped_release release;
        auto res = nmc::run_nmc(FeatureMatrix(features), one_hot(to_labels(labels), classes), cfg, truth);
        py::gil_scoped_acquire acquire;
        return nmc_result_dict(res);
      },
      py::arg("features"), py::arg("labels"), py::arg("classes"), py::arg("r") = 0.5, py::arg("eta") = 0.2,
      py::arg("seed") = 0, py::arg("clean") = py::none(),
      "Label correction only. Returns a dict with corrected, labels, rounds, stop and trace.");

  m.def(
      "run_stct",
      [](const std::filesystem::path& config_path) {
        const auto cfg = pipeline::load_run_config(config_path);
        pipeline::RunResult res;
        {
          py::gil_scoped_release release;
          res = pipeline::run_stct(cfg);
        }
        py::dict out;
        out["report"] = res.report.to_jsonl();
        out["labels"] = res.corrected.values();
        out["corrected"] = res.corrected_soft.data();
        return out;
      },
      py::arg("config_path"), "Runs the full pipeline from a config file.");

  m.def("save_matrix", [](const std::filesystem::path& p, const Matrix& x) { io::save_matrix(p, x); },
        py::arg("path"), py::arg("matrix"));
  m.def("load_matrix", &io::load_matrix, py::arg("path"));

  m.def(
      "verify",
      [](const std::string& suite, std::uint64_t seed) {
        py::list out;
        for (const auto& r : oracle::run_suite(suite, seed)) {
          py::dict d;
          d["name"] = r.name;
          d["oracle"] = r.oracle_value;
          d["impl"] = r.impl_value;
          d["tolerance"] = r.tolerance;
          d["check"] = r.check;
          d["pass"] = r.pass;
          out.append(d);
        }
        return out;
      },
      py::arg("suite") = "gradients", py::arg("seed") = 2024);
}
