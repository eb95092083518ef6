// Copyright 2026 The MACE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings for the detector library.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

#include "mace/config.hpp"
#include "mace/detector.hpp"
#include "mace/dualconv.hpp"
#include "mace/error.hpp"
#include "mace/experiment.hpp"
#include "mace/metrics.hpp"
#include "mace/patex.hpp"
#include "mace/theory.hpp"

namespace py = pybind11;

namespace {

mace::Padding padding_from(const std::string& name) {
  if (name == "none") return mace::Padding::none;
  if (name == "reflect") return mace::Padding::reflect;
  if (name == "zero") return mace::Padding::zero;
  if (name == "segment_mean") return mace::Padding::segment_mean;
  throw mace::DataError("unknown padding '" + name + "'");
}

mace::BasisSet basis_from(const std::vector<std::vector<std::size_t>>& indices, std::size_t window) {
  mace::BasisSet b;
  b.window_size = window;
  b.indices = indices;
  for (const auto& idx : indices) b.tallies.emplace_back(idx.size(), 0);
  b.validate();
  return b;
}

mace::TimeSeriesWindow window_from(const mace::Matrix& values) {
  mace::TimeSeriesWindow w;
  w.values = values;
  return w;
}

py::dict report_dict(const mace::RunReport& r) {
  py::list services;
  for (const auto& m : r.services) {
    py::dict d;
    d["service_id"] = m.service_id;
    d["group"] = m.group;
    d["threshold"] = m.threshold;
    d["precision"] = m.counts.precision();
    d["recall"] = m.counts.recall();
    d["f1"] = m.counts.f1();
    services.append(d);
  }
  py::list groups;
  for (const auto& g : r.groups) {
    py::dict d;
    d["index"] = g.index;
    d["services"] = g.services;
    d["ok"] = g.ok;
    d["stage"] = g.failed_stage;
    d["error"] = g.error;
    groups.append(d);
  }
  py::dict out;
  out["services"] = services;
  out["groups"] = groups;
  out["macro"] = py::dict(py::arg("precision") = r.macro.precision, py::arg("recall") = r.macro.recall,
                          py::arg("f1") = r.macro.f1);
  out["seconds"] = r.seconds;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Frequency-domain anomaly detection with dualistic convolution";

  auto base = py::register_exception<mace::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<mace::DataError>(m, "DataError", base.ptr());
  py::register_exception<mace::NumericalError>(m, "NumericalError", base.ptr());

  py::class_<mace::HyperParams>(m, "HyperParams")
      .def(py::init<>())
      .def_readwrite("gamma_t", &mace::HyperParams::gamma_t)
      .def_readwrite("gamma_f", &mace::HyperParams::gamma_f)
      .def_readwrite("sigma_t", &mace::HyperParams::sigma_t)
      .def_readwrite("sigma_f", &mace::HyperParams::sigma_f)
      .def_readwrite("kernel_len", &mace::HyperParams::kernel_len)
      .def_readwrite("window_size", &mace::HyperParams::window_size)
      .def_readwrite("k_bases", &mace::HyperParams::k_bases)
      .def_readwrite("learning_rate", &mace::HyperParams::learning_rate)
      .def("validate", &mace::HyperParams::validate);

  m.def(
      "dualistic_conv",
      [](const std::vector<double>& x, const std::vector<double>& weights, int gamma, double sigma,
         std::size_t stride, const std::string& padding) {
        return mace::dualistic_conv(x, mace::ConvKernel{weights, gamma, sigma, stride}, padding_from(padding));
      },
      py::arg("x"), py::arg("weights"), py::arg("gamma"), py::arg("sigma") = 1.0, py::arg("stride") = 1,
      py::arg("padding") = "none");

  m.def("amplify_time", &mace::amplify_time, py::arg("series"), py::arg("hp") = mace::HyperParams{},
        "Peak/valley amplification of a [features x time] array.");

  m.def(
      "freq_pool",
      [](const std::vector<double>& a, std::size_t length, int gamma, double sigma) {
        return mace::freq_pool(a, mace::ConvKernel::uniform(length, gamma, sigma, length));
      },
      py::arg("amplitudes"), py::arg("length"), py::arg("gamma"), py::arg("sigma"));

  m.def("dft_amplitudes", [](const std::vector<double>& x) { return mace::dft_amplitudes(x); });

  m.def(
      "select_basis",
      [](const std::vector<mace::Matrix>& windows, std::size_t k) {
        std::vector<mace::TimeSeriesWindow> ws;
        for (const auto& w : windows) ws.push_back(window_from(w));
        return mace::select_basis(ws, k).indices;
      },
      py::arg("windows"), py::arg("k_bases"), "Per-feature basis indices chosen by top-k tallies.");

  m.def(
      "ca_dft",
      [](const mace::Matrix& window, const std::vector<std::vector<std::size_t>>& basis) {
        const auto spec = mace::ca_dft(window_from(window), basis_from(basis, static_cast<std::size_t>(window.cols())));
        return spec.coeffs;
      },
      py::arg("window"), py::arg("basis"));

  m.def(
      "ca_idft",
      [](const std::vector<std::vector<std::complex<double>>>& coeffs,
         const std::vector<std::vector<std::size_t>>& basis, std::size_t window_size) {
        mace::Spectrum s;
        s.coeffs = coeffs;
        return mace::ca_idft(s, basis_from(basis, window_size)).values;
      },
      py::arg("coeffs"), py::arg("basis"), py::arg("window_size"));

  m.def(
      "choose_threshold",
      [](const std::vector<double>& scores, std::optional<std::vector<int>> labels, std::optional<double> q) {
        const auto mode = q ? mace::ThresholdMode::quantile(*q) : mace::ThresholdMode::best_f1();
        return mace::choose_threshold(scores, labels, mode);
      },
      py::arg("scores"), py::arg("labels") = std::nullopt, py::arg("quantile") = std::nullopt);

  m.def("point_adjust", [](const std::vector<int>& p, const std::vector<int>& l) { return mace::point_adjust(p, l); });

  m.def(
      "prf1",
      [](const std::vector<int>& p, const std::vector<int>& l) {
        const auto r = mace::prf1(p, l);
        return py::make_tuple(r.precision, r.recall, r.f1);
      },
      py::arg("predictions"), py::arg("labels"));

  m.def(
      "run",
      [](const std::filesystem::path& config, std::optional<std::filesystem::path> out_dir,
         std::optional<std::uint64_t> seed) {
        auto c = mace::load_config(config);
        if (out_dir) c.out_dir = *out_dir;
        if (seed) c.pipeline.seed = *seed;
        mace::RunReport r;
        {
          py::gil_scoped_release release;
          r = mace::run_experiment(c);
        }
        return report_dict(r);
      },
      py::arg("config"), py::arg("out_dir") = std::nullopt, py::arg("seed") = std::nullopt,
      "Runs preprocess, train, detect and eval for every group of the configured services.");

  auto th = m.def_submodule("theory", "Numerical checks of the amplitude-gap results");
  th.def(
      "bound",
      [](const std::vector<double>& mu, const std::vector<double>& nu, const std::vector<double>& alpha, int gamma) {
        return mace::theory::theorem1_bound({mu, nu}, alpha, gamma);
      },
      py::arg("mu"), py::arg("nu"), py::arg("alpha"), py::arg("gamma"));
  th.def(
      "kl_recon_error",
      [](const std::vector<double>& amplitudes, std::size_t k) {
        return mace::theory::kl_recon_error(mace::theory::NormalizedSpectrum::from_amplitudes(amplitudes), k);
      },
      py::arg("amplitudes"), py::arg("k"));
  th.def(
      "gap",
      [](const std::vector<double>& normal, const std::vector<double>& anomaly, std::size_t k) {
        const auto qn = mace::theory::NormalizedSpectrum::from_amplitudes(normal);
        const auto qa = mace::theory::NormalizedSpectrum::with_reference(anomaly, qn.order);
        return mace::theory::theorem2_gap(qn, qa, k);
      },
      py::arg("normal"), py::arg("anomaly"), py::arg("k"));
  th.def(
      "run_suite",
      [](std::size_t configs, std::size_t samples, std::size_t spectra, std::size_t trials, std::size_t max_n,
         std::uint64_t seed) {
        mace::theory::SuiteOptions o{configs, samples, spectra, trials, max_n, seed};
        std::vector<mace::theory::Verdict> v;
        {
          py::gil_scoped_release release;
          v = mace::theory::run_suite(o);
        }
        py::list out;
        for (const auto& x : v) {
          out.append(py::dict(py::arg("check") = x.check, py::arg("statistic") = x.statistic,
                              py::arg("bound") = x.bound, py::arg("pass") = x.pass));
        }
        return out;
      },
      py::arg("configs") = 1000, py::arg("samples") = 10000, py::arg("spectra") = 50, py::arg("trials") = 10000,
      py::arg("max_n") = 12, py::arg("seed") = 0);
}
