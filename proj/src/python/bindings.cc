// Copyright 2026 The voxprotect Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings. Waveforms cross the boundary as float64 numpy arrays in
// [0, 1]; genders as "F" / "M".

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <vector>

#include "voxprotect/attack.h"
#include "voxprotect/audio_io.h"
#include "voxprotect/error.h"
#include "voxprotect/features.h"
#include "voxprotect/linmodels.h"
#include "voxprotect/neuralnet.h"
#include "voxprotect/synth.h"

namespace py = pybind11;
namespace vp = voxprotect;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> ToArray(const std::vector<double>& v) {
  return py::array_t<double>(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())},
                             v.data());
}

std::vector<double> FromArray(const Array& a) {
  if (a.ndim() != 1) throw vp::ShapeError("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

vp::FeatureMatrix MatrixFrom(const Array& a) {
  if (a.ndim() != 2) throw vp::ShapeError("expected a 2-D array");
  const auto r = a.unchecked<2>();
  vp::FeatureMatrix x(static_cast<std::size_t>(r.shape(0)),
                      std::vector<double>(static_cast<std::size_t>(r.shape(1))));
  for (py::ssize_t i = 0; i < r.shape(0); ++i) {
    for (py::ssize_t j = 0; j < r.shape(1); ++j) x[i][j] = r(i, j);
  }
  return x;
}

std::string Code(const std::optional<vp::Gender>& g) {
  return g ? std::string(1, vp::GenderCode(*g)) : std::string();
}

vp::Waveform WaveFrom(const Array& samples, const std::string& gender,
                      const std::string& source_id) {
  vp::Waveform w;
  w.samples = FromArray(samples);
  if (!gender.empty()) w.gender = vp::ParseGender(gender);
  w.source_id = source_id;
  return w;
}

py::dict WaveDict(const vp::Waveform& w) {
  py::dict d;
  d["samples"] = ToArray(w.samples);
  d["source_id"] = w.source_id;
  d["speaker_id"] = w.speaker_id;
  d["gender"] = Code(w.gender);
  d["tags"] = std::vector<std::string>(w.tags.begin(), w.tags.end());
  return d;
}

py::dict FeatureDict(const vp::FeatureVector& v) {
  py::dict d;
  for (int i = 0; i < vp::kNumFeatures; ++i) d[py::str(vp::FeatureName(i))] = v.values[i];
  d["flags"] = vp::FormatFlags(v.flags);
  return d;
}

// Eval-mode CNN shared between Python objects and PGD.
struct Cnn {
  std::shared_ptr<const vp::M5<float>> model;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "voxprotect native core";

  auto error = py::register_exception<vp::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<vp::ConfigError>(m, "ConfigError", error.ptr());
  auto data = py::register_exception<vp::DataError>(m, "DataError", error.ptr());
  py::register_exception<vp::NumericError>(m, "NumericError", error.ptr());
  py::register_exception<vp::ModeError>(m, "ModeError", error.ptr());
  py::register_exception<vp::FormatError>(m, "FormatError", data.ptr());
  py::register_exception<vp::EmptyInputError>(m, "EmptyInputError", data.ptr());
  py::register_exception<vp::RateError>(m, "RateError", data.ptr());
  py::register_exception<vp::ShapeError>(m, "ShapeError", data.ptr());

  m.attr("SAMPLE_RATE_HZ") = vp::kSampleRateHz;

  // ---- audio ----
  m.def("load_wav", [](const std::string& path, bool affine) {
    return WaveDict(vp::LoadWav(path, affine ? vp::WavScaling::kAffine : vp::WavScaling::kMinMax));
  }, py::arg("path"), py::arg("affine") = false);
  m.def("load_corpus", [](const std::string& manifest) {
    py::list out;
    for (const auto& w : vp::LoadCorpus(manifest)) out.append(WaveDict(w));
    return out;
  }, py::arg("manifest"));

  // ---- synthesis ----
  m.def("synth_voice",
        [](double f0_hz, double duration_s, double jitter, double shimmer, double noise,
           const std::string& pulse_shape, std::uint64_t seed) {
          vp::SynthSpec s;
          s.f0_hz = f0_hz;
          s.duration_s = duration_s;
          s.jitter_frac = jitter;
          s.shimmer_frac = shimmer;
          s.noise_rms_frac = noise;
          if (pulse_shape == "impulse") {
            s.pulse_shape = vp::PulseShape::kImpulse;
          } else if (pulse_shape != "rosenberg") {
            throw vp::ConfigError("pulse_shape must be 'rosenberg' or 'impulse'");
          }
          std::mt19937_64 rng(seed);
          return ToArray(vp::SynthVoice(s, rng).samples);
        },
        py::arg("f0_hz") = 120.0, py::arg("duration_s") = 1.0, py::arg("jitter") = 0.0,
        py::arg("shimmer") = 0.0, py::arg("noise") = 0.0, py::arg("pulse_shape") = "rosenberg",
        py::arg("seed") = 1);
  m.def("make_corpus",
        [](int n_per_gender, double duration_s, std::uint64_t seed, const std::string& adaptation,
           const std::string& id_prefix) {
          vp::CorpusSpec s;
          s.n_per_gender = n_per_gender;
          s.duration_s = duration_s;
          s.seed = seed;
          s.adaptation = adaptation;
          s.id_prefix = id_prefix;
          py::list out;
          for (const auto& w : vp::MakeCorpus(s).waves) out.append(WaveDict(w));
          return out;
        },
        py::arg("n_per_gender") = 10, py::arg("duration_s") = 6.0, py::arg("seed") = 1,
        py::arg("adaptation") = "default", py::arg("id_prefix") = "");

  // ---- features ----
  m.def("feature_names", [] {
    std::vector<std::string> names;
    for (auto n : vp::FeatureNames()) names.emplace_back(n);
    return names;
  });
  m.def("extract_features", [](const Array& samples) {
    vp::Waveform w;
    w.samples = FromArray(samples);
    return FeatureDict(vp::ExtractAll(w, vp::PitchConfig{}));
  }, py::arg("samples"));

  // ---- linear models ----
  py::class_<vp::LinearModel>(m, "LinearModel")
      .def_property_readonly("model_id", [](const vp::LinearModel& lm) { return lm.model_id; })
      .def_property_readonly("kind",
                             [](const vp::LinearModel& lm) { return vp::ModelKindName(lm.kind); })
      .def_property_readonly("weights", [](const vp::LinearModel& lm) { return lm.weights; })
      .def_property_readonly("bias", [](const vp::LinearModel& lm) { return lm.bias; })
      .def_property_readonly("feature_subset",
                             [](const vp::LinearModel& lm) { return lm.feature_subset; })
      .def("decision_function", [](const vp::LinearModel& lm, const Array& x) {
        std::vector<double> s;
        for (const auto& row : MatrixFrom(x)) s.push_back(vp::Predict(lm, row).score);
        return ToArray(s);
      })
      .def("predict", [](const vp::LinearModel& lm, const Array& x) {
        std::vector<std::string> out;
        for (const auto& row : MatrixFrom(x)) {
          out.emplace_back(1, vp::GenderCode(vp::Predict(lm, row).label));
        }
        return out;
      })
      .def("to_json", [](const vp::LinearModel& lm) { return vp::SerializeModel(lm); })
      .def_static("from_json", [](const std::string& s) { return vp::DeserializeModel(s); });

  m.def("train_svm", [](const Array& x, const std::vector<int>& y, double c, std::uint64_t seed,
                        std::vector<int> subset) {
    vp::SvmOptions opt;
    opt.c = c;
    opt.seed = seed;
    return vp::TrainLinearSvm(MatrixFrom(x), y, opt, std::move(subset));
  }, py::arg("x"), py::arg("y"), py::arg("c") = 1.0, py::arg("seed") = 1,
     py::arg("subset") = std::vector<int>{});
  m.def("svm_rfe", [](const Array& x, const std::vector<int>& y, std::size_t n, double c,
                      std::uint64_t seed) {
    vp::SvmOptions opt;
    opt.c = c;
    opt.seed = seed;
    const vp::RfeRanking r = vp::SvmRfe(MatrixFrom(x), y, n, opt);
    py::dict d;
    d["top_n"] = r.top_n;
    d["elimination_order"] = r.elimination_order;
    return d;
  }, py::arg("x"), py::arg("y"), py::arg("n"), py::arg("c") = 1.0, py::arg("seed") = 1);
  m.def("train_ridge", [](const Array& x, const std::vector<int>& y, int column, double lambda) {
    return vp::TrainRidgeSingle(MatrixFrom(x), y, column, lambda);
  }, py::arg("x"), py::arg("y"), py::arg("column"), py::arg("lam") = 1.0);

  // ---- CNN and attack ----
  py::class_<Cnn>(m, "Cnn")
      .def(py::init([](std::uint64_t seed, bool desk_scale) {
        vp::M5Config cfg;
        cfg.desk_scale = desk_scale;
        vp::M5<float> net(cfg, seed);
        net.SetMode(vp::Mode::kEval);
        net.model_id = vp::ContentId(net);
        return Cnn{std::make_shared<const vp::M5<float>>(std::move(net))};
      }), py::arg("seed") = 1, py::arg("desk_scale") = true)
      .def_static("load", [](const std::string& path) {
        return Cnn{std::make_shared<const vp::M5<float>>(vp::LoadCheckpoint(path))};
      })
      .def("save",
           [](const Cnn& c, const std::string& path) { vp::SaveCheckpoint(path, *c.model); })
      .def_property_readonly("model_id", [](const Cnn& c) { return c.model->model_id; })
      .def_property_readonly("min_input_length",
                             [](const Cnn& c) { return c.model->config().MinInputLength(); })
      .def("logits", [](const Cnn& c, const std::vector<Array>& batch) {
        std::vector<std::vector<double>> rows;
        for (const auto& a : batch) rows.push_back(FromArray(a));
        const vp::M5Differentiable<float> d(c.model);
        py::list out;
        for (const auto& l : d.Logits(rows)) out.append(py::make_tuple(l[0], l[1]));
        return out;
      });

  m.def("pgd_perturb",
        [](const Cnn& c, const std::vector<Array>& waves, const std::vector<std::string>& genders,
           double alpha, int iterations, double epsilon, double segment_s, bool targeted) {
          if (waves.size() != genders.size()) {
            throw vp::ShapeError("waves and genders differ in length");
          }
          std::vector<vp::Waveform> in;
          for (std::size_t i = 0; i < waves.size(); ++i) {
            in.push_back(WaveFrom(waves[i], genders[i], "py" + std::to_string(i)));
          }
          vp::PgdConfig cfg;
          cfg.alpha = alpha;
          cfg.iterations = iterations;
          cfg.epsilon = epsilon;
          cfg.segment_s = segment_s;
          cfg.targeted = targeted;
          const vp::M5Differentiable<float> ref(c.model);
          py::list out;
          for (const auto& r : vp::PgdPerturbBatch(ref, in, cfg)) {
            py::dict d;
            d["samples"] = ToArray(r.adversarial.samples);
            d["delta_linf"] = r.delta_linf;
            d["delta_l2"] = r.delta_l2;
            d["loss_trace"] = r.loss_trace;
            out.append(d);
          }
          return out;
        },
        py::arg("cnn"), py::arg("waves"), py::arg("genders"), py::arg("alpha") = 0.0005,
        py::arg("iterations") = 100, py::arg("epsilon") = 0.1, py::arg("segment_s") = 6.0,
        py::arg("targeted") = false);
}
