#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "medsr/bench.hpp"
#include "medsr/degrade.hpp"
#include "medsr/error.hpp"
#include "medsr/io.hpp"
#include "medsr/metrics.hpp"
#include "medsr/models.hpp"
#include "medsr/resample.hpp"

namespace py = pybind11;
using medsr::Image;

namespace {

using Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

Image to_image(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array (height, width)");
  const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  if (h < 1 || w < 1) throw py::value_error("image must be at least 1x1");
  return Image(w, h, std::vector<float>(a.data(), a.data() + a.size()));
}

Array to_array(const Image& img) {
  Array out({img.height(), img.width()});
  std::copy(img.data().begin(), img.data().end(), out.mutable_data());
  return out;
}

py::dict weights_to_dict(const medsr::ModelWeights& w) {
  py::dict d;
  for (const auto& [name, t] : w.entries()) {
    std::vector<py::ssize_t> shape(t.dims().begin(), t.dims().end());
    Array a(shape);
    std::copy(t.data().begin(), t.data().end(), a.mutable_data());
    d[py::str(name)] = a;
  }
  return d;
}

medsr::ModelWeights dict_to_weights(const py::dict& d) {
  medsr::ModelWeights w;
  for (const auto& [key, value] : d) {
    const Array a = py::cast<Array>(value);
    std::vector<int> dims(a.shape(), a.shape() + a.ndim());
    w.add(py::cast<std::string>(key), medsr::Tensor(dims, std::vector<float>(a.data(), a.data() + a.size())));
  }
  return w;
}

const char* kind_name(medsr::ErrorKind kind) {
  switch (kind) {
    case medsr::ErrorKind::usage: return "usage";
    case medsr::ErrorKind::format: return "format";
    case medsr::ErrorKind::io: return "io";
    case medsr::ErrorKind::shape: return "shape";
    case medsr::ErrorKind::precondition: return "precondition";
    case medsr::ErrorKind::config: return "config";
    case medsr::ErrorKind::degradation: return "degradation";
    case medsr::ErrorKind::model: return "model";
  }
  return "error";
}

py::dict report_to_dict(const medsr::metrics::MetricReport& r) {
  py::dict d;
  for (const auto& v : r.values) d[py::str(v.name)] = v.value;
  return d;
}

}  // namespace

PYBIND11_MODULE(_medsr, m) {
  m.doc() = "Medical image super-resolution toolkit";

  static py::exception<medsr::Error> error(m, "MedsrError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const medsr::Error& e) {
      py::object instance = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      instance.attr("kind") = kind_name(e.kind());
      PyErr_SetObject(error.ptr(), instance.ptr());
    }
  });

  m.def("load_image", [](const std::filesystem::path& p) { return to_array(medsr::load_image(p)); }, py::arg("path"));
  m.def("save_image", [](const Array& a, const std::filesystem::path& p) { medsr::save_image(to_image(a), p); },
        py::arg("image"), py::arg("path"));

  m.def(
      "resample",
      [](const Array& a, int out_w, int out_h, const std::string& kernel, bool antialias) {
        return to_array(medsr::resample(to_image(a), out_w, out_h, medsr::parse_resample_kernel(kernel), antialias));
      },
      py::arg("image"), py::arg("out_w"), py::arg("out_h"), py::arg("kernel") = "bicubic",
      py::arg("antialias") = true);

  m.def(
      "degrade",
      [](const Array& a, int scale, const std::string& profile, double blur_sigma, double noise_sigma,
         std::optional<int> quality, std::uint64_t seed) {
        medsr::DegradationSpec spec;
        spec.profile = medsr::parse_profile(profile);
        spec.scale = scale;
        spec.blur_sigma = blur_sigma;
        spec.noise_sigma = noise_sigma;
        spec.compression_quality = quality;
        spec.seed = seed;
        return to_array(medsr::degrade(to_image(a), spec));
      },
      py::arg("image"), py::arg("scale") = 2, py::arg("profile") = "classical", py::arg("blur_sigma") = 0.0,
      py::arg("noise_sigma") = 0.0, py::arg("compression_quality") = py::none(), py::arg("seed") = 0);

  namespace mt = medsr::metrics;
  auto pair_metric = [&m](const char* name, double (*fn)(const Image&, const Image&)) {
    m.def(name, [fn](const Array& ref, const Array& x) { return fn(to_image(ref), to_image(x)); }, py::arg("ref"),
          py::arg("x"));
  };
  pair_metric("psnr", mt::psnr);
  pair_metric("ssim", mt::ssim);
  pair_metric("fsim", mt::fsim);
  pair_metric("vif", mt::vif);
  pair_metric("lpips_proxy", mt::lpips_proxy);
  pair_metric("odi", mt::odi);
  auto single_metric = [&m](const char* name, double (*fn)(const Image&)) {
    m.def(name, [fn](const Array& x) { return fn(to_image(x)); }, py::arg("x"));
  };
  single_metric("tenengrad", mt::tenengrad);
  single_metric("laplacian_variance", mt::laplacian_variance);
  single_metric("brenner", mt::brenner);

  m.def(
      "evaluate",
      [](const Array& ref, const Array& x, std::optional<std::vector<std::string>> names) {
        const Image r = to_image(ref), t = to_image(x);
        return report_to_dict(names ? mt::evaluate(r, t, *names) : mt::evaluate_all(r, t));
      },
      py::arg("ref"), py::arg("x"), py::arg("metrics") = py::none());
  m.def("metric_names", [] {
    std::vector<std::string> names;
    for (const auto& info : mt::registry()) names.emplace_back(info.name);
    return names;
  });

  m.def(
      "init_weights",
      [](const std::string& model, int scale, std::uint64_t seed) {
        return weights_to_dict(medsr::models::init_weights(medsr::models::parse_model_kind(model), scale, seed));
      },
      py::arg("model"), py::arg("scale") = 2, py::arg("seed") = 0);
  m.def("load_weights", [](const std::filesystem::path& p) { return weights_to_dict(medsr::load_weights(p)); },
        py::arg("path"));
  m.def("save_weights", [](const py::dict& d, const std::filesystem::path& p) { medsr::save_weights(dict_to_weights(d), p); },
        py::arg("weights"), py::arg("path"));

  m.def(
      "upscale",
      [](const Array& lr, const std::string& model, int scale, std::optional<py::dict> weights) {
        const auto kind = medsr::models::parse_model_kind(model);
        std::optional<medsr::ModelWeights> w;
        if (weights) w = dict_to_weights(*weights);
        return to_array(medsr::models::upscale(to_image(lr), kind, w ? &*w : nullptr, scale));
      },
      py::arg("lr"), py::arg("model") = "bicubic", py::arg("scale") = 2, py::arg("weights") = py::none());

  m.def(
      "bench",
      [](const std::filesystem::path& config) {
        const auto cfg = medsr::bench::load_bench_config(config);
        const auto run = medsr::bench::run_bench(cfg);
        medsr::bench::write_outputs(run, cfg);
        return cfg.resolve(cfg.output_dir);
      },
      py::arg("config"));
}
