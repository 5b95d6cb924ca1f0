#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "cli.hpp"
#include "lineart/errors.hpp"
#include "lineart/generator.hpp"
#include "lineart/image.hpp"
#include "lineart/losses.hpp"
#include "lineart/metrics.hpp"
#include "lineart/tps.hpp"
#include "lineart/trainer.hpp"

namespace py = pybind11;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

torch::Tensor to_tensor(const FloatArray& a) {
  std::vector<int64_t> shape(a.shape(), a.shape() + a.ndim());
  return torch::from_blob(const_cast<float*>(a.data()), shape, torch::kFloat32).clone();
}

FloatArray to_array(const torch::Tensor& t) {
  const auto c = t.detach().to(torch::kFloat32).contiguous();
  FloatArray out(std::vector<py::ssize_t>(c.sizes().begin(), c.sizes().end()));
  std::memcpy(out.mutable_data(), c.data_ptr<float>(), c.numel() * sizeof(float));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reference-based line-art colorization (libtorch core)";

  static py::exception<lineart::ConfigError> config_error(m, "ConfigError", PyExc_RuntimeError);
  static py::exception<lineart::TrainingDiverged> diverged(m, "TrainingDiverged", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const lineart::ValidationError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const lineart::IoError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    } catch (const lineart::ConfigError& e) {
      config_error(e.what());
    } catch (const lineart::TrainingDiverged& e) {
      diverged(e.what());
    }
  });

  m.def(
      "load_image",
      [](const std::filesystem::path& path, int channels, int size) {
        return to_array(lineart::load_image(path, channels, size));
      },
      py::arg("path"), py::arg("channels") = 3, py::arg("size") = 256,
      "Load an image as a C×H×W float32 array in [-1, 1].");
  m.def(
      "save_image",
      [](const FloatArray& image, const std::filesystem::path& path) {
        lineart::save_image(to_tensor(image), path);
      },
      py::arg("image"), py::arg("path"));
  m.def(
      "tps_warp",
      [](const FloatArray& image, uint64_t seed, int grid, double magnitude) {
        return to_array(lineart::tps_warp(to_tensor(image), lineart::random_tps_params(seed, grid, magnitude)));
      },
      py::arg("image"), py::arg("seed"), py::arg("grid") = 5, py::arg("magnitude") = 0.08,
      "Warp with a seeded random thin-plate spline.");
  m.def(
      "psnr", [](const FloatArray& a, const FloatArray& b) { return lineart::psnr(to_tensor(a), to_tensor(b)); },
      py::arg("a"), py::arg("b"));
  m.def(
      "ms_ssim",
      [](const FloatArray& a, const FloatArray& b) { return lineart::ms_ssim(to_tensor(a), to_tensor(b)); },
      py::arg("a"), py::arg("b"));
  m.def(
      "gram_matrix", [](const FloatArray& f) { return to_array(lineart::gram_matrix(to_tensor(f))); },
      py::arg("features"));
  m.def(
      "total_generator_loss",
      [](double adv, double rec, double perc, double style, double w_adv, double w_rec, double w_perc,
         double w_style) {
        return lineart::total_generator_loss(lineart::LossParts<double>{adv, rec, perc, style},
                                             lineart::LossWeights{w_adv, w_rec, w_perc, w_style});
      },
      py::arg("adv"), py::arg("rec"), py::arg("perc"), py::arg("style"), py::arg("w_adv") = 1.0,
      py::arg("w_rec") = 30.0, py::arg("w_perc") = 0.01, py::arg("w_style") = 50.0);

  py::class_<lineart::Generator>(m, "Generator")
      .def_static(
          "load", [](const std::filesystem::path& path) { return lineart::load_generator(path); }, py::arg("path"))
      .def_property_readonly("image_size", [](lineart::Generator& g) { return g->options().image_size; })
      .def(
          "colorize",
          [](lineart::Generator& g, const FloatArray& line, const FloatArray& reference) {
            const auto l = to_tensor(line), r = to_tensor(reference);
            torch::Tensor out;
            {
              py::gil_scoped_release release;
              out = lineart::generate(g, l, r);
            }
            return to_array(out);
          },
          py::arg("line"), py::arg("reference"))
      .def("__repr__", [](lineart::Generator& g) {
        return "<Generator image_size=" + std::to_string(g->options().image_size) + ">";
      });

  m.def(
      "run_cli", [](const std::vector<std::string>& args) { return lineart::cli::run(args); }, py::arg("args"),
      "Run a command-line subcommand in-process; returns the exit code.");
}
