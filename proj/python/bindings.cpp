#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "edoks/color.hpp"
#include "edoks/emd.hpp"
#include "edoks/errors.hpp"
#include "edoks/eval.hpp"
#include "edoks/gabor.hpp"
#include "edoks/image_io.hpp"
#include "edoks/metric.hpp"
#include "edoks/signature.hpp"

namespace py = pybind11;
using namespace edoks;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

RgbImage to_image(const U8Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw InvalidInput("expected an HxWx3 uint8 array");
  RgbImage img(static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0)));
  const std::uint8_t* p = a.data();
  for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = {p[3 * i], p[3 * i + 1], p[3 * i + 2]};
  return img;
}

U8Array from_image(const RgbImage& img) {
  U8Array a({img.height, img.width, std::size_t{3}});
  std::uint8_t* p = a.mutable_data();
  for (std::size_t i = 0; i < img.size(); ++i) {
    p[3 * i] = img.data[i].r;
    p[3 * i + 1] = img.data[i].g;
    p[3 * i + 2] = img.data[i].b;
  }
  return a;
}

GrayImage to_gray(const F64Array& a) {
  if (a.ndim() != 2) throw InvalidInput("expected a 2-D float array");
  GrayImage g(static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0)));
  std::copy(a.data(), a.data() + g.size(), g.data.begin());
  return g;
}

F64Array from_gray(const GrayImage& g) {
  F64Array a({g.height, g.width});
  std::copy(g.data.begin(), g.data.end(), a.mutable_data());
  return a;
}

MetricConfig make_config(double alpha, std::size_t patch_size, double c,
                         const std::optional<std::vector<double>>& scales,
                         const std::optional<std::vector<double>>& orientations, std::size_t jobs) {
  MetricConfig cfg;
  cfg.alpha = alpha;
  cfg.patch_size = patch_size;
  cfg.c = c;
  if (scales) cfg.scales = *scales;
  if (orientations) cfg.orientations = *orientations;
  cfg.jobs = jobs;
  cfg.validate();
  return cfg;
}

py::dict signature_dict(const Signature& s) {
  py::dict d;
  d["centroids"] = s.centroids;
  d["weights"] = s.weights;
  return d;
}

Signature signature_from(const py::dict& d) {
  Signature s;
  s.centroids = d["centroids"].cast<std::vector<std::vector<double>>>();
  s.weights = d["weights"].cast<std::vector<double>>();
  return s;
}

#define EDOKS_CONFIG_ARGS                                                              \
  py::arg("alpha") = 0.5, py::arg("patch_size") = 128, py::arg("c") = 1e-12,           \
      py::arg("scales") = py::none(), py::arg("orientations") = py::none(), py::arg("jobs") = 1

}  // namespace

PYBIND11_MODULE(_edoks, m) {
  m.doc() = "EDOKS perceptual image similarity (texture EMD + Oklab color distance)";

  // Translators run newest first, so subclasses are registered after their base.
  auto invalid = py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", invalid);
  py::register_exception<ConfigError>(m, "ConfigError", invalid);
  py::register_exception<DecodeError>(m, "DecodeError", PyExc_OSError);

  m.def(
      "compare",
      [](const U8Array& x, const U8Array& y, double alpha, std::size_t patch_size, double c,
         const std::optional<std::vector<double>>& scales,
         const std::optional<std::vector<double>>& orientations, std::size_t jobs, bool with_maps) {
        const MetricConfig cfg = make_config(alpha, patch_size, c, scales, orientations, jobs);
        const RgbImage a = to_image(x);
        const RgbImage b = to_image(y);
        MetricReport r;
        {
          py::gil_scoped_release release;
          r = edoks::edoks(a, b, cfg, with_maps);
        }
        py::dict d;
        d["emd"] = r.emd_value;
        d["ok"] = r.ok_value;
        d["edok"] = r.edok_value;
        d["edoks"] = r.edoks_value;
        d["alpha"] = r.alpha;
        d["p"] = r.patch_size;
        d["c"] = r.c;
        d["k_x"] = r.clusters_x;
        d["k_y"] = r.clusters_y;
        d["warnings"] = r.warnings;
        if (r.maps) {
          d["texture_diff"] = from_gray(r.maps->texture_diff);
          d["color_diff"] = from_gray(r.maps->color_diff);
          d["overlay"] = from_gray(r.maps->overlay);
        }
        return d;
      },
      py::arg("x"), py::arg("y"), EDOKS_CONFIG_ARGS, py::arg("with_maps") = false,
      "Full report for two same-size HxWx3 uint8 images.");

  m.def(
      "term_scores",
      [](const U8Array& x, const U8Array& y, std::size_t patch_size,
         const std::optional<std::vector<double>>& scales,
         const std::optional<std::vector<double>>& orientations, std::size_t jobs) {
        const MetricConfig cfg = make_config(0.5, patch_size, 1e-12, scales, orientations, jobs);
        const RgbImage a = to_image(x);
        const RgbImage b = to_image(y);
        py::gil_scoped_release release;
        const TermScores t = edoks::term_scores(a, b, cfg);
        return std::make_pair(t.emd, t.ok);
      },
      py::arg("x"), py::arg("y"), py::arg("patch_size") = 128, py::arg("scales") = py::none(),
      py::arg("orientations") = py::none(), py::arg("jobs") = 1,
      "(emd, ok) before alpha weighting.");

  m.def("combine_edok", &combine_edok, py::arg("alpha"), py::arg("emd"), py::arg("ok"));
  m.def("edoks_from_edok", &edoks_from_edok, py::arg("edok"), py::arg("c") = 1e-12);

  m.def(
      "rgb_to_oklab",
      [](const U8Array& x) {
        const OklabImage lab = edoks::rgb_to_oklab(to_image(x));
        F64Array out({lab.height, lab.width, std::size_t{3}});
        double* p = out.mutable_data();
        for (std::size_t i = 0; i < lab.size(); ++i) {
          p[3 * i] = lab.data[i].L;
          p[3 * i + 1] = lab.data[i].a;
          p[3 * i + 2] = lab.data[i].b;
        }
        return out;
      },
      py::arg("image"));
  m.def(
      "ok_term",
      [](const U8Array& x, const U8Array& y) {
        return edoks::ok_term(edoks::rgb_to_oklab(to_image(x)), edoks::rgb_to_oklab(to_image(y)));
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "delta_e_map",
      [](const U8Array& x, const U8Array& y) {
        return from_gray(edoks::delta_e_map(edoks::rgb_to_oklab(to_image(x)), edoks::rgb_to_oklab(to_image(y))));
      },
      py::arg("x"), py::arg("y"));

  m.def(
      "patch_energy",
      [](const F64Array& patch, const std::optional<std::vector<double>>& scales,
         const std::optional<std::vector<double>>& orientations) {
        const GaborDictionary d = build_dictionary(scales.value_or(default_scales()),
                                                   orientations.value_or(default_orientations()));
        const EnergyMatrix e = edoks::patch_energy(to_gray(patch), d);
        F64Array out({e.rows, e.cols});
        std::copy(e.values.begin(), e.values.end(), out.mutable_data());
        return out;
      },
      py::arg("patch"), py::arg("scales") = py::none(), py::arg("orientations") = py::none(),
      "Normalized scale x orientation energy matrix of a 2-D float patch.");

  m.def(
      "extract_signature",
      [](const U8Array& x, std::size_t patch_size, std::size_t jobs) {
        const GaborDictionary d = build_dictionary(default_scales(), default_orientations());
        return signature_dict(edoks::extract_signature(to_image(x), patch_size, d, {}, jobs));
      },
      py::arg("image"), py::arg("patch_size") = 128, py::arg("jobs") = 1,
      "Signature as {'centroids': [[...]], 'weights': [...]}.");

  m.def(
      "emd",
      [](const py::dict& a, const py::dict& b) {
        const EmdResult r = edoks::emd(signature_from(a), signature_from(b));
        std::vector<std::vector<double>> flow(r.flow.rows, std::vector<double>(r.flow.cols));
        for (std::size_t i = 0; i < r.flow.rows; ++i)
          for (std::size_t j = 0; j < r.flow.cols; ++j) flow[i][j] = r.flow.at(i, j);
        return std::make_pair(r.value, flow);
      },
      py::arg("a"), py::arg("b"), "(value, flow matrix) between two signatures.");

  m.def(
      "load_image", [](const std::filesystem::path& path) { return from_image(edoks::load_image(path).image); },
      py::arg("path"));

  m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) { return edoks::spearman(x, y); });
  m.def("kendall_tau_b", [](const std::vector<double>& x, const std::vector<double>& y) { return edoks::kendall_tau_b(x, y); });
  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) { return edoks::pearson(x, y); });
  m.def(
      "fit_logistic",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const LogisticFit f = edoks::fit_logistic(x, y);
        return py::make_tuple(std::vector<double>(f.beta.begin(), f.beta.end()), f.residual, f.degenerate);
      },
      "(beta, residual, degenerate) of the 5-parameter logistic.");
  m.def(
      "twoafc_accuracy",
      [](const std::vector<double>& s0, const std::vector<double>& s1, const std::vector<double>& h) {
        if (s0.size() != s1.size() || s0.size() != h.size()) throw InvalidInput("length mismatch");
        std::vector<TripletScores> t;
        for (std::size_t i = 0; i < s0.size(); ++i) t.push_back({s0[i], s1[i], h[i]});
        return edoks::twoafc_accuracy(t);
      },
      py::arg("score_p0"), py::arg("score_p1"), py::arg("human_choice"));
  m.def("alpha_grid", &alpha_grid, py::arg("step") = 0.01);
}
