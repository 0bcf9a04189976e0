#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "roi/loo.hpp"
#include "roi/phantom.hpp"
#include "roi/random.hpp"

namespace py = pybind11;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

roi::GrayImage to_image(const U8Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D uint8 array");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  std::vector<std::uint8_t> data(a.data(), a.data() + a.size());
  return roi::GrayImage(w, h, std::move(data));
}

U8Array to_array(const roi::GrayImage& img) {
  U8Array out({img.height(), img.width()});
  std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
  return out;
}

py::array_t<bool> mask_to_array(const roi::Mask& m) {
  py::array_t<bool> out({m.height, m.width});
  auto r = out.mutable_unchecked<2>();
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) r(y, x) = m.at(x, y);
  return out;
}

roi::Mask array_to_mask(const py::array_t<bool, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D boolean array");
  roi::Mask m(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  auto r = a.unchecked<2>();
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) m.set(x, y, r(y, x));
  return m;
}

roi::PipelineConfig config_from(const std::string& json_text) {
  roi::PipelineConfig cfg;
  if (!json_text.empty()) roi::config_from_json(nlohmann::json::parse(json_text), cfg);
  cfg.validate();
  return cfg;
}

template <class T, class F>
std::vector<T> parse_all(const std::vector<std::string>& names, F parse) {
  std::vector<T> out;
  for (const auto& n : names) out.push_back(parse(n));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Click-seeded tumour ROI ellipses from keypoint classification";

  py::register_exception<roi::DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<roi::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("load_image", [](const std::string& path) { return to_array(roi::load_image(path)); }, py::arg("path"));
  m.def("save_image", [](const U8Array& img, const std::string& path) { roi::save_image(to_image(img), path); },
        py::arg("image"), py::arg("path"));

  m.def("fuzzy_hyperbolize",
        [](const U8Array& img, double beta) { return to_array(roi::fuzzy_hyperbolize(to_image(img), beta)); },
        py::arg("image"), py::arg("beta") = 1.0);
  m.def("median3", [](const U8Array& img) { return to_array(roi::median3(to_image(img))); }, py::arg("image"));
  m.def(
      "preprocess",
      [](const U8Array& img, double beta, bool fhh, bool median) {
        roi::PreprocessParams p;
        p.beta = beta;
        p.enable_fhh = fhh;
        p.enable_median = median;
        p.validate();
        return to_array(roi::preprocess(to_image(img), p));
      },
      py::arg("image"), py::arg("beta") = 1.0, py::arg("fhh") = true, py::arg("median") = true);

  m.def(
      "detect",
      [](const U8Array& img, const std::string& features, const std::string& config_json) {
        const roi::PipelineConfig cfg = config_from(config_json);
        const roi::PreparedImage p = roi::prepare_image(to_image(img), roi::parse_feature_kind(features), cfg);
        py::list kps;
        std::size_t dim = p.features.empty() ? 0 : p.features.front().desc.values.size();
        py::array_t<double> desc({p.features.size(), dim});
        auto d = desc.mutable_unchecked<2>();
        for (std::size_t i = 0; i < p.features.size(); ++i) {
          const auto& k = p.features[i].kp;
          kps.append(py::dict(py::arg("x") = k.x, py::arg("y") = k.y, py::arg("scale") = k.scale,
                              py::arg("response") = k.response, py::arg("orientation") = k.orientation));
          for (std::size_t j = 0; j < dim; ++j) d(i, j) = p.features[i].desc.values[j];
        }
        return py::make_tuple(kps, desc);
      },
      py::arg("image"), py::arg("features") = "surf", py::arg("config_json") = "",
      "Preprocesses and detects; returns (keypoints, descriptors).");

  m.def(
      "generate_phantom",
      [](std::uint64_t seed, double contrast, int width, int height) {
        roi::PhantomParams p;
        p.seed = seed;
        p.contrast = contrast;
        p.width = width;
        p.height = height;
        const roi::Phantom ph = roi::generate_phantom(p);
        return py::make_tuple(to_array(ph.image), mask_to_array(ph.mask), roi::to_json(ph.lesion).dump());
      },
      py::arg("seed"), py::arg("contrast") = 60.0, py::arg("width") = 256, py::arg("height") = 256);
  m.def(
      "write_phantoms",
      [](const std::string& out, int count, std::uint64_t seed) { roi::write_phantom_suite(out, count, seed); },
      py::arg("out"), py::arg("count") = 33, py::arg("seed") = 7);

  m.def(
      "fit_ellipse",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& pts) {
        if (pts.ndim() != 2 || pts.shape(1) != 2) throw std::invalid_argument("expected an (n, 2) array");
        std::vector<roi::Point2> v;
        auto r = pts.unchecked<2>();
        for (py::ssize_t i = 0; i < pts.shape(0); ++i) v.push_back({r(i, 0), r(i, 1)});
        return roi::to_json(roi::fit_ellipse(v)).dump();
      },
      py::arg("points"));
  m.def(
      "rasterize",
      [](const std::string& ellipse_json, int width, int height) {
        return mask_to_array(roi::rasterize(roi::ellipse_from_json(nlohmann::json::parse(ellipse_json)), width, height));
      },
      py::arg("ellipse_json"), py::arg("width"), py::arg("height"));
  m.def(
      "dice",
      [](const py::array_t<bool, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<bool, py::array::c_style | py::array::forcecast>& b) {
        return roi::dice(array_to_mask(a), array_to_mask(b)).value;
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "segment",
      [](const U8Array& img, double cx, double cy, const std::string& features, const std::string& classifier,
         const std::string& model_path, std::uint64_t seed, const std::string& config_json) {
        const roi::PipelineConfig cfg = config_from(config_json);
        std::optional<roi::TrainedModel> model;
        if (!model_path.empty()) model = roi::load_model(model_path);
        const auto ck = roi::parse_classifier_kind(classifier);
        auto fk = roi::parse_feature_kind(features);
        if (ck == roi::ClassifierKind::svm && !model) throw roi::ConfigError("the svm classifier needs a model");
        const roi::TrainedModel* mp = model ? &*model : nullptr;
        const roi::GrayImage image = to_image(img);
        const auto s = roi::segment_image(image, {cx, cy, roi::SeedPoint::Source::user_click}, fk, ck, mp, cfg, seed);
        if (mp && ck == roi::ClassifierKind::svm) fk = mp->features;
        return roi::segmentation_to_json(s, fk, ck, std::nullopt).dump();
      },
      py::arg("image"), py::arg("cx"), py::arg("cy"), py::arg("features") = "surf", py::arg("classifier") = "kmeans",
      py::arg("model_path") = "", py::arg("seed") = 42, py::arg("config_json") = "");

  m.def(
      "train",
      [](const std::string& data, const std::string& features, const std::string& out, std::uint64_t seed,
         const std::string& config_json) {
        const roi::PipelineConfig cfg = config_from(config_json);
        const auto kind = roi::parse_feature_kind(features);
        roi::LooOptions opt;
        opt.master_seed = seed;
        const auto records = roi::load_records(roi::load_dataset(data), cfg, opt);
        std::vector<roi::PreparedImage> prepared;
        prepared.reserve(records.size());
        for (const auto& r : records) prepared.push_back(roi::prepare_image(r.image, kind, cfg));
        std::vector<roi::TrainingItem> items;
        for (std::size_t i = 0; i < records.size(); ++i)
          items.push_back({records[i].record.id, &prepared[i], &records[i].truth, records[i].seed});
        py::gil_scoped_release release;
        roi::save_model(roi::train_model(items, kind, cfg, roi::derive_seed(seed, "model/train")), out);
      },
      py::arg("data"), py::arg("features"), py::arg("out"), py::arg("seed") = 42, py::arg("config_json") = "");

  m.def(
      "evaluate",
      [](const std::string& data, const std::vector<std::string>& features,
         const std::vector<std::string>& classifiers, std::uint64_t seed, int workers, const std::string& config_json) {
        const roi::PipelineConfig cfg = config_from(config_json);
        const auto fk = parse_all<roi::FeatureKind>(features, roi::parse_feature_kind);
        const auto ck = parse_all<roi::ClassifierKind>(classifiers, roi::parse_classifier_kind);
        roi::LooOptions opt;
        opt.master_seed = seed;
        opt.workers = workers;
        const roi::Dataset ds = roi::load_dataset(data);
        roi::EvalReport report;
        {
          py::gil_scoped_release release;
          report = roi::run_evaluation(ds, fk, ck, cfg, opt);
        }
        return roi::report_to_json(report).dump();
      },
      py::arg("data"), py::arg("features") = std::vector<std::string>{"surf"},
      py::arg("classifiers") = std::vector<std::string>{"svm"}, py::arg("seed") = 42, py::arg("workers") = 1,
      py::arg("config_json") = "");

  m.def("derive_seed", &roi::derive_seed, py::arg("master"), py::arg("id"));
}
