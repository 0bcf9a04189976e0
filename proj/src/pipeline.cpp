#include "roi/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <optional>

#include "roi/random.hpp"

namespace roi {

using nlohmann::json;

std::string_view to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::svm: return "svm";
    case ClassifierKind::kmeans: return "kmeans";
    case ClassifierKind::fcm: return "fcm";
  }
  return "?";
}

ClassifierKind parse_classifier_kind(std::string_view name) {
  if (name == "svm") return ClassifierKind::svm;
  if (name == "kmeans") return ClassifierKind::kmeans;
  if (name == "fcm") return ClassifierKind::fcm;
  throw ConfigError("unknown classifier '" + std::string(name) + "' (expected svm, kmeans or fcm)");
}

void PipelineConfig::validate() const {
  preprocess.validate();
  detector.validate();
  if (!(svm.C > 0.0)) throw ConfigError("svm C must be > 0");
  if (svm.gamma < 0.0) throw ConfigError("svm gamma must be >= 0");
  if (jitter < 0.0 || jitter > 1.0) throw ConfigError("jitter must be in [0, 1]");
  if (outlier_percentile <= 0.0 || outlier_percentile > 100.0) throw ConfigError("outlier percentile must be in (0, 100]");
  if (!(fcm_fuzzifier > 1.0)) throw ConfigError("fcm fuzzifier must be > 1");
  if (max_train_points < 2) throw ConfigError("max_train_points must be >= 2");
}

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

PreparedImage prepare_image(const GrayImage& raw, FeatureKind kind, const PipelineConfig& cfg) {
  require_pipeline_size(raw);
  const GrayImage img = preprocess(raw, cfg.preprocess);
  return {img.width(), img.height(), detect_features(img, kind, cfg.detector)};
}

TrainedModel train_model(std::span<const TrainingItem> items, FeatureKind kind, const PipelineConfig& cfg,
                         std::uint64_t seed) {
  cfg.validate();
  if (items.empty()) throw DataError("no training images");
  TrainedModel tm;
  tm.features = kind;
  tm.use_distance = cfg.use_distance;
  tm.preprocess = cfg.preprocess;
  tm.detector = cfg.detector;

  std::vector<const GroundTruth*> truths;
  for (const auto& it : items) {
    truths.push_back(it.truth);
    tm.training_ids.push_back(it.id);
  }
  tm.aspect = aspect_stats(truths);

  FeatureMatrix train;
  for (const auto& it : items) {
    FeatureMatrix m = build_matrix(it.prepared->features, it.seed, tm.aspect, cfg.use_distance);
    m.labels = label_points(m.xs, m.ys, *it.truth);
    append_rows(train, m);
  }
  if (train.rows > cfg.max_train_points) {
    std::vector<std::size_t> idx(train.rows);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(splitmix64(seed ^ 0x7261696e));
    for (std::size_t k = 0; k < cfg.max_train_points; ++k)
      std::swap(idx[k], idx[k + rng.below(idx.size() - k)]);
    idx.resize(cfg.max_train_points);
    std::sort(idx.begin(), idx.end());
    train = select_rows(train, idx);
  }
  if (train.rows == 0) throw DataError("degenerate training set: no keypoints in training images");
  tm.scaler = fit_scaler(train);
  tm.scaler.apply(train);
  SvmParams params = cfg.svm;
  if (cfg.grid_search) params = svm_grid_search(train, params, splitmix64(seed ^ 0x67726964));
  tm.svm = svm_train(train, params);
  return tm;
}

Segmentation segment_prepared(const PreparedImage& img, const SeedPoint& seed, ClassifierKind classifier,
                              const TrainedModel* model, const AspectStats& aspect, const PipelineConfig& cfg,
                              std::uint64_t cluster_seed) {
  const auto t0 = std::chrono::steady_clock::now();
  Segmentation s;
  s.keypoints.reserve(img.features.size());
  for (const auto& f : img.features) s.keypoints.push_back(f.kp);

  FeatureMatrix X;
  switch (classifier) {
    case ClassifierKind::svm: {
      if (!model) throw ConfigError("the svm classifier needs a trained model");
      X = build_matrix(img.features, seed, model->aspect, model->use_distance);
      if (X.rows > 0) model->scaler.apply(X);
      s.labels = svm_predict(model->svm, X);
      break;
    }
    case ClassifierKind::kmeans:
    case ClassifierKind::fcm: {
      X = build_matrix(img.features, seed, aspect, cfg.use_distance);
      if (X.rows < 2) throw InsufficientEvidence();
      const ClusterModel cm = classifier == ClassifierKind::kmeans
                                  ? kmeans_fit(X, 2, cluster_seed)
                                  : fcm_fit(X, 2, cfg.fcm_fuzzifier, cluster_seed).model;
      s.labels = clusters_to_labels(cm, X);
      break;
    }
  }
  s.predict_ms = ms_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  std::vector<Point2> pts;
  std::vector<double> dist;
  for (std::size_t i = 0; i < s.keypoints.size(); ++i) {
    if (s.labels[i] != Label::tumour) continue;
    s.tumour.push_back(s.keypoints[i]);
    pts.push_back({s.keypoints[i].x + 0.5, s.keypoints[i].y + 0.5});
    dist.push_back(X.distance[i]);
  }
  if (cfg.outlier_filter) pts = filter_outliers(pts, dist, cfg.outlier_percentile);
  s.ellipse = clamp_to_image(fit_ellipse(pts), img.width, img.height);
  s.ellipsify_ms = ms_since(t1);
  return s;
}

PipelineConfig effective_config(const PipelineConfig& cfg, const TrainedModel* model) {
  PipelineConfig eff = cfg;
  if (model) {
    eff.preprocess = model->preprocess;
    eff.detector = model->detector;
  }
  eff.validate();
  return eff;
}

Segmentation segment_image(const GrayImage& raw, const SeedPoint& seed, FeatureKind features,
                           ClassifierKind classifier, const TrainedModel* model, const PipelineConfig& cfg,
                           std::uint64_t cluster_seed) {
  const PipelineConfig eff = effective_config(cfg, model);
  if (model && classifier == ClassifierKind::svm) features = model->features;
  if (!(seed.x >= 0 && seed.y >= 0 && seed.x < raw.width() && seed.y < raw.height()))
    throw ConfigError("click is outside the image");
  const PreparedImage prep = prepare_image(raw, features, eff);
  const AspectStats aspect = model ? model->aspect : AspectStats{};
  return segment_prepared(prep, seed, classifier, model, aspect, eff, cluster_seed);
}

// ---------------------------------------------------------------------------
// JSON

json to_json(const Keypoint& k) {
  return {{"x", k.x}, {"y", k.y}, {"scale", k.scale}, {"response", k.response}, {"orientation", k.orientation}};
}

json to_json(const EllipseROI& e) { return {{"cx", e.cx}, {"cy", e.cy}, {"rx", e.rx}, {"ry", e.ry}}; }

json to_json(const DiceScore& d) {
  return {{"value", d.value}, {"area_e", d.area_e}, {"area_g", d.area_g}, {"area_overlap", d.area_overlap}};
}

json segmentation_to_json(const Segmentation& seg, FeatureKind features, ClassifierKind classifier,
                          const std::optional<DiceScore>& score) {
  json tumour = json::array();
  for (const auto& k : seg.tumour) tumour.push_back(to_json(k));
  json out = {{"ellipse", to_json(seg.ellipse)},
              {"tumour_keypoints", std::move(tumour)},
              {"keypoint_count", seg.keypoints.size()},
              {"features", to_string(features)},
              {"classifier", to_string(classifier)}};
  if (score) out["dice"] = to_json(*score);
  return out;
}

EllipseROI ellipse_from_json(const json& j) {
  return {j.at("cx").get<double>(), j.at("cy").get<double>(), j.at("rx").get<double>(), j.at("ry").get<double>(),
          false};
}

namespace {

json preprocess_json(const PreprocessParams& p) {
  return {{"beta", p.beta}, {"enable_fhh", p.enable_fhh}, {"enable_median", p.enable_median}};
}

void preprocess_from(const json& j, PreprocessParams& p) {
  p.beta = j.value("beta", p.beta);
  p.enable_fhh = j.value("enable_fhh", p.enable_fhh);
  p.enable_median = j.value("enable_median", p.enable_median);
}

json detector_json(const DetectorConfig& d) {
  return {{"fast_threshold", d.fast_threshold},
          {"fast_arc", d.fast_arc},
          {"surf_hessian_threshold", d.surf_hessian_threshold},
          {"surf_octaves", d.surf_octaves},
          {"brisk_threshold", d.brisk_threshold},
          {"brisk_octaves", d.brisk_octaves},
          {"max_keypoints", d.max_keypoints}};
}

void detector_from(const json& j, DetectorConfig& d) {
  d.fast_threshold = j.value("fast_threshold", d.fast_threshold);
  d.fast_arc = j.value("fast_arc", d.fast_arc);
  d.surf_hessian_threshold = j.value("surf_hessian_threshold", d.surf_hessian_threshold);
  d.surf_octaves = j.value("surf_octaves", d.surf_octaves);
  d.brisk_threshold = j.value("brisk_threshold", d.brisk_threshold);
  d.brisk_octaves = j.value("brisk_octaves", d.brisk_octaves);
  d.max_keypoints = j.value("max_keypoints", d.max_keypoints);
}

}  // namespace

json config_to_json(const PipelineConfig& c) {
  return {{"preprocess", preprocess_json(c.preprocess)},
          {"detector", detector_json(c.detector)},
          {"svm",
           {{"C", c.svm.C},
            {"gamma", c.svm.gamma},
            {"class_weighting", c.svm.class_weighting},
            {"tolerance", c.svm.tolerance}}},
          {"grid_search", c.grid_search},
          {"use_distance", c.use_distance},
          {"jitter", c.jitter},
          {"outlier_filter", c.outlier_filter},
          {"outlier_percentile", c.outlier_percentile},
          {"fcm_fuzzifier", c.fcm_fuzzifier},
          {"max_train_points", c.max_train_points}};
}

void config_from_json(const json& j, PipelineConfig& c) {
  try {
    if (j.contains("preprocess")) preprocess_from(j.at("preprocess"), c.preprocess);
    if (j.contains("detector")) detector_from(j.at("detector"), c.detector);
    if (j.contains("svm")) {
      const auto& s = j.at("svm");
      c.svm.C = s.value("C", c.svm.C);
      c.svm.gamma = s.value("gamma", c.svm.gamma);
      c.svm.class_weighting = s.value("class_weighting", c.svm.class_weighting);
      c.svm.tolerance = s.value("tolerance", c.svm.tolerance);
    }
    c.grid_search = j.value("grid_search", c.grid_search);
    c.use_distance = j.value("use_distance", c.use_distance);
    c.jitter = j.value("jitter", c.jitter);
    c.outlier_filter = j.value("outlier_filter", c.outlier_filter);
    c.outlier_percentile = j.value("outlier_percentile", c.outlier_percentile);
    c.fcm_fuzzifier = j.value("fcm_fuzzifier", c.fcm_fuzzifier);
    c.max_train_points = j.value("max_train_points", c.max_train_points);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
}

json model_to_json(const TrainedModel& m) {
  json sv = json::array();
  for (std::size_t i = 0; i < m.svm.n_support(); ++i) {
    auto r = m.svm.support_vector(i);
    sv.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {{"format", kModelFormat},
          {"features", to_string(m.features)},
          {"use_distance", m.use_distance},
          {"aspect", {{"mean_width", m.aspect.mean_width}, {"mean_height", m.aspect.mean_height}}},
          {"scaler", {{"mean", m.scaler.mean}, {"scale", m.scaler.scale}}},
          {"svm",
           {{"dim", m.svm.dim},
            {"gamma", m.svm.gamma},
            {"C", m.svm.C},
            {"c_pos", m.svm.c_pos},
            {"c_neg", m.svm.c_neg},
            {"bias", m.svm.bias},
            {"coef", m.svm.coef},
            {"support_indices", m.svm.support_indices},
            {"support_vectors", sv}}},
          {"preprocess", preprocess_json(m.preprocess)},
          {"detector", detector_json(m.detector)},
          {"training_ids", m.training_ids}};
}

TrainedModel model_from_json(const json& j) {
  if (!j.is_object() || j.value("format", std::string{}) != kModelFormat)
    throw DataError("not a model document (expected format " + std::string(kModelFormat) + ")");
  try {
    TrainedModel m;
    m.features = parse_feature_kind(j.at("features").get<std::string>());
    m.use_distance = j.at("use_distance").get<bool>();
    m.aspect = {j.at("aspect").at("mean_width").get<double>(), j.at("aspect").at("mean_height").get<double>()};
    m.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
    m.scaler.scale = j.at("scaler").at("scale").get<std::vector<double>>();
    const auto& s = j.at("svm");
    m.svm.dim = s.at("dim").get<std::size_t>();
    m.svm.gamma = s.at("gamma").get<double>();
    m.svm.C = s.at("C").get<double>();
    m.svm.c_pos = s.value("c_pos", m.svm.C);
    m.svm.c_neg = s.value("c_neg", m.svm.C);
    m.svm.bias = s.at("bias").get<double>();
    m.svm.coef = s.at("coef").get<std::vector<double>>();
    m.svm.support_indices = s.value("support_indices", std::vector<std::size_t>{});
    for (const auto& row : s.at("support_vectors")) {
      const auto r = row.get<std::vector<double>>();
      if (r.size() != m.svm.dim) throw DataError("support vector has the wrong dimension");
      m.svm.support_vectors.insert(m.svm.support_vectors.end(), r.begin(), r.end());
    }
    if (m.svm.coef.size() * m.svm.dim != m.svm.support_vectors.size())
      throw DataError("coefficient and support vector counts differ");
    if (m.scaler.mean.size() != m.svm.dim || m.scaler.scale.size() != m.svm.dim)
      throw DataError("scaler dimension does not match the model");
    if (j.contains("preprocess")) preprocess_from(j.at("preprocess"), m.preprocess);
    if (j.contains("detector")) detector_from(j.at("detector"), m.detector);
    m.training_ids = j.value("training_ids", std::vector<std::string>{});
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const TrainedModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << model_to_json(m).dump() << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed model document: " + std::string(e.what()));
  }
  return model_from_json(j);
}

}  // namespace roi
