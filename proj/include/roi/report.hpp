#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "roi/pipeline.hpp"

namespace roi {

/// One held-out image scored by one (feature, classifier) pair.
struct EvalRow {
  std::string image_id;
  FeatureKind features = FeatureKind::surf;
  ClassifierKind classifier = ClassifierKind::svm;
  double dice = 0.0;
  std::size_t keypoints = 0;
  std::optional<EllipseROI> ellipse;
  SeedPoint seed;
  std::string error;  // empty on success
  /// Records whose ground truth fed aspect stats, scaler and SVM for this fold.
  std::vector<std::string> training_ids;

  double detect_ms = 0.0;
  double train_ms = 0.0;
  double predict_ms = 0.0;
  double ellipsify_ms = 0.0;
  double runtime_ms() const { return detect_ms + train_ms + predict_ms + ellipsify_ms; }
};

struct EvalReport {
  std::string dataset;
  std::uint64_t master_seed = 0;
  bool leave_group_out = false;
  std::vector<EvalRow> rows;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1) standard deviation; 0 for n < 2
  std::size_t n = 0;
};

MeanStd mean_std(std::span<const double> v);

struct Aggregate {
  FeatureKind features;
  ClassifierKind classifier;
  MeanStd dice;
};

struct KeypointCountStats {
  FeatureKind features;
  MeanStd count;
};

/// Mean and std of Dice per (feature, classifier) present in the report, in
/// table order: classifiers svm, kmeans, fcm; within each brisk, fast, surf.
std::vector<Aggregate> aggregate(const EvalReport& r);

/// Keypoint count per image for each feature family (each image counted once).
std::vector<KeypointCountStats> keypoint_stats(const EvalReport& r);

/// "0.5000 ± 0.0000"
std::string format_mean_std(double mean, double std);

/// Plain-text comparison table, one line per (feature, classifier).
std::string format_table(const EvalReport& r);

inline constexpr std::string_view kReportFormat = "roi-ellipse-report/1";

/// Timings are nondeterministic, so they are only written on request.
nlohmann::json report_to_json(const EvalReport& r, bool include_timings = false);
EvalReport report_from_json(const nlohmann::json& j);

}  // namespace roi
