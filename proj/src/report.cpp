#include "roi/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace roi {

using nlohmann::json;

MeanStd mean_std(std::span<const double> v) {
  MeanStd m;
  m.n = v.size();
  if (v.empty()) return m;
  double s = 0.0;
  for (double x : v) s += x;
  m.mean = s / static_cast<double>(v.size());
  if (v.size() > 1) {
    double q = 0.0;
    for (double x : v) q += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(q / static_cast<double>(v.size() - 1));
  }
  return m;
}

namespace {

constexpr ClassifierKind kClassifierOrder[] = {ClassifierKind::svm, ClassifierKind::kmeans, ClassifierKind::fcm};
constexpr FeatureKind kFeatureOrder[] = {FeatureKind::brisk, FeatureKind::fast, FeatureKind::surf};

std::string display(FeatureKind f) {
  switch (f) {
    case FeatureKind::brisk: return "BRISK";
    case FeatureKind::fast: return "FAST";
    case FeatureKind::surf: return "SURF";
  }
  return "?";
}

std::string display(ClassifierKind c) {
  switch (c) {
    case ClassifierKind::svm: return "SVM";
    case ClassifierKind::kmeans: return "k-Means";
    case ClassifierKind::fcm: return "FCM";
  }
  return "?";
}

}  // namespace

std::vector<Aggregate> aggregate(const EvalReport& r) {
  std::vector<Aggregate> out;
  for (const auto c : kClassifierOrder) {
    for (const auto f : kFeatureOrder) {
      std::vector<double> d;
      for (const auto& row : r.rows)
        if (row.features == f && row.classifier == c) d.push_back(row.dice);
      if (!d.empty()) out.push_back({f, c, mean_std(d)});
    }
  }
  return out;
}

std::vector<KeypointCountStats> keypoint_stats(const EvalReport& r) {
  std::vector<KeypointCountStats> out;
  for (const auto f : kFeatureOrder) {
    std::set<std::string> seen;
    std::vector<double> counts;
    for (const auto& row : r.rows)
      if (row.features == f && seen.insert(row.image_id).second) counts.push_back(static_cast<double>(row.keypoints));
    if (!counts.empty()) out.push_back({f, mean_std(counts)});
  }
  return out;
}

std::string format_mean_std(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f ± %.4f", mean, std);
  return buf;
}

std::string format_table(const EvalReport& r) {
  std::string out = "Features  Classifier  D ± sigma           n\n";
  out += "--------  ----------  -----------------  ---\n";
  ClassifierKind last = ClassifierKind::svm;
  bool first = true;
  for (const auto& a : aggregate(r)) {
    if (!first && a.classifier != last) out += "\n";
    first = false;
    last = a.classifier;
    char line[128];
    std::snprintf(line, sizeof line, "%-8s  %-10s  %s  %3zu\n", display(a.features).c_str(),
                  display(a.classifier).c_str(), format_mean_std(a.dice.mean, a.dice.std).c_str(), a.dice.n);
    out += line;
  }
  const auto counts = keypoint_stats(r);
  if (!counts.empty()) {
    out += "\nKeypoints per image\n";
    for (const auto& k : counts) {
      char line[96];
      std::snprintf(line, sizeof line, "%-8s  %.1f ± %.1f\n", display(k.features).c_str(), k.count.mean,
                    k.count.std);
      out += line;
    }
  }
  return out;
}

json report_to_json(const EvalReport& r, bool include_timings) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json j = {{"image_id", row.image_id},
              {"features", to_string(row.features)},
              {"classifier", to_string(row.classifier)},
              {"dice", row.dice},
              {"keypoints", row.keypoints},
              {"seed", {{"x", row.seed.x}, {"y", row.seed.y}}},
              {"ellipse", row.ellipse ? to_json(*row.ellipse) : json(nullptr)},
              {"training_ids", row.training_ids}};
    if (!row.error.empty()) j["error"] = row.error;
    if (include_timings)
      j["timings_ms"] = {{"detect", row.detect_ms},
                         {"train", row.train_ms},
                         {"predict", row.predict_ms},
                         {"ellipsify", row.ellipsify_ms},
                         {"total", row.runtime_ms()}};
    rows.push_back(std::move(j));
  }
  json aggs = json::array();
  for (const auto& a : aggregate(r))
    aggs.push_back({{"features", to_string(a.features)},
                    {"classifier", to_string(a.classifier)},
                    {"mean", a.dice.mean},
                    {"std", a.dice.std},
                    {"n", a.dice.n}});
  json counts = json::array();
  for (const auto& k : keypoint_stats(r))
    counts.push_back({{"features", to_string(k.features)}, {"mean", k.count.mean}, {"std", k.count.std}, {"n", k.count.n}});
  return {{"format", kReportFormat},
          {"dataset", r.dataset},
          {"master_seed", r.master_seed},
          {"leave_group_out", r.leave_group_out},
          {"rows", rows},
          {"aggregates", aggs},
          {"keypoint_counts", counts}};
}

EvalReport report_from_json(const json& j) {
  if (j.value("format", std::string{}) != kReportFormat) throw DataError("not an evaluation report");
  try {
    EvalReport r;
    r.dataset = j.value("dataset", std::string{});
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    r.leave_group_out = j.value("leave_group_out", false);
    for (const auto& jr : j.at("rows")) {
      EvalRow row;
      row.image_id = jr.at("image_id").get<std::string>();
      row.features = parse_feature_kind(jr.at("features").get<std::string>());
      row.classifier = parse_classifier_kind(jr.at("classifier").get<std::string>());
      row.dice = jr.at("dice").get<double>();
      row.keypoints = jr.at("keypoints").get<std::size_t>();
      row.seed = {jr.at("seed").at("x").get<double>(), jr.at("seed").at("y").get<double>(),
                  SeedPoint::Source::user_click};
      if (!jr.at("ellipse").is_null()) row.ellipse = ellipse_from_json(jr.at("ellipse"));
      row.training_ids = jr.value("training_ids", std::vector<std::string>{});
      row.error = jr.value("error", std::string{});
      if (jr.contains("timings_ms")) {
        const auto& t = jr.at("timings_ms");
        row.detect_ms = t.value("detect", 0.0);
        row.train_ms = t.value("train", 0.0);
        row.predict_ms = t.value("predict", 0.0);
        row.ellipsify_ms = t.value("ellipsify", 0.0);
      }
      r.rows.push_back(std::move(row));
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace roi
