#include <algorithm>
#include <cmath>

#include "roi/detect.hpp"

namespace roi {

std::string_view to_string(DescriptorKind k) {
  switch (k) {
    case DescriptorKind::surf64: return "surf64";
    case DescriptorKind::brisk512: return "brisk512";
    case DescriptorKind::surf64_at_fast: return "surf64-at-fast";
  }
  return "?";
}

std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::fast: return "fast";
    case FeatureKind::surf: return "surf";
    case FeatureKind::brisk: return "brisk";
  }
  return "?";
}

FeatureKind parse_feature_kind(std::string_view name) {
  if (name == "fast") return FeatureKind::fast;
  if (name == "surf") return FeatureKind::surf;
  if (name == "brisk") return FeatureKind::brisk;
  throw ConfigError("unknown feature family '" + std::string(name) + "' (expected fast, surf or brisk)");
}

int hamming(const Descriptor& a, const Descriptor& b) {
  if (a.values.size() != b.values.size()) throw std::invalid_argument("descriptor lengths differ");
  int n = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) n += (a.values[i] != 0.0) != (b.values[i] != 0.0);
  return n;
}

void DetectorConfig::validate() const {
  if (fast_threshold <= 0) throw ConfigError("fast_threshold must be > 0");
  if (fast_arc < 9 || fast_arc > 12) throw ConfigError("fast_arc must be in [9, 12]");
  if (!(surf_hessian_threshold > 0.0)) throw ConfigError("surf_hessian_threshold must be > 0");
  if (surf_octaves < 1 || surf_octaves > 6) throw ConfigError("surf_octaves must be in [1, 6]");
  if (brisk_threshold <= 0) throw ConfigError("brisk_threshold must be > 0");
  if (brisk_octaves < 1 || brisk_octaves > 6) throw ConfigError("brisk_octaves must be in [1, 6]");
  if (max_keypoints <= 0) throw ConfigError("max_keypoints must be > 0");
}

namespace {

bool ranks_before(const Keypoint& a, const Keypoint& b) {
  if (a.response != b.response) return a.response > b.response;
  if (a.y != b.y) return a.y < b.y;
  return a.x < b.x;
}

}  // namespace

void sort_and_truncate(std::vector<Feature>& feats, int max_keypoints) {
  std::stable_sort(feats.begin(), feats.end(),
                   [](const Feature& a, const Feature& b) { return ranks_before(a.kp, b.kp); });
  if (static_cast<int>(feats.size()) > max_keypoints) feats.resize(static_cast<std::size_t>(max_keypoints));
}

void sort_and_truncate(std::vector<Keypoint>& kps, int max_keypoints) {
  std::stable_sort(kps.begin(), kps.end(), ranks_before);
  if (static_cast<int>(kps.size()) > max_keypoints) kps.resize(static_cast<std::size_t>(max_keypoints));
}

std::vector<Feature> detect_features(const GrayImage& img, FeatureKind kind, const DetectorConfig& cfg) {
  switch (kind) {
    case FeatureKind::surf: return detect_surf(img, cfg);
    case FeatureKind::brisk: return detect_brisk(img, cfg);
    case FeatureKind::fast: {
      auto kps = detect_fast(img, cfg);
      auto descs = describe_at(img, kps);
      std::vector<Feature> out;
      out.reserve(kps.size());
      for (std::size_t i = 0; i < kps.size(); ++i) out.push_back({kps[i], std::move(descs[i])});
      return out;
    }
  }
  throw ConfigError("unknown feature family");
}

}  // namespace roi
