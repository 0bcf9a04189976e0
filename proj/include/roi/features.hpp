#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "roi/detect.hpp"
#include "roi/mask.hpp"

namespace roi {

enum class Label : std::uint8_t { non_tumour = 0, tumour = 1 };

struct SeedPoint {
  enum class Source { user_click, simulated_from_gt };
  double x = 0.0;
  double y = 0.0;
  Source source = Source::user_click;
};

/// Mean bounding-box extents of the tumour segments used for training.
struct AspectStats {
  double mean_width = 1.0;
  double mean_height = 1.0;
  double ratio() const { return mean_width / mean_height; }
};

/// Tumour mask reduced to its largest 8-connected component, plus derived
/// geometry. Bounding-box extents count pixels (max - min + 1).
class GroundTruth {
 public:
  /// Throws DataError when the mask has no positive pixel.
  explicit GroundTruth(const Mask& mask);

  const Mask& mask() const { return mask_; }
  int bbox_x0() const { return x0_; }
  int bbox_y0() const { return y0_; }
  int bbox_width() const { return x1_ - x0_ + 1; }
  int bbox_height() const { return y1_ - y0_ + 1; }
  double centroid_x() const { return cx_; }
  double centroid_y() const { return cy_; }

 private:
  Mask mask_;
  int x0_ = 0, y0_ = 0, x1_ = 0, y1_ = 0;
  double cx_ = 0.0, cy_ = 0.0;
};

/// Throws DataError on an empty list.
AspectStats aspect_stats(std::span<const GroundTruth* const> gts);
AspectStats aspect_stats(const std::vector<GroundTruth>& gts);

/// sqrt((x - xc)^2 + ((w/h) * (y - yc))^2)
double weighted_distance(const Keypoint& kp, const SeedPoint& seed, const AspectStats& stats);

/// Centroid plus a uniform offset inside a disc of radius
/// jitter_fraction * bbox diagonal, clamped into the image.
SeedPoint simulate_seed(const GroundTruth& gt, double jitter_fraction, std::uint64_t seed);

/// n x m' matrix: each row is a descriptor followed (when with_distance) by
/// the weighted distance of its keypoint to the seed. Keypoint coordinates,
/// distances and optional labels are kept as parallel arrays.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major
  std::vector<double> xs, ys;
  std::vector<double> distance;
  std::vector<Label> labels;  // empty or one per row
  bool has_distance_column = true;
  DescriptorKind kind = DescriptorKind::surf64;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }
  bool labelled() const { return labels.size() == rows && rows > 0; }
};

/// Throws std::invalid_argument on mixed descriptor kinds or misaligned input.
FeatureMatrix build_matrix(std::span<const Feature> feats, const SeedPoint& seed, const AspectStats& stats,
                           bool with_distance = true);
FeatureMatrix build_matrix(std::span<const Keypoint> kps, std::span<const Descriptor> descs,
                           const SeedPoint& seed, const AspectStats& stats, bool with_distance = true);

/// Tumour iff the rounded keypoint position lies on a positive mask pixel.
std::vector<Label> label_keypoints(std::span<const Keypoint> kps, const GroundTruth& gt);
std::vector<Label> label_points(std::span<const double> xs, std::span<const double> ys, const GroundTruth& gt);

/// Appends the rows (and parallel arrays) of src to dst. Column counts must match.
void append_rows(FeatureMatrix& dst, const FeatureMatrix& src);
FeatureMatrix select_rows(const FeatureMatrix& m, std::span<const std::size_t> idx);

/// Per-column z-score parameters. Columns whose training variance is zero
/// are left untouched (scale 1, no centering).
struct ScalerStats {
  std::vector<double> mean;
  std::vector<double> scale;  // population standard deviation, or 1

  void apply(FeatureMatrix& m) const;
  void apply(std::span<double> row) const;
};

ScalerStats fit_scaler(const FeatureMatrix& train);

struct Standardized {
  FeatureMatrix train;
  FeatureMatrix test;
  ScalerStats stats;
};

/// Fits on train only and applies to both. Throws std::invalid_argument if train is empty.
Standardized standardize(const FeatureMatrix& train, const FeatureMatrix& test);

/// CSV with header f0..f{m-1},dist,label,x,y. label is 1/0, or empty when unlabelled.
void write_csv(const FeatureMatrix& m, std::ostream& out);

}  // namespace roi
