#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "roi/image.hpp"

namespace roi {

/// Interest point in pixel-index coordinates.
struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double scale = 1.0;        // characteristic radius in px; 1 for plain FAST
  double response = 0.0;     // detector strength
  double orientation = 0.0;  // radians in [0, 2*pi); 0 when unoriented

  bool operator==(const Keypoint&) const = default;
};

enum class DescriptorKind { surf64, brisk512, surf64_at_fast };

std::string_view to_string(DescriptorKind k);

/// Fixed-length descriptor. SURF variants hold 64 reals with unit L2 norm;
/// BRISK holds its 512 bits as 0.0 / 1.0 so every family feeds the same
/// real-valued classifiers.
struct Descriptor {
  DescriptorKind kind = DescriptorKind::surf64;
  std::vector<double> values;

  bool operator==(const Descriptor&) const = default;
};

/// Number of differing bits between two brisk512 descriptors.
int hamming(const Descriptor& a, const Descriptor& b);

struct Feature {
  Keypoint kp;
  Descriptor desc;
};

enum class FeatureKind { fast, surf, brisk };

std::string_view to_string(FeatureKind k);
/// Throws ConfigError on an unknown name.
FeatureKind parse_feature_kind(std::string_view name);

struct DetectorConfig {
  int fast_threshold = 20;
  int fast_arc = 9;
  double surf_hessian_threshold = 3e-4;
  int surf_octaves = 4;
  int brisk_threshold = 30;
  int brisk_octaves = 3;
  int max_keypoints = 2000;

  void validate() const;
};

// ---------------------------------------------------------------------------
// FAST

/// Offsets of the radius-3 Bresenham circle, clockwise starting straight up.
inline constexpr int kFastCircle[16][2] = {{0, -3}, {1, -3},  {2, -2},  {3, -1}, {3, 0},  {3, 1},
                                           {2, 2},  {1, 3},   {0, 3},   {-1, 3}, {-2, 2}, {-3, 1},
                                           {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}};

/// Pixels closer than this to the border are never tested.
inline constexpr int kFastMargin = 3;

/// Segment-test score of pixel (x, y): 0 when no contiguous arc of at least
/// `arc` circle pixels is entirely brighter than I(p) + t or entirely darker
/// than I(p) - t; otherwise the sum of |I(c) - I(p)| over the longest such arc.
/// The caller keeps (x, y) at least kFastMargin from the border.
int fast_score(const GrayImage& img, int x, int y, int threshold, int arc);

/// Corners before non-maximum suppression, raster order, response = score.
std::vector<Keypoint> fast_corners(const GrayImage& img, int threshold, int arc);

/// FAST corners after 3x3 non-maximum suppression, sorted and truncated.
std::vector<Keypoint> detect_fast(const GrayImage& img, const DetectorConfig& cfg);

// ---------------------------------------------------------------------------
// SURF

/// Box-filter Hessian determinant det = Dxx*Dyy - (0.9*Dxy)^2 at pixel (x, y)
/// for a filter of side `size` (9, 15, 21, ...). Responses are divided by the
/// filter area and by 255. Out-of-image support is edge replicated.
double surf_hessian(const IntegralImage& ii, int x, int y, int size);

/// Side of the box filter for interval `interval` (0..3) of octave `octave`.
int surf_filter_size(int octave, int interval);

/// Dominant orientation from Haar responses in a radius-6s disc.
double surf_orientation(const IntegralImage& ii, double x, double y, double scale);

/// 64-value SURF descriptor: a 20s window split into 4x4 subregions, each
/// summarizing (sum dx, sum dy, sum |dx|, sum |dy|) over 5x5 Haar samples,
/// normalized to unit length. A flat neighbourhood yields the zero vector.
std::vector<double> surf_descriptor(const IntegralImage& ii, double x, double y, double scale,
                                    double orientation);

std::vector<Feature> detect_surf(const GrayImage& img, const DetectorConfig& cfg);

/// SURF descriptors (kind surf64_at_fast) at fixed points, scale 1 and the
/// keypoint's own orientation. Support outside the image is edge replicated.
std::vector<Descriptor> describe_at(const GrayImage& img, const std::vector<Keypoint>& pts);

// ---------------------------------------------------------------------------
// BRISK

inline constexpr int kBriskBits = 512;

std::vector<Feature> detect_brisk(const GrayImage& img, const DetectorConfig& cfg);

/// BRISK descriptor of a keypoint whose pattern scale is kp.scale / 6.
/// Returns the bits and writes the estimated orientation into `orientation`.
Descriptor brisk_describe(const IntegralImage& ii, const Keypoint& kp, double& orientation);

// ---------------------------------------------------------------------------

/// Orders by response descending, then y ascending, then x ascending, and
/// keeps at most max_keypoints entries.
void sort_and_truncate(std::vector<Feature>& feats, int max_keypoints);
void sort_and_truncate(std::vector<Keypoint>& kps, int max_keypoints);

/// Detection plus description for one feature family. FAST keypoints get
/// surf64_at_fast descriptors.
std::vector<Feature> detect_features(const GrayImage& img, FeatureKind kind, const DetectorConfig& cfg);

}  // namespace roi
