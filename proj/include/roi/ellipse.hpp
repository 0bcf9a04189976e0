#pragma once

#include <span>
#include <vector>

#include "roi/mask.hpp"

namespace roi {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned ellipse in continuous image coordinates (pixel (i, j)
/// covers [i, i+1) x [j, j+1)).
struct EllipseROI {
  double cx = 0.0;
  double cy = 0.0;
  double rx = 0.0;  // semi-axis along x
  double ry = 0.0;  // semi-axis along y
  bool clamped = false;

  bool degenerate() const { return rx <= 0.0 || ry <= 0.0; }
  bool operator==(const EllipseROI&) const = default;
};

/// Raised when too few tumour points survive to define an ellipse.
class InsufficientEvidence : public DataError {
 public:
  InsufficientEvidence() : DataError("insufficient tumour evidence") {}
};

inline constexpr std::size_t kMinEllipsePoints = 3;

/// Ellipse whose vertices are the extremal points: x_l = min x, x_r = max x,
/// y_l = min y (top row), y_h = max y (bottom row). Centre is the bbox centre,
/// semi-axes are half the bbox extents. Throws InsufficientEvidence for fewer
/// than three points.
EllipseROI fit_ellipse(std::span<const Point2> pts);

/// Keeps the ellipse's vertices inside [0, width] x [0, height], shrinking
/// the bounding box where needed and setting `clamped`.
EllipseROI clamp_to_image(EllipseROI e, int width, int height);

/// Drops points whose distance exceeds the given percentile (0..100) of all
/// distances (nearest-rank). distances[i] belongs to pts[i].
std::vector<Point2> filter_outliers(std::span<const Point2> pts, std::span<const double> distances,
                                    double percentile);

/// Pixel (x, y) is set iff ((x + 0.5 - cx) / rx)^2 + ((y + 0.5 - cy) / ry)^2 <= 1.
/// Degenerate ellipses give an empty mask.
Mask rasterize(const EllipseROI& e, int width, int height);

struct DiceScore {
  double value = 0.0;
  std::size_t area_e = 0;
  std::size_t area_g = 0;
  std::size_t area_overlap = 0;
};

/// 2 |E n G| / (|E| + |G|). Two empty masks score 1. Throws
/// std::invalid_argument when the dimensions differ.
DiceScore dice(const Mask& e, const Mask& g);

}  // namespace roi
