#include "roi/ellipse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roi {

EllipseROI fit_ellipse(std::span<const Point2> pts) {
  if (pts.size() < kMinEllipsePoints) throw InsufficientEvidence();
  double xl = pts[0].x, xr = pts[0].x, yl = pts[0].y, yh = pts[0].y;
  for (const auto& p : pts) {
    xl = std::min(xl, p.x);
    xr = std::max(xr, p.x);
    yl = std::min(yl, p.y);
    yh = std::max(yh, p.y);
  }
  return {(xl + xr) / 2.0, (yl + yh) / 2.0, (xr - xl) / 2.0, (yh - yl) / 2.0, false};
}

EllipseROI clamp_to_image(EllipseROI e, int width, int height) {
  const double xl = std::max(e.cx - e.rx, 0.0), xr = std::min(e.cx + e.rx, double(width));
  const double yl = std::max(e.cy - e.ry, 0.0), yh = std::min(e.cy + e.ry, double(height));
  if (xl == e.cx - e.rx && xr == e.cx + e.rx && yl == e.cy - e.ry && yh == e.cy + e.ry) return e;
  return {(xl + xr) / 2.0, (yl + yh) / 2.0, std::max(0.0, (xr - xl) / 2.0), std::max(0.0, (yh - yl) / 2.0), true};
}

std::vector<Point2> filter_outliers(std::span<const Point2> pts, std::span<const double> distances,
                                    double percentile) {
  if (pts.size() != distances.size()) throw std::invalid_argument("filter_outliers: size mismatch");
  if (pts.empty()) return {};
  std::vector<double> sorted(distances.begin(), distances.end());
  std::sort(sorted.begin(), sorted.end());
  const double p = std::clamp(percentile, 0.0, 100.0) / 100.0;
  const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size())));
  const double cutoff = sorted[rank == 0 ? 0 : rank - 1];
  std::vector<Point2> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (distances[i] <= cutoff) out.push_back(pts[i]);
  return out;
}

Mask rasterize(const EllipseROI& e, int width, int height) {
  Mask m(width, height);
  if (e.degenerate()) return m;
  const int x0 = std::max(0, static_cast<int>(std::floor(e.cx - e.rx - 1)));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(e.cx + e.rx + 1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(e.cy - e.ry - 1)));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(e.cy + e.ry + 1)));
  for (int y = y0; y <= y1; ++y) {
    const double v = (y + 0.5 - e.cy) / e.ry;
    for (int x = x0; x <= x1; ++x) {
      const double u = (x + 0.5 - e.cx) / e.rx;
      if (u * u + v * v <= 1.0) m.set(x, y);
    }
  }
  return m;
}

DiceScore dice(const Mask& e, const Mask& g) {
  if (e.width != g.width || e.height != g.height) throw std::invalid_argument("dice: mask dimensions differ");
  DiceScore d;
  for (std::size_t i = 0; i < e.bits.size(); ++i) {
    const bool a = e.bits[i] != 0, b = g.bits[i] != 0;
    d.area_e += a;
    d.area_g += b;
    d.area_overlap += a && b;
  }
  const std::size_t denom = d.area_e + d.area_g;
  d.value = denom == 0 ? 1.0 : 2.0 * static_cast<double>(d.area_overlap) / static_cast<double>(denom);
  return d;
}

}  // namespace roi
