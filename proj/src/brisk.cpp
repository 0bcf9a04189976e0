#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <tuple>

#include "roi/detect.hpp"

namespace roi {

namespace {

constexpr double kPi = std::numbers::pi;

inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

// Concentric sampling pattern at unit scale: 1 + 10 + 14 + 15 + 20 = 60 points.
struct PatternPoint {
  double x, y, sigma;
};

struct Pattern {
  std::vector<PatternPoint> points;
  std::vector<std::pair<int, int>> short_pairs;  // exactly kBriskBits
  std::vector<std::pair<int, int>> long_pairs;
  double extent = 0.0;  // outermost radius plus smoothing
};

const Pattern& pattern() {
  static const Pattern P = [] {
    Pattern p;
    constexpr double shrink = 0.85;
    constexpr std::array<double, 5> radii = {0.0, 2.9, 4.9, 7.4, 10.8};
    constexpr std::array<int, 5> counts = {1, 10, 14, 15, 20};
    for (std::size_t ring = 0; ring < radii.size(); ++ring) {
      const double r = radii[ring] * shrink;
      const int n = counts[ring];
      const double sigma = ring == 0 ? 0.5 : std::max(0.5, 0.65 * kPi * r / n);
      for (int j = 0; j < n; ++j) {
        const double theta = 2.0 * kPi * j / n + (ring % 2 ? kPi / n : 0.0);
        p.points.push_back({r * std::cos(theta), r * std::sin(theta), sigma});
      }
      p.extent = std::max(p.extent, r + std::sqrt(3.0) * sigma);
    }
    std::vector<std::tuple<double, int, int>> pairs;
    for (int i = 0; i < static_cast<int>(p.points.size()); ++i)
      for (int j = i + 1; j < static_cast<int>(p.points.size()); ++j)
        pairs.emplace_back(std::hypot(p.points[j].x - p.points[i].x, p.points[j].y - p.points[i].y), i, j);
    std::sort(pairs.begin(), pairs.end());
    for (int k = 0; k < kBriskBits; ++k) p.short_pairs.emplace_back(std::get<1>(pairs[k]), std::get<2>(pairs[k]));
    constexpr double long_min = 8.2 * shrink;
    for (const auto& [d, i, j] : pairs)
      if (d > long_min) p.long_pairs.emplace_back(i, j);
    return p;
  }();
  return P;
}

// Area-weighted mean over the square of half-width sqrt(3) * sigma centred on
// (x, y), which has the standard deviation of the Gaussian it stands in for.
// Pixel i covers [i - 0.5, i + 0.5).
double smoothed(const IntegralImage& ii, double x, double y, double sigma) {
  const double r = std::max(0.5, std::sqrt(3.0) * sigma);
  struct Seg {
    int a, b;
    double w;
  };
  auto segments = [](double lo, double hi, Seg out[3]) {
    const int i0 = static_cast<int>(std::floor(lo)), i1 = static_cast<int>(std::floor(hi));
    if (i0 == i1) {
      out[0] = {i0, i0 + 1, hi - lo};
      return 1;
    }
    out[0] = {i0, i0 + 1, i0 + 1 - lo};
    out[1] = {i0 + 1, i1, 1.0};
    out[2] = {i1, i1 + 1, hi - i1};
    return 3;
  };
  Seg sx[3], sy[3];
  const int nx = segments(x - r + 0.5, x + r + 0.5, sx);
  const int ny = segments(y - r + 0.5, y + r + 0.5, sy);
  double sum = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (sx[i].w > 0.0 && sy[j].w > 0.0)
        sum += sx[i].w * sy[j].w * static_cast<double>(ii.replicated_sum(sx[i].a, sy[j].a, sx[i].b, sy[j].b));
  return sum / (4.0 * r * r);
}

GrayImage half_sample(const GrayImage& src) {
  GrayImage out(src.width() / 2, src.height() / 2);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      const int s = src.at(2 * x, 2 * y) + src.at(2 * x + 1, 2 * y) + src.at(2 * x, 2 * y + 1) +
                    src.at(2 * x + 1, 2 * y + 1);
      out.at(x, y) = static_cast<std::uint8_t>((s + 2) / 4);
    }
  return out;
}

// Downsample by 1.5 with bilinear sampling at layer pixel centres.
GrayImage two_thirds_sample(const GrayImage& src) {
  GrayImage out(src.width() * 2 / 3, src.height() * 2 / 3);
  for (int y = 0; y < out.height(); ++y) {
    const double sy = (y + 0.5) * 1.5 - 0.5;
    const int y0 = static_cast<int>(std::floor(sy));
    const double fy = sy - y0;
    for (int x = 0; x < out.width(); ++x) {
      const double sx = (x + 0.5) * 1.5 - 0.5;
      const int x0 = static_cast<int>(std::floor(sx));
      const double fx = sx - x0;
      const double v = (1 - fy) * ((1 - fx) * src.clamped(x0, y0) + fx * src.clamped(x0 + 1, y0)) +
                       fy * ((1 - fx) * src.clamped(x0, y0 + 1) + fx * src.clamped(x0 + 1, y0 + 1));
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(round_half_up(v), 0, 255));
    }
  }
  return out;
}

struct ScaleLayer {
  GrayImage img;
  double factor = 1.0;  // original pixels per layer pixel
  std::vector<int> score;
  int s(int x, int y) const {
    if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return 0;
    return score[static_cast<std::size_t>(y) * img.width() + x];
  }
};

// Max score in the 3x3 patch of `layer` around the point given in original
// image coordinates.
int patch_max(const ScaleLayer& layer, double ox, double oy) {
  const int cx = round_half_up((ox + 0.5) / layer.factor - 0.5);
  const int cy = round_half_up((oy + 0.5) / layer.factor - 0.5);
  int m = 0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) m = std::max(m, layer.s(cx + dx, cy + dy));
  return m;
}

// Vertex of the parabola through three (t, v) samples, clamped to [t0, t2].
double parabola_vertex(double t0, double v0, double t1, double v1, double t2, double v2) {
  const double d1 = (v1 - v0) / (t1 - t0);
  const double d2 = (v2 - v1) / (t2 - t1);
  const double a = (d2 - d1) / (t2 - t0);
  if (a >= 0.0) return t1;
  const double b = d1 - a * (t0 + t1);
  return std::clamp(-b / (2.0 * a), t0, t2);
}

double quad_offset(double vm, double v0, double vp) {
  const double den = 2.0 * v0 - vm - vp;
  if (den <= 0.0) return 0.0;
  return std::clamp((vp - vm) / (2.0 * den), -0.5, 0.5);
}

}  // namespace

Descriptor brisk_describe(const IntegralImage& ii, const Keypoint& kp, double& orientation) {
  const Pattern& P = pattern();
  const double t = kp.scale / 6.0;
  std::vector<double> val(P.points.size());
  for (std::size_t k = 0; k < P.points.size(); ++k)
    val[k] = smoothed(ii, kp.x + t * P.points[k].x, kp.y + t * P.points[k].y, t * P.points[k].sigma);

  double gx = 0.0, gy = 0.0;
  for (const auto& [i, j] : P.long_pairs) {
    const double vx = P.points[j].x - P.points[i].x, vy = P.points[j].y - P.points[i].y;
    const double w = (val[j] - val[i]) / (vx * vx + vy * vy);
    gx += w * vx;
    gy += w * vy;
  }
  double theta = (gx == 0.0 && gy == 0.0) ? 0.0 : std::atan2(gy, gx);
  if (theta < 0) theta += 2.0 * kPi;
  if (theta >= 2.0 * kPi) theta = 0.0;
  orientation = theta;

  const double co = std::cos(theta), si = std::sin(theta);
  for (std::size_t k = 0; k < P.points.size(); ++k) {
    const double px = P.points[k].x * co - P.points[k].y * si;
    const double py = P.points[k].x * si + P.points[k].y * co;
    val[k] = smoothed(ii, kp.x + t * px, kp.y + t * py, t * P.points[k].sigma);
  }
  Descriptor d{DescriptorKind::brisk512, std::vector<double>(kBriskBits, 0.0)};
  for (int b = 0; b < kBriskBits; ++b) {
    const auto [i, j] = P.short_pairs[b];
    d.values[b] = val[i] > val[j] ? 1.0 : 0.0;
  }
  return d;
}

std::vector<Feature> detect_brisk(const GrayImage& img, const DetectorConfig& cfg) {
  cfg.validate();
  // Octaves c_i = 2^i and intra-octaves d_i = 1.5 * 2^i, interleaved.
  std::vector<ScaleLayer> layers;
  {
    GrayImage c = img, d = two_thirds_sample(img);
    for (int o = 0; o < cfg.brisk_octaves; ++o) {
      const double f = std::ldexp(1.0, o);
      if (c.width() > 2 * kFastMargin + 2 && c.height() > 2 * kFastMargin + 2) layers.push_back({c, f, {}});
      if (d.width() > 2 * kFastMargin + 2 && d.height() > 2 * kFastMargin + 2) layers.push_back({d, 1.5 * f, {}});
      c = half_sample(c);
      d = half_sample(d);
    }
  }
  for (auto& L : layers) {
    L.score.assign(L.img.size(), 0);
    for (int y = kFastMargin; y < L.img.height() - kFastMargin; ++y)
      for (int x = kFastMargin; x < L.img.width() - kFastMargin; ++x)
        L.score[static_cast<std::size_t>(y) * L.img.width() + x] = fast_score(L.img, x, y, cfg.brisk_threshold, 9);
  }

  const IntegralImage ii(img);
  const Pattern& P = pattern();
  std::vector<Feature> out;
  const int nl = static_cast<int>(layers.size());
  for (int k = 0; k < nl; ++k) {
    const ScaleLayer& L = layers[k];
    const double lk = std::log2(L.factor);
    const double l_below = k > 0 ? std::log2(layers[k - 1].factor) : lk - (nl > 1 ? std::log2(layers[1].factor) - lk : 0.585);
    const double l_above = k + 1 < nl ? std::log2(layers[k + 1].factor) : lk + (lk - l_below);
    for (int y = kFastMargin; y < L.img.height() - kFastMargin; ++y) {
      for (int x = kFastMargin; x < L.img.width() - kFastMargin; ++x) {
        const int s = L.s(x, y);
        if (s == 0) continue;
        bool keep = true;
        for (int dy = -1; dy <= 1 && keep; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const int n = L.s(x + dx, y + dy);
            if (n > s || (n == s && (dy < 0 || (dy == 0 && dx < 0)))) {
              keep = false;
              break;
            }
          }
        if (!keep) continue;

        const double ox = x + quad_offset(L.s(x - 1, y), s, L.s(x + 1, y));
        const double oy = y + quad_offset(L.s(x, y - 1), s, L.s(x, y + 1));
        const double px = (ox + 0.5) * L.factor - 0.5;
        const double py = (oy + 0.5) * L.factor - 0.5;
        const int below = k > 0 ? patch_max(layers[k - 1], px, py) : 0;
        const int above = k + 1 < nl ? patch_max(layers[k + 1], px, py) : 0;
        if (below >= s || above > s) continue;

        const double t = std::exp2(parabola_vertex(l_below, below, lk, s, l_above, above));
        Keypoint kp{px, py, 6.0 * t, static_cast<double>(s), 0.0};
        const double reach = P.extent * t + 1.0;
        if (kp.x - reach < 0 || kp.y - reach < 0 || kp.x + reach > img.width() - 1 ||
            kp.y + reach > img.height() - 1)
          continue;
        Descriptor d = brisk_describe(ii, kp, kp.orientation);
        out.push_back({kp, std::move(d)});
      }
    }
  }
  sort_and_truncate(out, cfg.max_keypoints);
  return out;
}

}  // namespace roi
