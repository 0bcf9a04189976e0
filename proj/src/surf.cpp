#include <algorithm>
#include <cmath>
#include <numbers>

#include "roi/detect.hpp"

namespace roi {

namespace {

constexpr int kIntervals = 4;
constexpr double kPi = std::numbers::pi;

inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

// Sum over [x0, x1) x [y0, y1), edge replicated, scaled to [0, 1] intensities.
inline double box(const IntegralImage& ii, int x0, int y0, int x1, int y1) {
  return static_cast<double>(ii.replicated_sum(x0, y0, x1, y1)) / 255.0;
}

// Haar wavelet responses of side `f` (even) centred on pixel (x, y).
inline void haar(const IntegralImage& ii, int x, int y, int f, double& dx, double& dy) {
  const int h = f / 2;
  dx = box(ii, x, y - h, x + h, y + h) - box(ii, x - h, y - h, x, y + h);
  dy = box(ii, x - h, y, x + h, y + h) - box(ii, x - h, y - h, x + h, y);
}

inline int haar_size(double s) { return std::max(2, 2 * round_half_up(s)); }

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0) a += 2.0 * kPi;
  if (a >= 2.0 * kPi) a = 0.0;
  return a;
}

// One response layer sampled every `step` pixels.
struct Layer {
  int size = 0;
  int step = 1;
  int cols = 0, rows = 0;
  std::vector<double> r;
  double at(int c, int row) const { return r[static_cast<std::size_t>(row) * cols + c]; }
};

Layer build_layer(const IntegralImage& ii, int size, int step) {
  Layer L;
  L.size = size;
  L.step = step;
  L.cols = ii.width() / step;
  L.rows = ii.height() / step;
  L.r.resize(static_cast<std::size_t>(L.cols) * L.rows);
  for (int row = 0; row < L.rows; ++row)
    for (int c = 0; c < L.cols; ++c)
      L.r[static_cast<std::size_t>(row) * L.cols + c] = surf_hessian(ii, c * step, row * step, size);
  return L;
}

// Solves the 3x3 system H o = -g by Cramer's rule. False if singular.
bool solve3(const double H[3][3], const double g[3], double o[3]) {
  auto det3 = [](const double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double d = det3(H);
  if (std::abs(d) < 1e-30) return false;
  for (int k = 0; k < 3; ++k) {
    double m[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m[i][j] = (j == k) ? -g[i] : H[i][j];
    o[k] = det3(m) / d;
  }
  return true;
}

}  // namespace

int surf_filter_size(int octave, int interval) { return 3 * ((2 << octave) * (interval + 1) + 1); }

double surf_hessian(const IntegralImage& ii, int x, int y, int size) {
  const int l = size / 3;
  const int b = (size - 1) / 2;
  const double inv_area = 1.0 / (static_cast<double>(size) * size);

  const double dxx = box(ii, x - b, y - l + 1, x + b + 1, y + l) -
                     3.0 * box(ii, x - l / 2, y - l + 1, x - l / 2 + l, y + l);
  const double dyy = box(ii, x - l + 1, y - b, x + l, y + b + 1) -
                     3.0 * box(ii, x - l + 1, y - l / 2, x + l, y - l / 2 + l);
  const double dxy = box(ii, x + 1, y - l, x + l + 1, y) + box(ii, x - l, y + 1, x, y + l + 1) -
                     box(ii, x - l, y - l, x, y) - box(ii, x + 1, y + 1, x + l + 1, y + l + 1);
  const double nxx = dxx * inv_area, nyy = dyy * inv_area, nxy = dxy * inv_area;
  return nxx * nyy - 0.81 * nxy * nxy;
}

double surf_orientation(const IntegralImage& ii, double x, double y, double scale) {
  struct Sample {
    double angle, dx, dy;
  };
  std::vector<Sample> samples;
  samples.reserve(113);
  const int f = haar_size(2.0 * scale);
  for (int j = -6; j <= 6; ++j) {
    for (int i = -6; i <= 6; ++i) {
      if (i * i + j * j >= 36) continue;
      double dx, dy;
      haar(ii, round_half_up(x + i * scale), round_half_up(y + j * scale), f, dx, dy);
      const double g = std::exp(-(i * i + j * j) / 8.0);  // sigma = 2s
      dx *= g;
      dy *= g;
      if (dx == 0.0 && dy == 0.0) continue;
      samples.push_back({wrap_angle(std::atan2(dy, dx)), dx, dy});
    }
  }
  double best = -1.0, best_angle = 0.0;
  constexpr double window = kPi / 3.0;
  for (double a = 0.0; a < 2.0 * kPi; a += 0.15) {
    double sx = 0.0, sy = 0.0;
    for (const auto& s : samples) {
      double d = s.angle - a;
      if (d < 0) d += 2.0 * kPi;
      if (d < window) {
        sx += s.dx;
        sy += s.dy;
      }
    }
    const double m = sx * sx + sy * sy;
    if (m > best) {
      best = m;
      best_angle = std::atan2(sy, sx);
    }
  }
  return best > 0.0 ? wrap_angle(best_angle) : 0.0;
}

std::vector<double> surf_descriptor(const IntegralImage& ii, double x, double y, double scale,
                                    double orientation) {
  std::vector<double> d(64, 0.0);
  const double co = std::cos(orientation), si = std::sin(orientation);
  const int f = haar_size(scale);
  constexpr double inv_two_sigma2 = 1.0 / (2.0 * 3.3 * 3.3);
  for (int sy = 0; sy < 4; ++sy) {
    for (int sx = 0; sx < 4; ++sx) {
      double* cell = &d[static_cast<std::size_t>(sy * 4 + sx) * 4];
      for (int l = 0; l < 5; ++l) {
        for (int k = 0; k < 5; ++k) {
          const double u = -10.0 + 5 * sx + k + 0.5;
          const double v = -10.0 + 5 * sy + l + 0.5;
          const int px = round_half_up(x + scale * (u * co - v * si));
          const int py = round_half_up(y + scale * (u * si + v * co));
          double dx, dy;
          haar(ii, px, py, f, dx, dy);
          const double g = std::exp(-(u * u + v * v) * inv_two_sigma2);
          const double rx = g * (dx * co + dy * si);
          const double ry = g * (-dx * si + dy * co);
          cell[0] += rx;
          cell[1] += ry;
          cell[2] += std::abs(rx);
          cell[3] += std::abs(ry);
        }
      }
    }
  }
  double norm = 0.0;
  for (double v : d) norm += v * v;
  norm = std::sqrt(norm);
  if (norm > 0.0)
    for (double& v : d) v /= norm;
  return d;
}

std::vector<Feature> detect_surf(const GrayImage& img, const DetectorConfig& cfg) {
  cfg.validate();
  const IntegralImage ii(img);
  std::vector<Feature> out;

  for (int o = 0; o < cfg.surf_octaves; ++o) {
    const int step = 1 << o;
    // Keep the whole support of the largest filter of the octave inside the image.
    const int border = (surf_filter_size(o, kIntervals - 1) - 1) / 2 + 1;
    const int c_lo = (border + step - 1) / step, c_hi = (img.width() - border) / step;
    const int r_lo = (border + step - 1) / step, r_hi = (img.height() - border) / step;
    if (c_hi - c_lo < 3 || r_hi - r_lo < 3) break;  // remaining octaves do not fit

    std::vector<Layer> layers;
    for (int i = 0; i < kIntervals; ++i) layers.push_back(build_layer(ii, surf_filter_size(o, i), step));

    for (int i = 1; i + 1 < kIntervals; ++i) {
      const Layer &bot = layers[i - 1], &mid = layers[i], &top = layers[i + 1];
      for (int r = r_lo + 1; r < r_hi - 1; ++r) {
        for (int c = c_lo + 1; c < c_hi - 1; ++c) {
          const double v = mid.at(c, r);
          if (v <= cfg.surf_hessian_threshold) continue;
          // Equal neighbours suppress only when they come earlier in
          // (scale, row, column) order, so a tied plateau keeps one point.
          bool is_max = true;
          for (int dr = -1; dr <= 1 && is_max; ++dr)
            for (int dc = -1; dc <= 1 && is_max; ++dc) {
              if (bot.at(c + dc, r + dr) >= v || top.at(c + dc, r + dr) > v) is_max = false;
              const bool earlier = dr < 0 || (dr == 0 && dc < 0);
              if ((dr != 0 || dc != 0) && (mid.at(c + dc, r + dr) > v || (earlier && mid.at(c + dc, r + dr) == v)))
                is_max = false;
            }
          if (!is_max) continue;

          const double g[3] = {(mid.at(c + 1, r) - mid.at(c - 1, r)) / 2.0,
                               (mid.at(c, r + 1) - mid.at(c, r - 1)) / 2.0,
                               (top.at(c, r) - bot.at(c, r)) / 2.0};
          const double dxx = mid.at(c + 1, r) + mid.at(c - 1, r) - 2 * v;
          const double dyy = mid.at(c, r + 1) + mid.at(c, r - 1) - 2 * v;
          const double dss = top.at(c, r) + bot.at(c, r) - 2 * v;
          const double dxy = (mid.at(c + 1, r + 1) - mid.at(c - 1, r + 1) - mid.at(c + 1, r - 1) +
                              mid.at(c - 1, r - 1)) / 4.0;
          const double dxs = (top.at(c + 1, r) - top.at(c - 1, r) - bot.at(c + 1, r) + bot.at(c - 1, r)) / 4.0;
          const double dys = (top.at(c, r + 1) - top.at(c, r - 1) - bot.at(c, r + 1) + bot.at(c, r - 1)) / 4.0;
          const double H[3][3] = {{dxx, dxy, dxs}, {dxy, dyy, dys}, {dxs, dys, dss}};
          double off[3];
          if (!solve3(H, g, off)) continue;
          if (std::abs(off[0]) > 1.0 || std::abs(off[1]) > 1.0 || std::abs(off[2]) > 1.0) continue;

          Keypoint kp;
          kp.x = (c + off[0]) * step;
          kp.y = (r + off[1]) * step;
          if (kp.x < 0 || kp.y < 0 || kp.x >= img.width() || kp.y >= img.height()) continue;
          kp.scale = 1.2 / 9.0 * (mid.size + off[2] * (mid.size - bot.size));
          kp.response = v;
          kp.orientation = surf_orientation(ii, kp.x, kp.y, kp.scale);
          Descriptor desc{DescriptorKind::surf64, surf_descriptor(ii, kp.x, kp.y, kp.scale, kp.orientation)};
          out.push_back({kp, std::move(desc)});
        }
      }
    }
  }
  sort_and_truncate(out, cfg.max_keypoints);
  return out;
}

std::vector<Descriptor> describe_at(const GrayImage& img, const std::vector<Keypoint>& pts) {
  const IntegralImage ii(img);
  std::vector<Descriptor> out;
  out.reserve(pts.size());
  for (const auto& p : pts) {
    if (p.x < 0 || p.y < 0 || p.x >= img.width() || p.y >= img.height())
      throw std::out_of_range("describe_at: point outside the image");
    out.push_back({DescriptorKind::surf64_at_fast, surf_descriptor(ii, p.x, p.y, 1.0, p.orientation)});
  }
  return out;
}

}  // namespace roi
