#include "roi/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "roi/random.hpp"

namespace roi {

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

Mask Mask::from_image(const GrayImage& img) {
  Mask m(img.width(), img.height());
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) m.bits[i] = px[i] > 127 ? 1 : 0;
  return m;
}

GrayImage Mask::to_image() const {
  GrayImage img(width, height);
  auto px = img.pixels();
  for (std::size_t i = 0; i < bits.size(); ++i) px[i] = bits[i] ? 255 : 0;
  return img;
}

// ---------------------------------------------------------------------------

GroundTruth::GroundTruth(const Mask& mask) : mask_(mask.width, mask.height) {
  const int w = mask.width, h = mask.height;
  std::vector<int> comp(mask.bits.size(), -1);
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.bits.size(); ++start) {
    if (!mask.bits[start] || comp[start] >= 0) continue;
    const int id = static_cast<int>(sizes.size());
    std::size_t n = 0;
    comp[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++n;
      const int x = static_cast<int>(p % w), y = static_cast<int>(p / w);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
          if (mask.bits[q] && comp[q] < 0) {
            comp[q] = id;
            stack.push_back(q);
          }
        }
    }
    sizes.push_back(n);
  }
  if (sizes.empty()) throw DataError("ground truth mask has no tumour pixels");
  // Largest component; the first one found wins ties.
  const int keep = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

  x0_ = w;
  y0_ = h;
  x1_ = -1;
  y1_ = -1;
  double sx = 0.0, sy = 0.0;
  for (std::size_t p = 0; p < comp.size(); ++p) {
    if (comp[p] != keep) continue;
    const int x = static_cast<int>(p % w), y = static_cast<int>(p / w);
    mask_.bits[p] = 1;
    x0_ = std::min(x0_, x);
    y0_ = std::min(y0_, y);
    x1_ = std::max(x1_, x);
    y1_ = std::max(y1_, y);
    sx += x;
    sy += y;
  }
  cx_ = sx / static_cast<double>(sizes[keep]);
  cy_ = sy / static_cast<double>(sizes[keep]);
}

AspectStats aspect_stats(std::span<const GroundTruth* const> gts) {
  if (gts.empty()) throw DataError("aspect_stats needs at least one ground truth");
  double w = 0.0, h = 0.0;
  for (const auto* g : gts) {
    w += g->bbox_width();
    h += g->bbox_height();
  }
  const double n = static_cast<double>(gts.size());
  return {w / n, h / n};
}

AspectStats aspect_stats(const std::vector<GroundTruth>& gts) {
  std::vector<const GroundTruth*> ptrs;
  for (const auto& g : gts) ptrs.push_back(&g);
  return aspect_stats(ptrs);
}

double weighted_distance(const Keypoint& kp, const SeedPoint& seed, const AspectStats& stats) {
  const double dx = kp.x - seed.x;
  const double dy = stats.ratio() * (kp.y - seed.y);
  return std::sqrt(dx * dx + dy * dy);
}

SeedPoint simulate_seed(const GroundTruth& gt, double jitter_fraction, std::uint64_t seed) {
  Rng rng(seed);
  const double radius = jitter_fraction * std::hypot(gt.bbox_width(), gt.bbox_height());
  double ox = 0.0, oy = 0.0;
  if (radius > 0.0) {
    do {
      ox = rng.uniform(-1.0, 1.0);
      oy = rng.uniform(-1.0, 1.0);
    } while (ox * ox + oy * oy > 1.0);
  }
  const int w = gt.mask().width, h = gt.mask().height;
  return {std::clamp(gt.centroid_x() + radius * ox, 0.0, w - 1.0),
          std::clamp(gt.centroid_y() + radius * oy, 0.0, h - 1.0), SeedPoint::Source::simulated_from_gt};
}

// ---------------------------------------------------------------------------

FeatureMatrix build_matrix(std::span<const Keypoint> kps, std::span<const Descriptor> descs,
                           const SeedPoint& seed, const AspectStats& stats, bool with_distance) {
  if (kps.size() != descs.size()) throw std::invalid_argument("keypoint and descriptor counts differ");
  FeatureMatrix m;
  m.has_distance_column = with_distance;
  std::size_t m_desc = 64;
  if (!descs.empty()) {
    m.kind = descs[0].kind;
    m_desc = descs[0].values.size();
  }
  for (const auto& d : descs) {
    if (d.kind != m.kind) throw std::invalid_argument("mixed descriptor kinds");
    if (d.values.size() != m_desc) throw std::invalid_argument("descriptor lengths differ");
  }
  m.rows = kps.size();
  m.cols = m_desc + (with_distance ? 1 : 0);
  m.values.reserve(m.rows * m.cols);
  for (std::size_t j = 0; j < kps.size(); ++j) {
    const double d = weighted_distance(kps[j], seed, stats);
    m.values.insert(m.values.end(), descs[j].values.begin(), descs[j].values.end());
    if (with_distance) m.values.push_back(d);
    m.xs.push_back(kps[j].x);
    m.ys.push_back(kps[j].y);
    m.distance.push_back(d);
  }
  return m;
}

FeatureMatrix build_matrix(std::span<const Feature> feats, const SeedPoint& seed, const AspectStats& stats,
                           bool with_distance) {
  std::vector<Keypoint> kps;
  std::vector<Descriptor> descs;
  kps.reserve(feats.size());
  descs.reserve(feats.size());
  for (const auto& f : feats) {
    kps.push_back(f.kp);
    descs.push_back(f.desc);
  }
  return build_matrix(kps, descs, seed, stats, with_distance);
}

std::vector<Label> label_points(std::span<const double> xs, std::span<const double> ys, const GroundTruth& gt) {
  const Mask& m = gt.mask();
  std::vector<Label> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const int x = std::clamp(static_cast<int>(std::lround(xs[i])), 0, m.width - 1);
    const int y = std::clamp(static_cast<int>(std::lround(ys[i])), 0, m.height - 1);
    out.push_back(m.at(x, y) ? Label::tumour : Label::non_tumour);
  }
  return out;
}

std::vector<Label> label_keypoints(std::span<const Keypoint> kps, const GroundTruth& gt) {
  std::vector<double> xs, ys;
  for (const auto& k : kps) {
    xs.push_back(k.x);
    ys.push_back(k.y);
  }
  return label_points(xs, ys, gt);
}

void append_rows(FeatureMatrix& dst, const FeatureMatrix& src) {
  if (dst.rows == 0 && dst.values.empty()) {
    dst = src;
    return;
  }
  if (src.rows == 0) return;
  if (dst.cols != src.cols) throw std::invalid_argument("append_rows: column counts differ");
  if (dst.kind != src.kind) throw std::invalid_argument("append_rows: mixed descriptor kinds");
  if (dst.labelled() != src.labelled()) throw std::invalid_argument("append_rows: mixed labelled/unlabelled");
  dst.values.insert(dst.values.end(), src.values.begin(), src.values.end());
  dst.xs.insert(dst.xs.end(), src.xs.begin(), src.xs.end());
  dst.ys.insert(dst.ys.end(), src.ys.begin(), src.ys.end());
  dst.distance.insert(dst.distance.end(), src.distance.begin(), src.distance.end());
  dst.labels.insert(dst.labels.end(), src.labels.begin(), src.labels.end());
  dst.rows += src.rows;
}

FeatureMatrix select_rows(const FeatureMatrix& m, std::span<const std::size_t> idx) {
  FeatureMatrix out;
  out.cols = m.cols;
  out.kind = m.kind;
  out.has_distance_column = m.has_distance_column;
  out.rows = idx.size();
  out.values.reserve(idx.size() * m.cols);
  for (std::size_t i : idx) {
    auto r = m.row(i);
    out.values.insert(out.values.end(), r.begin(), r.end());
    out.xs.push_back(m.xs[i]);
    out.ys.push_back(m.ys[i]);
    out.distance.push_back(m.distance[i]);
    if (m.labelled()) out.labels.push_back(m.labels[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

ScalerStats fit_scaler(const FeatureMatrix& train) {
  if (train.rows == 0) throw std::invalid_argument("cannot fit a scaler on an empty matrix");
  ScalerStats s;
  s.mean.assign(train.cols, 0.0);
  s.scale.assign(train.cols, 1.0);
  const double n = static_cast<double>(train.rows);
  for (std::size_t i = 0; i < train.rows; ++i) {
    auto r = train.row(i);
    for (std::size_t c = 0; c < train.cols; ++c) s.mean[c] += r[c];
  }
  for (auto& v : s.mean) v /= n;
  std::vector<double> var(train.cols, 0.0);
  for (std::size_t i = 0; i < train.rows; ++i) {
    auto r = train.row(i);
    for (std::size_t c = 0; c < train.cols; ++c) {
      const double d = r[c] - s.mean[c];
      var[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < train.cols; ++c) {
    const double sd = std::sqrt(var[c] / n);
    if (sd > 1e-12 * std::max(1.0, std::abs(s.mean[c]))) {
      s.scale[c] = sd;
    } else {
      s.mean[c] = 0.0;  // zero variance: pass through
      s.scale[c] = 1.0;
    }
  }
  return s;
}

void ScalerStats::apply(std::span<double> row) const {
  if (row.size() != mean.size()) throw std::invalid_argument("scaler dimension mismatch");
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mean[c]) / scale[c];
}

void ScalerStats::apply(FeatureMatrix& m) const {
  if (m.rows > 0 && m.cols != mean.size()) throw std::invalid_argument("scaler dimension mismatch");
  for (std::size_t i = 0; i < m.rows; ++i) apply(m.row(i));
}

Standardized standardize(const FeatureMatrix& train, const FeatureMatrix& test) {
  Standardized out{train, test, fit_scaler(train)};
  out.stats.apply(out.train);
  out.stats.apply(out.test);
  return out;
}

void write_csv(const FeatureMatrix& m, std::ostream& out) {
  const std::size_t m_desc = m.cols - (m.has_distance_column ? 1 : 0);
  for (std::size_t c = 0; c < m_desc; ++c) out << 'f' << c << ',';
  out << "dist,label,x,y\n";
  const auto prec = out.precision(17);
  for (std::size_t i = 0; i < m.rows; ++i) {
    auto r = m.row(i);
    for (std::size_t c = 0; c < m_desc; ++c) out << r[c] << ',';
    out << m.distance[i] << ',';
    if (m.labelled()) out << (m.labels[i] == Label::tumour ? 1 : 0);
    out << ',' << m.xs[i] << ',' << m.ys[i] << '\n';
  }
  out.precision(prec);
}

}  // namespace roi
