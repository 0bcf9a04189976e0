#include <cstdlib>

#include "roi/detect.hpp"

namespace roi {

int fast_score(const GrayImage& img, int x, int y, int threshold, int arc) {
  const int p = img.at(x, y);
  int state[16];
  int diff[16];
  for (int k = 0; k < 16; ++k) {
    const int v = img.at(x + kFastCircle[k][0], y + kFastCircle[k][1]);
    diff[k] = std::abs(v - p);
    state[k] = v > p + threshold ? 1 : (v < p - threshold ? -1 : 0);
  }

  // Longest circular run of equal nonzero state. A qualifying arc has length
  // >= 9 > 16/2, so at most one run can qualify.
  int best_len = 0, best_end = -1;
  int run = 0;
  for (int i = 0; i < 32; ++i) {
    const int k = i & 15;
    const int prev = (i + 15) & 15;
    if (state[k] != 0 && i > 0 && state[k] == state[prev])
      ++run;
    else
      run = state[k] != 0 ? 1 : 0;
    if (run > 16) run = 16;
    if (run > best_len) {
      best_len = run;
      best_end = i;
    }
  }
  if (best_len < arc) return 0;
  int score = 0;
  for (int i = best_end - best_len + 1; i <= best_end; ++i) score += diff[i & 15];
  return score;
}

namespace {

std::vector<int> score_map(const GrayImage& img, int threshold, int arc) {
  std::vector<int> scores(img.size(), 0);
  for (int y = kFastMargin; y < img.height() - kFastMargin; ++y)
    for (int x = kFastMargin; x < img.width() - kFastMargin; ++x)
      scores[static_cast<std::size_t>(y) * img.width() + x] = fast_score(img, x, y, threshold, arc);
  return scores;
}

}  // namespace

std::vector<Keypoint> fast_corners(const GrayImage& img, int threshold, int arc) {
  const auto scores = score_map(img, threshold, arc);
  std::vector<Keypoint> out;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (const int s = scores[static_cast<std::size_t>(y) * img.width() + x]; s > 0)
        out.push_back({double(x), double(y), 1.0, double(s), 0.0});
  return out;
}

std::vector<Keypoint> detect_fast(const GrayImage& img, const DetectorConfig& cfg) {
  cfg.validate();
  const int w = img.width();
  const auto scores = score_map(img, cfg.fast_threshold, cfg.fast_arc);
  std::vector<Keypoint> out;
  for (int y = kFastMargin; y < img.height() - kFastMargin; ++y) {
    for (int x = kFastMargin; x < w - kFastMargin; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      const int s = scores[idx];
      if (s == 0) continue;
      // Suppressed by a stronger neighbour, or an equal one earlier in raster order.
      bool keep = true;
      for (int dy = -1; dy <= 1 && keep; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int n = scores[static_cast<std::size_t>(y + dy) * w + x + dx];
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          if (n > s || (n == s && earlier)) {
            keep = false;
            break;
          }
        }
      }
      if (keep) out.push_back({double(x), double(y), 1.0, double(s), 0.0});
    }
  }
  sort_and_truncate(out, cfg.max_keypoints);
  return out;
}

}  // namespace roi
