#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "roi/detect.hpp"

namespace {

// Quarter turn: source pixel (u, v) lands on (H - 1 - v, u).
roi::GrayImage rotate90(const roi::GrayImage& src) {
  roi::GrayImage out(src.height(), src.width());
  for (int v = 0; v < src.height(); ++v)
    for (int u = 0; u < src.width(); ++u) out.at(src.height() - 1 - v, u) = src.at(u, v);
  return out;
}

TEST(Brisk, ConstantImageGivesNothing) {
  roi::DetectorConfig cfg;
  EXPECT_TRUE(roi::detect_brisk(roi::GrayImage(96, 96, 50), cfg).empty());
}

TEST(Brisk, DescriptorsHave512Bits) {
  roi::DetectorConfig cfg;
  const auto feats = roi::detect_brisk(oracle::blocky_image(128, 128, 3), cfg);
  ASSERT_FALSE(feats.empty());
  for (const auto& f : feats) {
    EXPECT_EQ(f.desc.kind, roi::DescriptorKind::brisk512);
    ASSERT_EQ(f.desc.values.size(), static_cast<std::size_t>(roi::kBriskBits));
    for (double v : f.desc.values) EXPECT_TRUE(v == 0.0 || v == 1.0);
    EXPECT_GT(f.kp.scale, 0.0);
    EXPECT_GE(f.kp.x, 0.0);
    EXPECT_LT(f.kp.x, 128.0);
  }
}

TEST(Brisk, Deterministic) {
  roi::DetectorConfig cfg;
  const auto img = oracle::blocky_image(128, 128, 8);
  const auto a = roi::detect_brisk(img, cfg), b = roi::detect_brisk(img, cfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].kp, b[i].kp);
    EXPECT_EQ(a[i].desc, b[i].desc);
  }
}

TEST(Brisk, HammingCountsDifferingBits) {
  roi::Descriptor a{roi::DescriptorKind::brisk512, std::vector<double>(512, 0.0)};
  roi::Descriptor b = a;
  b.values[3] = b.values[100] = b.values[511] = 1.0;
  EXPECT_EQ(roi::hamming(a, b), 3);
  EXPECT_EQ(roi::hamming(b, b), 0);
}

// 192 = 64 * 3 keeps every half- and two-thirds-sampled layer aligned with
// its rotated counterpart, so keypoints reappear at the mapped positions.
TEST(Brisk, QuarterTurnKeepsMatchedDescriptorsClose) {
  roi::DetectorConfig cfg;
  for (std::uint64_t seed : {41, 43, 44, 46}) {
    const auto img = oracle::blocky_image(192, 192, seed);
    const auto a = roi::detect_brisk(img, cfg);
    const auto b = roi::detect_brisk(rotate90(img), cfg);
    ASSERT_FALSE(a.empty());

    std::size_t matched = 0;
    for (const auto& fa : a) {
      const double ex = img.height() - 1 - fa.kp.y, ey = fa.kp.x;
      const roi::Feature* best = nullptr;
      double best_d = 1.0;
      for (const auto& fb : b) {
        const double d = std::hypot(fb.kp.x - ex, fb.kp.y - ey);
        if (d <= best_d && std::abs(std::log(fb.kp.scale / fa.kp.scale)) < 0.2) {
          best_d = d;
          best = &fb;
        }
      }
      if (!best) continue;
      ++matched;
      EXPECT_LE(roi::hamming(fa.desc, best->desc), 96) << "seed " << seed << " keypoint " << fa.kp.x << "," << fa.kp.y;
    }
    EXPECT_GE(matched, a.size() * 9 / 10) << "seed " << seed;
  }
}

}  // namespace
