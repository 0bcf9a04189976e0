#include "roi/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace roi {

void PreprocessParams::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("fhh beta must be > 0");
}

GrayImage fuzzy_hyperbolize(const GrayImage& img, double beta) {
  if (!(beta > 0.0)) throw ConfigError("fhh beta must be > 0");
  if (img.empty()) return img;
  const auto [lo_it, hi_it] = std::minmax_element(img.pixels().begin(), img.pixels().end());
  const int lo = *lo_it, hi = *hi_it;
  if (lo == hi) return img;

  std::array<std::uint8_t, 256> lut{};
  const double denom = std::exp(-1.0) - 1.0;
  for (int g = lo; g <= hi; ++g) {
    const double mu = static_cast<double>(g - lo) / (hi - lo);
    const double v = 255.0 * (std::exp(-std::pow(mu, beta)) - 1.0) / denom;
    lut[g] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  GrayImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = lut[src[i]];
  return out;
}

GrayImage median3(const GrayImage& img) {
  GrayImage out(img.width(), img.height());
  std::array<std::uint8_t, 9> win{};
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      int k = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) win[k++] = img.clamped(x + dx, y + dy);
      std::nth_element(win.begin(), win.begin() + 4, win.end());
      out.at(x, y) = win[4];
    }
  }
  return out;
}

GrayImage preprocess(const GrayImage& img, const PreprocessParams& p) {
  p.validate();
  GrayImage out = p.enable_fhh ? fuzzy_hyperbolize(img, p.beta) : img;
  if (p.enable_median) out = median3(out);
  return out;
}

}  // namespace roi
