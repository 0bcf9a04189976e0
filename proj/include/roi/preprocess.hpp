#pragma once

#include "roi/image.hpp"

namespace roi {

struct PreprocessParams {
  double beta = 1.0;  // fuzzifier exponent, > 0
  bool enable_fhh = true;
  bool enable_median = true;

  void validate() const;
};

/// Fuzzy histogram hyperbolization with L = 256 gray levels:
///   mu(g) = (g - g_min) / (g_max - g_min)
///   g'    = round(255 * (exp(-mu^beta) - 1) / (exp(-1) - 1))
/// Min/max are taken over the whole image. A constant image is returned
/// unchanged.
GrayImage fuzzy_hyperbolize(const GrayImage& img, double beta);

/// 3x3 median with edge replication at the border.
GrayImage median3(const GrayImage& img);

/// fuzzy_hyperbolize followed by median3, each gated by its flag.
GrayImage preprocess(const GrayImage& img, const PreprocessParams& p);

}  // namespace roi
