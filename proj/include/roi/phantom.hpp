#pragma once

#include <cstdint>
#include <filesystem>

#include "roi/ellipse.hpp"
#include "roi/image.hpp"

namespace roi {

/// Synthetic B-mode-like test image: a mid-gray speckled background with
/// one darker (hypoechoic) axis-aligned elliptical lesion.
struct PhantomParams {
  int width = 256;
  int height = 256;
  double semi_axis_min = 24.0;  // px, both lesion axes drawn from [min, max]
  double semi_axis_max = 40.0;
  double contrast = 60.0;       // background minus lesion echo level
  double background = 128.0;
  double speckle_grain = 2.0;   // px between independent speckle samples
  std::uint64_t seed = 0;

  /// Throws ConfigError when the lesion cannot fit with a 10% margin.
  void validate() const;
};

struct Phantom {
  GrayImage image;
  Mask mask;
  EllipseROI lesion;
};

Phantom generate_phantom(const PhantomParams& p);

/// Writes `count` phantoms as <dir>/images/<id>.png and <dir>/masks/<id>.png,
/// plus groups.json tagging every three consecutive images as one "patient".
/// Image i uses seed derive_seed(master_seed, id).
void write_phantom_suite(const std::filesystem::path& dir, int count, std::uint64_t master_seed,
                         PhantomParams base = {});

std::string phantom_id(int index);

}  // namespace roi
