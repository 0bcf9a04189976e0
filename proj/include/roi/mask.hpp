#pragma once

#include <cstdint>
#include <vector>

#include "roi/image.hpp"

namespace roi {

/// Binary raster; any nonzero byte is "set".
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v = true) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::size_t count() const;

  /// Pixels > 127 are set.
  static Mask from_image(const GrayImage& img);
  /// 0 / 255 image.
  GrayImage to_image() const;

  bool operator==(const Mask&) const = default;
};

}  // namespace roi
