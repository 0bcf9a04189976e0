#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "roi/error.hpp"

namespace roi {

/// Smallest width/height accepted by the detection pipeline.
inline constexpr int kMinPipelineSize = 32;

/// 8-bit grayscale raster, row-major.
///
/// Coordinates: x is the column (grows rightward), y is the row (grows
/// downward), origin at the top-left pixel. Detectors report keypoints in
/// pixel-index coordinates (the centre of pixel (i, j) is at x = i, y = j).
/// Ellipses and masks use continuous coordinates where pixel (i, j) covers
/// [i, i+1) x [j, j+1).
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  std::uint8_t at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  /// Pixel with coordinates clamped into the image (edge replication).
  std::uint8_t clamped(int x, int y) const;

  std::span<const std::uint8_t> pixels() const { return data_; }
  std::span<std::uint8_t> pixels() { return data_; }
  const std::vector<std::uint8_t>& data() const { return data_; }

  bool operator==(const GrayImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Throws DataError unless both dimensions are at least kMinPipelineSize.
void require_pipeline_size(const GrayImage& img);

/// Exclusive-prefix summed-area table: entry (x, y) holds the sum of all
/// pixels with column < x and row < y. Row 0 and column 0 are zero.
class IntegralImage {
 public:
  IntegralImage() = default;
  explicit IntegralImage(const GrayImage& img);

  /// Dimensions of the source image (the table is one larger in each axis).
  int width() const { return width_; }
  int height() const { return height_; }

  std::int64_t entry(int x, int y) const {
    return table_[static_cast<std::size_t>(y) * (width_ + 1) + x];
  }

  /// Sum over the w x h rectangle with top-left corner (x, y).
  /// Throws std::out_of_range if the rectangle leaves the image.
  std::int64_t box_sum(int x, int y, int w, int h) const;

  /// Sum over [x0, x1) x [y0, y1) where out-of-image pixels take the value
  /// of the nearest edge pixel. Any rectangle is accepted; empty ones give 0.
  std::int64_t replicated_sum(int x0, int y0, int x1, int y1) const;

 private:
  std::int64_t unchecked(int x, int y, int w, int h) const {
    return entry(x + w, y + h) - entry(x, y + h) - entry(x + w, y) + entry(x, y);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::int64_t> table_;
};

inline IntegralImage integral(const GrayImage& img) { return IntegralImage(img); }

enum class ImageFormat { png, pgm };

/// Decodes PNG or binary PGM (P5) bytes. Color PNGs are converted to gray by
/// the plain average (R + G + B) / 3, rounded; alpha is composited
/// onto black.
/// Throws DataError on malformed data or 16-bit samples.
GrayImage decode_image(std::span<const std::uint8_t> bytes);
GrayImage load_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_image(const GrayImage& img, ImageFormat fmt);
/// Format is picked from the extension: .pgm writes P5, anything else PNG.
void save_image(const GrayImage& img, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace roi
