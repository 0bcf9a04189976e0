#include "roi/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace roi {

GrayImage::GrayImage(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw std::invalid_argument("negative image dimensions");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0) throw std::invalid_argument("negative image dimensions");
  if (data_.size() != static_cast<std::size_t>(width) * height)
    throw std::invalid_argument("pixel buffer length does not match width x height");
}

std::uint8_t GrayImage::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return at(x, y);
}

void require_pipeline_size(const GrayImage& img) {
  if (img.width() < kMinPipelineSize || img.height() < kMinPipelineSize)
    throw DataError("dimensions below minimum: " + std::to_string(img.width()) + "x" +
                    std::to_string(img.height()) + " (need at least " +
                    std::to_string(kMinPipelineSize) + ")");
}

IntegralImage::IntegralImage(const GrayImage& img) : width_(img.width()), height_(img.height()) {
  const std::size_t stride = static_cast<std::size_t>(width_) + 1;
  table_.assign(stride * (static_cast<std::size_t>(height_) + 1), 0);
  for (int y = 0; y < height_; ++y) {
    std::int64_t row = 0;
    for (int x = 0; x < width_; ++x) {
      row += img.at(x, y);
      table_[(y + 1) * stride + x + 1] = table_[y * stride + x + 1] + row;
    }
  }
}

std::int64_t IntegralImage::box_sum(int x, int y, int w, int h) const {
  if (w < 0 || h < 0 || x < 0 || y < 0 || x + w > width_ || y + h > height_)
    throw std::out_of_range("rectangle out of bounds");
  return unchecked(x, y, w, h);
}

namespace {

// One axis of an edge-replicated range: up to three spans of real pixels,
// each counted `mult` times.
struct Span {
  int start;
  int len;
  std::int64_t mult;
};

int split_axis(int a0, int a1, int n, Span out[3]) {
  int count = 0;
  if (a1 <= a0) return 0;
  const int before = std::min(a1, 0) - a0;  // pixels left of 0, clamp to index 0
  if (before > 0) out[count++] = {0, 1, before};
  const int lo = std::max(a0, 0), hi = std::min(a1, n);
  if (hi > lo) out[count++] = {lo, hi - lo, 1};
  const int after = a1 - std::max(a0, n);  // pixels at or beyond n, clamp to n-1
  if (after > 0) out[count++] = {n - 1, 1, after};
  return count;
}

}  // namespace

std::int64_t IntegralImage::replicated_sum(int x0, int y0, int x1, int y1) const {
  if (width_ == 0 || height_ == 0) return 0;
  Span xs[3], ys[3];
  const int nx = split_axis(x0, x1, width_, xs);
  const int ny = split_axis(y0, y1, height_, ys);
  std::int64_t total = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      total += xs[i].mult * ys[j].mult * unchecked(xs[i].start, ys[j].start, xs[i].len, ys[j].len);
  return total;
}

// ---------------------------------------------------------------------------
// PGM (P5)

namespace {

bool is_pgm(std::span<const std::uint8_t> b) { return b.size() >= 2 && b[0] == 'P' && b[1] == '5'; }

bool is_png(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  return b.size() >= 8 && std::memcmp(b.data(), sig, 8) == 0;
}

GrayImage decode_pgm(std::span<const std::uint8_t> b) {
  std::size_t pos = 2;
  auto next_int = [&]() -> long {
    while (pos < b.size()) {
      if (b[pos] == '#') {
        while (pos < b.size() && b[pos] != '\n') ++pos;
      } else if (std::isspace(b[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= b.size() || !std::isdigit(b[pos])) throw DataError("unreadable file: bad PGM header");
    long v = 0;
    while (pos < b.size() && std::isdigit(b[pos])) {
      v = v * 10 + (b[pos++] - '0');
      if (v > (1L << 24)) throw DataError("unreadable file: PGM header value too large");
    }
    return v;
  };
  const long w = next_int();
  const long h = next_int();
  const long maxval = next_int();
  if (maxval <= 0) throw DataError("unreadable file: bad PGM maxval");
  if (maxval > 255) throw DataError("unsupported bit depth: 16-bit PGM");
  if (pos >= b.size() || !std::isspace(b[pos])) throw DataError("unreadable file: bad PGM header");
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (b.size() - pos < n) throw DataError("unreadable file: truncated PGM data");
  std::vector<std::uint8_t> data(b.begin() + pos, b.begin() + pos + n);
  if (maxval != 255)
    for (auto& v : data) v = static_cast<std::uint8_t>(std::min<long>(255, (v * 255L + maxval / 2) / maxval));
  return GrayImage(static_cast<int>(w), static_cast<int>(h), std::move(data));
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels().begin(), img.pixels().end());
  return out;
}

// ---------------------------------------------------------------------------
// PNG via the libpng simplified API

GrayImage decode_png(std::span<const std::uint8_t> b) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, b.data(), b.size()))
    throw DataError(std::string("unreadable file: ") + image.message);
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw DataError("unsupported bit depth: 16-bit PNG");
  }
  const bool color = image.format & PNG_FORMAT_FLAG_COLOR;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  // buf is zeroed, so any alpha channel is composited onto black.
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw DataError("unreadable file: " + msg);
  }
  const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
  if (!color) return GrayImage(w, h, std::move(buf));
  std::vector<std::uint8_t> gray(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const int s = buf[3 * i] + buf[3 * i + 1] + buf[3 * i + 2];
    gray[i] = static_cast<std::uint8_t>((s + 1) / 3);
  }
  return GrayImage(w, h, std::move(gray));
}

std::vector<std::uint8_t> encode_png(const GrayImage& img) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, img.data().data(), 0, nullptr))
    throw DataError(std::string("PNG encode failed: ") + image.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.data().data(), 0, nullptr))
    throw DataError(std::string("PNG encode failed: ") + image.message);
  out.resize(size);
  return out;
}

}  // namespace

GrayImage decode_image(std::span<const std::uint8_t> bytes) {
  if (is_pgm(bytes)) return decode_pgm(bytes);
  if (is_png(bytes)) return decode_png(bytes);
  throw DataError("unreadable file: not a PNG or binary PGM image");
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("unreadable file: cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

GrayImage load_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_image(bytes);
  } catch (const DataError& e) {
    throw DataError(std::string(e.what()) + " (" + path.string() + ")");
  }
}

std::vector<std::uint8_t> encode_image(const GrayImage& img, ImageFormat fmt) {
  return fmt == ImageFormat::pgm ? encode_pgm(img) : encode_png(img);
}

void save_image(const GrayImage& img, const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  const auto bytes = encode_image(img, ext == ".pgm" ? ImageFormat::pgm : ImageFormat::png);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace roi
