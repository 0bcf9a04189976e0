#include "roi/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include <json.hpp>

#include "roi/random.hpp"

namespace roi {

void PhantomParams::validate() const {
  if (width < kMinPipelineSize || height < kMinPipelineSize) throw ConfigError("phantom smaller than 32x32");
  if (!(semi_axis_min > 0.0) || semi_axis_max < semi_axis_min) throw ConfigError("bad lesion semi-axis range");
  if (!(speckle_grain > 0.0)) throw ConfigError("speckle grain must be > 0");
  if (contrast < 0.0 || contrast > background) throw ConfigError("lesion contrast must be in [0, background]");
  const double margin = 0.1 * std::min(width, height);
  if (2.0 * (semi_axis_max + margin) > width || 2.0 * (semi_axis_max + margin) > height)
    throw ConfigError("infeasible lesion size for the image dimensions");
}

Phantom generate_phantom(const PhantomParams& p) {
  p.validate();
  Rng rng(p.seed);
  const double margin = 0.1 * std::min(p.width, p.height);
  EllipseROI lesion;
  lesion.rx = rng.uniform(p.semi_axis_min, p.semi_axis_max);
  lesion.ry = rng.uniform(p.semi_axis_min, p.semi_axis_max);
  lesion.cx = rng.uniform(margin + lesion.rx, p.width - margin - lesion.rx);
  lesion.cy = rng.uniform(margin + lesion.ry, p.height - margin - lesion.ry);

  Phantom out;
  out.lesion = lesion;
  out.mask = rasterize(lesion, p.width, p.height);

  // Rayleigh-distributed speckle with unit mean on a coarse grid, bilinearly
  // interpolated to pixels.
  const int gw = static_cast<int>(std::ceil(p.width / p.speckle_grain)) + 2;
  const int gh = static_cast<int>(std::ceil(p.height / p.speckle_grain)) + 2;
  const double rayleigh_mean = std::sqrt(std::numbers::pi / 2.0);
  std::vector<double> grid(static_cast<std::size_t>(gw) * gh);
  for (auto& g : grid) g = std::sqrt(-2.0 * std::log1p(-rng.uniform())) / rayleigh_mean;

  out.image = GrayImage(p.width, p.height);
  for (int y = 0; y < p.height; ++y) {
    const double gy = y / p.speckle_grain;
    const int iy = static_cast<int>(gy);
    const double fy = gy - iy;
    for (int x = 0; x < p.width; ++x) {
      const double gx = x / p.speckle_grain;
      const int ix = static_cast<int>(gx);
      const double fx = gx - ix;
      auto at = [&](int a, int b) { return grid[static_cast<std::size_t>(b) * gw + a]; };
      const double n = (1 - fy) * ((1 - fx) * at(ix, iy) + fx * at(ix + 1, iy)) +
                       fy * ((1 - fx) * at(ix, iy + 1) + fx * at(ix + 1, iy + 1));
      const double echo = out.mask.at(x, y) ? p.background - p.contrast : p.background;
      out.image.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(echo * n), 0L, 255L));
    }
  }
  return out;
}

std::string phantom_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "phantom_%03d", index);
  return buf;
}

void write_phantom_suite(const std::filesystem::path& dir, int count, std::uint64_t master_seed,
                         PhantomParams base) {
  if (count < 1) throw ConfigError("phantom count must be >= 1");
  base.validate();
  std::filesystem::create_directories(dir / "images");
  std::filesystem::create_directories(dir / "masks");
  nlohmann::json groups = nlohmann::json::object();
  for (int i = 0; i < count; ++i) {
    const std::string id = phantom_id(i);
    PhantomParams p = base;
    p.seed = derive_seed(master_seed, id);
    const Phantom ph = generate_phantom(p);
    save_image(ph.image, dir / "images" / (id + ".png"));
    save_image(ph.mask.to_image(), dir / "masks" / (id + ".png"));
    char g[32];
    std::snprintf(g, sizeof g, "patient_%02d", i / 3);
    groups[id] = g;
  }
  std::ofstream(dir / "groups.json") << groups.dump(2) << '\n';
}

}  // namespace roi
