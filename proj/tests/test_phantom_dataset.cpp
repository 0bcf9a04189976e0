#include <gtest/gtest.h>

#include <fstream>

#include <json.hpp>

#include "roi/dataset.hpp"
#include "roi/phantom.hpp"
#include "roi/random.hpp"
#include "tmpdir.hpp"

namespace {

struct RegionMeans {
  double inside = 0.0;
  double outside = 0.0;
};

RegionMeans region_means(const roi::Phantom& ph) {
  double si = 0, so = 0;
  long ni = 0, no = 0;
  for (int y = 0; y < ph.image.height(); ++y)
    for (int x = 0; x < ph.image.width(); ++x) {
      if (ph.mask.at(x, y)) {
        si += ph.image.at(x, y);
        ++ni;
      } else {
        so += ph.image.at(x, y);
        ++no;
      }
    }
  return {si / ni, so / no};
}

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST(Phantom, SameSeedIsBitIdentical) {
  roi::PhantomParams p;
  p.seed = 123;
  const auto a = roi::generate_phantom(p), b = roi::generate_phantom(p);
  EXPECT_EQ(a.image.data(), b.image.data());
  EXPECT_EQ(a.mask, b.mask);
  p.seed = 124;
  EXPECT_NE(roi::generate_phantom(p).image.data(), a.image.data());
}

TEST(Phantom, MaskIsTheRasterizedLesion) {
  roi::PhantomParams p;
  p.seed = 5;
  const auto ph = roi::generate_phantom(p);
  EXPECT_EQ(ph.mask, roi::rasterize(ph.lesion, p.width, p.height));
  const double margin = 0.1 * 256;
  EXPECT_GE(ph.lesion.cx - ph.lesion.rx, margin);
  EXPECT_LE(ph.lesion.cx + ph.lesion.rx, 256 - margin);
  EXPECT_GE(ph.lesion.cy - ph.lesion.ry, margin);
  EXPECT_LE(ph.lesion.cy + ph.lesion.ry, 256 - margin);
}

TEST(Phantom, LesionIsDarkerByHalfTheContrast) {
  for (double delta : {40.0, 60.0, 100.0}) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      roi::PhantomParams p;
      p.contrast = delta;
      p.seed = s;
      const auto m = region_means(roi::generate_phantom(p));
      EXPECT_LT(m.inside, m.outside - delta / 2) << "delta " << delta << " seed " << s;
    }
  }
}

TEST(Phantom, ZeroContrastKeepsValidMask) {
  roi::PhantomParams p;
  p.contrast = 0;
  p.seed = 8;
  const auto ph = roi::generate_phantom(p);
  EXPECT_GT(ph.mask.count(), 0u);
  const auto m = region_means(ph);
  EXPECT_NEAR(m.inside, m.outside, 10.0);
}

TEST(Phantom, InfeasibleParamsThrowConfigError) {
  roi::PhantomParams p;
  p.semi_axis_max = 120;
  EXPECT_THROW(roi::generate_phantom(p), roi::ConfigError);
  p = {};
  p.semi_axis_min = 50;
  p.semi_axis_max = 40;
  EXPECT_THROW(p.validate(), roi::ConfigError);
  p = {};
  p.contrast = -1;
  EXPECT_THROW(p.validate(), roi::ConfigError);
  p = {};
  p.width = 16;
  EXPECT_THROW(p.validate(), roi::ConfigError);
}

TEST(PhantomSuite, WritesLoadableDatasetWithGroups) {
  TempDir dir;
  roi::PhantomParams base;
  base.width = base.height = 96;
  base.semi_axis_min = 10;
  base.semi_axis_max = 20;
  roi::write_phantom_suite(dir.path(), 7, 7, base);
  const auto ds = roi::load_dataset(dir.path());
  ASSERT_EQ(ds.records.size(), 7u);
  EXPECT_EQ(ds.records[0].id, "phantom_000");
  EXPECT_EQ(ds.records[6].id, "phantom_006");
  EXPECT_EQ(ds.records[0].group, ds.records[2].group);
  EXPECT_NE(ds.records[2].group, ds.records[3].group);
  EXPECT_FALSE(ds.records[0].seed);

  base.seed = roi::derive_seed(7, "phantom_004");
  const auto ph = roi::generate_phantom(base);
  EXPECT_EQ(roi::load_image(ds.records[4].image).data(), ph.image.data());
  EXPECT_EQ(roi::Mask::from_image(roi::load_image(ds.records[4].mask)), ph.mask);
}

TEST(PhantomSuite, ImageSeedDoesNotDependOnCount) {
  TempDir a, b;
  roi::PhantomParams base;
  base.width = base.height = 64;
  base.semi_axis_min = 8;
  base.semi_axis_max = 12;
  roi::write_phantom_suite(a.path(), 2, 99, base);
  roi::write_phantom_suite(b.path(), 4, 99, base);
  EXPECT_EQ(roi::load_image(a / "images/phantom_001.png").data(),
            roi::load_image(b / "images/phantom_001.png").data());
}

TEST(Dataset, ReadsSeedsAndSortsById) {
  TempDir dir;
  std::filesystem::create_directories(dir / "images");
  std::filesystem::create_directories(dir / "masks");
  roi::GrayImage img(40, 40, 100);
  for (const char* id : {"b", "a", "c"}) {
    roi::save_image(img, dir / "images" / (std::string(id) + ".png"));
    roi::save_image(img, dir / "masks" / (std::string(id) + ".pgm"));
  }
  write_text(dir / "seeds.json", R"({"a": {"x": 3.5, "y": 4}, "zzz": {"x": 1, "y": 1}})");
  const auto ds = roi::load_dataset(dir.path());
  ASSERT_EQ(ds.records.size(), 3u);
  EXPECT_EQ(ds.records[0].id, "a");
  EXPECT_EQ(ds.records[1].id, "b");
  ASSERT_TRUE(ds.records[0].seed);
  EXPECT_DOUBLE_EQ(ds.records[0].seed->x, 3.5);
  EXPECT_DOUBLE_EQ(ds.records[0].seed->y, 4.0);
  EXPECT_FALSE(ds.records[1].seed);
  EXPECT_EQ(ds.records[1].group, "b");
}

TEST(Dataset, ErrorsAreDataErrors) {
  TempDir dir;
  EXPECT_THROW(roi::load_dataset(dir.path()), roi::DataError);
  std::filesystem::create_directories(dir / "images");
  EXPECT_THROW(roi::load_dataset(dir.path()), roi::DataError);
  std::filesystem::create_directories(dir / "masks");
  roi::save_image(roi::GrayImage(40, 40, 1), dir / "images/x.png");
  EXPECT_THROW(roi::load_dataset(dir.path()), roi::DataError);
  roi::save_image(roi::GrayImage(40, 40, 1), dir / "masks/x.png");
  EXPECT_NO_THROW(roi::load_dataset(dir.path()));
  write_text(dir / "seeds.json", "{not json");
  EXPECT_THROW(roi::load_dataset(dir.path()), roi::DataError);
  write_text(dir / "seeds.json", R"({"x": {"x": "left"}})");
  EXPECT_THROW(roi::load_dataset(dir.path()), roi::DataError);
}
