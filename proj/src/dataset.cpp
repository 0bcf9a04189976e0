#include "roi/dataset.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace roi {

namespace {

bool is_image_ext(const std::filesystem::path& p) {
  const auto e = p.extension().string();
  return e == ".png" || e == ".pgm" || e == ".PNG" || e == ".PGM";
}

nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed " + p.string() + ": " + e.what());
  }
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  const fs::path images = root / "images", masks = root / "masks";
  if (!fs::is_directory(images)) throw DataError("dataset has no images/ directory: " + root.string());
  if (!fs::is_directory(masks)) throw DataError("dataset has no masks/ directory: " + root.string());

  Dataset ds;
  ds.name = root.filename().string();
  if (ds.name.empty()) ds.name = root.parent_path().filename().string();
  for (const auto& entry : fs::directory_iterator(images)) {
    if (!entry.is_regular_file() || !is_image_ext(entry.path())) continue;
    DatasetRecord r;
    r.id = entry.path().stem().string();
    r.image = entry.path();
    for (const char* ext : {".png", ".pgm", ".PNG", ".PGM"}) {
      if (fs::exists(masks / (r.id + ext))) {
        r.mask = masks / (r.id + ext);
        break;
      }
    }
    if (r.mask.empty()) throw DataError("image " + r.id + " has no ground-truth mask");
    r.group = r.id;
    ds.records.push_back(std::move(r));
  }
  std::sort(ds.records.begin(), ds.records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  if (fs::exists(root / "seeds.json")) {
    const auto j = read_json(root / "seeds.json");
    for (auto& r : ds.records) {
      if (!j.contains(r.id)) continue;
      const auto& s = j.at(r.id);
      try {
        r.seed = SeedPoint{s.at("x").get<double>(), s.at("y").get<double>(), SeedPoint::Source::user_click};
      } catch (const nlohmann::json::exception& e) {
        throw DataError("bad seed for " + r.id + ": " + e.what());
      }
    }
  }
  if (fs::exists(root / "groups.json")) {
    const auto j = read_json(root / "groups.json");
    for (auto& r : ds.records)
      if (j.contains(r.id) && j.at(r.id).is_string()) r.group = j.at(r.id).get<std::string>();
  }
  return ds;
}

}  // namespace roi
