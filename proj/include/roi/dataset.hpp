#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "roi/features.hpp"

namespace roi {

struct DatasetRecord {
  std::string id;
  std::filesystem::path image;
  std::filesystem::path mask;
  std::optional<SeedPoint> seed;  // recorded click, if any
  std::string group;              // defaults to the id
};

/// Directory layout:
///   <root>/images/<id>.(png|pgm)
///   <root>/masks/<id>.(png|pgm)
///   <root>/seeds.json   optional {"<id>": {"x": .., "y": ..}}
///   <root>/groups.json  optional {"<id>": "<group>"}
/// Records are sorted by id.
struct Dataset {
  std::string name;
  std::vector<DatasetRecord> records;
};

/// Throws DataError for a missing directory, an image without a mask, or an
/// unparsable seeds/groups file.
Dataset load_dataset(const std::filesystem::path& root);

}  // namespace roi
