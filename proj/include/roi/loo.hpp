#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "roi/dataset.hpp"
#include "roi/report.hpp"

namespace roi {

struct LooOptions {
  std::uint64_t master_seed = 42;
  int workers = 1;
  /// Hold out every image of the test image's group instead of just the image.
  bool leave_group_out = false;
};

/// A dataset record with its image and ground truth in memory and its
/// click resolved (recorded, or simulated from the ground truth with seed
/// derive_seed(master, id)).
struct LoadedRecord {
  DatasetRecord record;
  GrayImage image;
  GroundTruth truth;
  SeedPoint seed;
};

/// Throws DataError for unreadable files or image/mask size mismatches.
std::vector<LoadedRecord> load_records(const Dataset& ds, const PipelineConfig& cfg, const LooOptions& opt);

/// Leave-one-out over the dataset for one (feature, classifier) pair.
/// Per-image failures score 0 with the reason in EvalRow::error.
EvalReport run_loo(const Dataset& ds, FeatureKind features, ClassifierKind classifier, const PipelineConfig& cfg,
                   const LooOptions& opt);

/// Every combination of the given families and classifiers; detection runs
/// once per family. Rows are ordered by feature, classifier, image id.
EvalReport run_evaluation(const Dataset& ds, std::span<const FeatureKind> features,
                          std::span<const ClassifierKind> classifiers, const PipelineConfig& cfg,
                          const LooOptions& opt);
EvalReport run_evaluation(std::span<const LoadedRecord> records, std::span<const FeatureKind> features,
                          std::span<const ClassifierKind> classifiers, const PipelineConfig& cfg,
                          const LooOptions& opt);

/// Runs fn(0..n-1) on up to `workers` threads. Results must be written to
/// per-index slots; the call order is unspecified.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace roi
