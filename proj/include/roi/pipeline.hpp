#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "roi/classify.hpp"
#include "roi/ellipse.hpp"
#include "roi/preprocess.hpp"

namespace roi {

enum class ClassifierKind { svm, kmeans, fcm };

std::string_view to_string(ClassifierKind k);
ClassifierKind parse_classifier_kind(std::string_view name);

/// Every knob of the per-image pipeline.
struct PipelineConfig {
  PreprocessParams preprocess;
  DetectorConfig detector;
  SvmParams svm;
  bool grid_search = false;
  bool use_distance = true;         // append the seed-distance column
  double jitter = 0.1;              // simulated click radius, fraction of bbox diagonal
  bool outlier_filter = false;      // drop tumour points beyond the distance percentile
  double outlier_percentile = 95.0;
  double fcm_fuzzifier = 2.0;
  std::size_t max_train_points = 2000;  // per-fold training subsample cap

  void validate() const;
};

/// Preprocessed image and its detected features for one feature family.
struct PreparedImage {
  int width = 0;
  int height = 0;
  std::vector<Feature> features;
};

/// Size check, preprocessing and detection/description.
PreparedImage prepare_image(const GrayImage& raw, FeatureKind kind, const PipelineConfig& cfg);

/// Everything needed to classify a new image with the SVM route.
struct TrainedModel {
  FeatureKind features = FeatureKind::surf;
  bool use_distance = true;
  AspectStats aspect;
  ScalerStats scaler;
  SvmModel svm;
  PreprocessParams preprocess;
  DetectorConfig detector;
  std::vector<std::string> training_ids;
};

/// One labelled training image.
struct TrainingItem {
  std::string id;
  const PreparedImage* prepared = nullptr;
  const GroundTruth* truth = nullptr;
  SeedPoint seed;
};

/// Aspect stats, labelled matrices, subsampling to cfg.max_train_points,
/// z-scoring and SVM training, all from `items` only.
TrainedModel train_model(std::span<const TrainingItem> items, FeatureKind kind, const PipelineConfig& cfg,
                         std::uint64_t seed);

struct Segmentation {
  EllipseROI ellipse;
  std::vector<Keypoint> keypoints;  // every detected keypoint, detector order
  std::vector<Label> labels;        // one per keypoint
  std::vector<Keypoint> tumour;     // keypoints labelled tumour

  double predict_ms = 0.0;
  double ellipsify_ms = 0.0;
};

/// Classifies prepared features and fits the ellipse. `model` is required
/// for ClassifierKind::svm and ignored otherwise; `aspect` is used by the
/// clustering routes (SVM uses the model's own). Throws InsufficientEvidence
/// when fewer than three points are labelled tumour.
Segmentation segment_prepared(const PreparedImage& img, const SeedPoint& seed, ClassifierKind classifier,
                              const TrainedModel* model, const AspectStats& aspect, const PipelineConfig& cfg,
                              std::uint64_t cluster_seed);

/// cfg with the model's preprocessing and detector settings, validated.
PipelineConfig effective_config(const PipelineConfig& cfg, const TrainedModel* model);

/// Click-to-ellipse on a raw image. With a model, its preprocessing and
/// detector settings override cfg.
Segmentation segment_image(const GrayImage& raw, const SeedPoint& seed, FeatureKind features,
                           ClassifierKind classifier, const TrainedModel* model, const PipelineConfig& cfg,
                           std::uint64_t cluster_seed);

// JSON forms. Field names are part of the external contract.
nlohmann::json to_json(const Keypoint& k);
nlohmann::json to_json(const EllipseROI& e);
nlohmann::json to_json(const DiceScore& d);
EllipseROI ellipse_from_json(const nlohmann::json& j);
/// {ellipse, tumour_keypoints, keypoint_count, features, classifier, dice?}
nlohmann::json segmentation_to_json(const Segmentation& seg, FeatureKind features, ClassifierKind classifier,
                                    const std::optional<DiceScore>& score);

inline constexpr std::string_view kModelFormat = "roi-ellipse-model/1";
nlohmann::json model_to_json(const TrainedModel& m);
/// Throws DataError on a wrong format tag or missing fields.
TrainedModel model_from_json(const nlohmann::json& j);
void save_model(const TrainedModel& m, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

nlohmann::json config_to_json(const PipelineConfig& cfg);
/// Overlays any fields present in j onto cfg.
void config_from_json(const nlohmann::json& j, PipelineConfig& cfg);

}  // namespace roi
