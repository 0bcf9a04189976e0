// roi-ellipse: phantom generation, leave-one-out evaluation, model training,
// single-image segmentation and the HTTP service.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "roi/loo.hpp"
#include "roi/phantom.hpp"
#include "roi/random.hpp"
#include "roi/service.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct PipelineFlags {
  std::string config_file;
  double fhh_beta = 1.0;
  bool no_fhh = false;
  bool no_median = false;
  bool no_distance = false;
  double jitter = 0.1;
  bool outlier_filter = false;
  bool grid_search = false;
  std::size_t max_train = 2000;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_file, "JSON file overlaying pipeline settings");
    app->add_option("--fhh-beta", fhh_beta, "Hyperbolization exponent");
    app->add_flag("--no-fhh", no_fhh, "Skip fuzzy histogram hyperbolization");
    app->add_flag("--no-median", no_median, "Skip the 3x3 median filter");
    app->add_flag("--no-distance", no_distance, "Drop the distance-to-click feature");
    app->add_option("--jitter", jitter, "Simulated click radius as a fraction of the lesion bbox diagonal");
    app->add_flag("--outlier-filter", outlier_filter, "Drop far tumour points before the ellipse fit");
    app->add_flag("--grid-search", grid_search, "Tune SVM C and gamma by 3-fold cross-validation");
    app->add_option("--max-train", max_train, "Training points kept per fold");
  }

  roi::PipelineConfig build() const {
    roi::PipelineConfig cfg;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw roi::ConfigError("cannot read config file '" + config_file + "'");
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw roi::ConfigError(std::string("config file: ") + e.what());
      }
      roi::config_from_json(j, cfg);
    }
    cfg.preprocess.beta = fhh_beta;
    cfg.preprocess.enable_fhh = !no_fhh;
    cfg.preprocess.enable_median = !no_median;
    cfg.use_distance = !no_distance;
    cfg.jitter = jitter;
    cfg.outlier_filter = outlier_filter;
    cfg.grid_search = grid_search;
    cfg.max_train_points = max_train;
    cfg.validate();
    return cfg;
  }
};

template <class T, class F>
std::vector<T> parse_list(const std::string& text, const std::vector<T>& all, F parse) {
  if (text == "all") return all;
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const T v = parse(item);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  if (out.empty()) throw roi::ConfigError("empty list '" + text + "'");
  return out;
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw roi::ConfigError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

roi::Service* g_service = nullptr;
extern "C" void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-automated tumour ROI localization with ellipse fitting"};
  app.require_subcommand(1);

  // phantoms
  auto* phantoms = app.add_subcommand("phantoms", "Write a synthetic phantom dataset");
  int ph_count = 33;
  std::uint64_t ph_seed = 7;
  std::string ph_out;
  roi::PhantomParams ph_params;
  phantoms->add_option("--count", ph_count, "Number of phantoms")->check(CLI::PositiveNumber);
  phantoms->add_option("--seed", ph_seed, "Master seed");
  phantoms->add_option("--out", ph_out, "Output directory")->required();
  phantoms->add_option("--contrast", ph_params.contrast, "Background minus lesion level");
  phantoms->add_option("--width", ph_params.width);
  phantoms->add_option("--height", ph_params.height);
  phantoms->add_option("--semi-axis-min", ph_params.semi_axis_min);
  phantoms->add_option("--semi-axis-max", ph_params.semi_axis_max);

  // eval
  auto* eval = app.add_subcommand("eval", "Leave-one-out evaluation");
  std::string ev_data, ev_features = "surf", ev_classifier = "svm", ev_out;
  std::uint64_t ev_seed = 42;
  int ev_workers = 1;
  bool ev_timings = false, ev_group = false;
  PipelineFlags ev_flags;
  eval->add_option("--data", ev_data, "Dataset root")->required();
  eval->add_option("--features", ev_features, "fast, surf, brisk, a comma list, or all");
  eval->add_option("--classifier", ev_classifier, "svm, kmeans, fcm, a comma list, or all");
  eval->add_option("--seed", ev_seed, "Master seed");
  eval->add_option("--out", ev_out, "Report JSON path")->required();
  eval->add_option("--workers", ev_workers, "Concurrent folds")->check(CLI::PositiveNumber);
  eval->add_flag("--timings", ev_timings, "Include per-stage timings in the report");
  eval->add_flag("--group-loo", ev_group, "Leave out whole groups (groups.json)");
  ev_flags.add_to(eval);

  // train
  auto* train = app.add_subcommand("train", "Train an SVM model on a whole dataset");
  std::string tr_data, tr_features = "surf", tr_out;
  std::uint64_t tr_seed = 42;
  PipelineFlags tr_flags;
  train->add_option("--data", tr_data, "Dataset root")->required();
  train->add_option("--features", tr_features, "fast, surf or brisk");
  train->add_option("--seed", tr_seed, "Master seed");
  train->add_option("--out", tr_out, "Model JSON path")->required();
  tr_flags.add_to(train);

  // segment
  auto* segment = app.add_subcommand("segment", "Fit an ellipse for one click");
  std::string sg_image, sg_model, sg_out, sg_mask, sg_features = "surf", sg_classifier = "svm";
  double sg_cx = 0, sg_cy = 0;
  std::uint64_t sg_seed = 42;
  PipelineFlags sg_flags;
  segment->add_option("--image", sg_image, "PNG or PGM image")->required();
  segment->add_option("--cx", sg_cx, "Click x")->required();
  segment->add_option("--cy", sg_cy, "Click y")->required();
  segment->add_option("--model", sg_model, "Model JSON (required for svm)");
  segment->add_option("--mask", sg_mask, "Ground-truth mask for a Dice score");
  segment->add_option("--features", sg_features, "fast, surf or brisk (svm uses the model's)");
  segment->add_option("--classifier", sg_classifier, "svm, kmeans or fcm");
  segment->add_option("--seed", sg_seed, "Clustering seed");
  segment->add_option("--out", sg_out, "Output JSON path")->required();
  sg_flags.add_to(segment);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  roi::ServiceOptions sv_opt;
  int sv_ttl_min = 30;
  PipelineFlags sv_flags;
  std::string sv_model_dir;
  serve->add_option("--host", sv_opt.host);
  serve->add_option("--port", sv_opt.port)->check(CLI::Range(0, 65535));
  serve->add_option("--model-dir", sv_model_dir, "Directory of <id>.json models");
  serve->add_option("--session-ttl", sv_ttl_min, "Idle minutes before a session expires")
      ->check(CLI::PositiveNumber);
  serve->add_option("--cors-origin", sv_opt.cors_origin, "Access-Control-Allow-Origin value");
  serve->add_option("--threads", sv_opt.threads)->check(CLI::PositiveNumber);
  sv_flags.add_to(serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*phantoms) {
      ph_params.validate();
      roi::write_phantom_suite(ph_out, ph_count, ph_seed, ph_params);
      std::printf("wrote %d phantoms to %s\n", ph_count, ph_out.c_str());
    } else if (*eval) {
      const auto features = parse_list<roi::FeatureKind>(
          ev_features, {roi::FeatureKind::fast, roi::FeatureKind::surf, roi::FeatureKind::brisk},
          roi::parse_feature_kind);
      const auto classifiers = parse_list<roi::ClassifierKind>(
          ev_classifier, {roi::ClassifierKind::svm, roi::ClassifierKind::kmeans, roi::ClassifierKind::fcm},
          roi::parse_classifier_kind);
      const roi::PipelineConfig cfg = ev_flags.build();
      roi::LooOptions opt;
      opt.master_seed = ev_seed;
      opt.workers = ev_workers;
      opt.leave_group_out = ev_group;
      const roi::Dataset ds = roi::load_dataset(ev_data);
      const roi::EvalReport report = roi::run_evaluation(ds, features, classifiers, cfg, opt);
      write_json(ev_out, roi::report_to_json(report, ev_timings));
      std::fputs(roi::format_table(report).c_str(), stdout);
    } else if (*train) {
      const roi::FeatureKind kind = roi::parse_feature_kind(tr_features);
      const roi::PipelineConfig cfg = tr_flags.build();
      roi::LooOptions opt;
      opt.master_seed = tr_seed;
      const roi::Dataset ds = roi::load_dataset(tr_data);
      const auto records = roi::load_records(ds, cfg, opt);
      std::vector<roi::PreparedImage> prepared;
      prepared.reserve(records.size());
      for (const auto& r : records) prepared.push_back(roi::prepare_image(r.image, kind, cfg));
      std::vector<roi::TrainingItem> items;
      for (std::size_t i = 0; i < records.size(); ++i)
        items.push_back({records[i].record.id, &prepared[i], &records[i].truth, records[i].seed});
      const roi::TrainedModel model = roi::train_model(items, kind, cfg, roi::derive_seed(tr_seed, "model/train"));
      fs::path out(tr_out);
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      roi::save_model(model, out);
      std::printf("trained on %zu images, %zu support vectors\n", items.size(), model.svm.support_indices.size());
    } else if (*segment) {
      const roi::FeatureKind features = roi::parse_feature_kind(sg_features);
      const roi::ClassifierKind classifier = roi::parse_classifier_kind(sg_classifier);
      const roi::PipelineConfig cfg = sg_flags.build();
      std::optional<roi::TrainedModel> model;
      if (!sg_model.empty()) model = roi::load_model(sg_model);
      if (classifier == roi::ClassifierKind::svm && !model)
        throw roi::ConfigError("the svm classifier needs --model");
      const roi::GrayImage image = roi::load_image(sg_image);
      const roi::TrainedModel* mp = model ? &*model : nullptr;
      const roi::Segmentation seg = roi::segment_image(image, {sg_cx, sg_cy, roi::SeedPoint::Source::user_click},
                                                       features, classifier, mp, cfg, sg_seed);
      std::optional<roi::DiceScore> score;
      if (!sg_mask.empty()) {
        const roi::GrayImage m = roi::load_image(sg_mask);
        if (m.width() != image.width() || m.height() != image.height())
          throw roi::DataError("mask dimensions do not match the image");
        const roi::GroundTruth gt(roi::Mask::from_image(m));
        score = roi::dice(roi::rasterize(seg.ellipse, image.width(), image.height()), gt.mask());
      }
      const roi::FeatureKind used = (mp && classifier == roi::ClassifierKind::svm) ? mp->features : features;
      write_json(sg_out, roi::segmentation_to_json(seg, used, classifier, score));
    } else if (*serve) {
      sv_opt.pipeline = sv_flags.build();
      sv_opt.model_dir = sv_model_dir;
      sv_opt.session_ttl = std::chrono::minutes(sv_ttl_min);
      if (!sv_model_dir.empty() && !fs::is_directory(sv_model_dir))
        throw roi::ConfigError("model directory '" + sv_model_dir + "' does not exist");
      roi::Service service(sv_opt);
      const int port = service.bind();
      if (port < 0) throw roi::ConfigError("cannot bind " + sv_opt.host + ":" + std::to_string(sv_opt.port));
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::printf("listening on http://%s:%d\n", sv_opt.host.c_str(), port);
      std::fflush(stdout);
      service.listen_after_bind();
      g_service = nullptr;
    }
  } catch (const roi::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const roi::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  }
  return kExitOk;
}
