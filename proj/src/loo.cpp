#include "roi/loo.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "roi/random.hpp"

namespace roi {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<LoadedRecord> load_records(const Dataset& ds, const PipelineConfig& cfg, const LooOptions& opt) {
  std::vector<std::optional<LoadedRecord>> slots(ds.records.size());
  parallel_for(ds.records.size(), opt.workers, [&](std::size_t i) {
    const auto& rec = ds.records[i];
    GrayImage img = load_image(rec.image);
    const GrayImage mask_img = load_image(rec.mask);
    if (mask_img.width() != img.width() || mask_img.height() != img.height())
      throw DataError("mask and image dimensions differ for " + rec.id);
    GroundTruth gt(Mask::from_image(mask_img));
    SeedPoint seed = rec.seed ? *rec.seed : simulate_seed(gt, cfg.jitter, derive_seed(opt.master_seed, rec.id));
    slots[i].emplace(LoadedRecord{rec, std::move(img), std::move(gt), seed});
  });
  std::vector<LoadedRecord> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

EvalReport run_evaluation(std::span<const LoadedRecord> records, std::span<const FeatureKind> features,
                          std::span<const ClassifierKind> classifiers, const PipelineConfig& cfg,
                          const LooOptions& opt) {
  cfg.validate();
  const std::size_t n = records.size();
  if (n < 2) throw DataError("leave-one-out needs at least 2 images, dataset has " + std::to_string(n));
  if (opt.leave_group_out) {
    bool two_groups = false;
    for (const auto& r : records) two_groups |= r.record.group != records[0].record.group;
    if (!two_groups) throw DataError("leave-group-out needs at least 2 groups");
  }

  EvalReport report;
  report.master_seed = opt.master_seed;
  report.leave_group_out = opt.leave_group_out;

  for (const FeatureKind fk : features) {
    std::vector<PreparedImage> prepared(n);
    std::vector<double> detect_ms(n);
    parallel_for(n, opt.workers, [&](std::size_t i) {
      const auto t0 = std::chrono::steady_clock::now();
      prepared[i] = prepare_image(records[i].image, fk, cfg);
      detect_ms[i] = ms_since(t0);
    });

    for (const ClassifierKind ck : classifiers) {
      std::vector<EvalRow> rows(n);
      parallel_for(n, opt.workers, [&](std::size_t i) {
        const LoadedRecord& test = records[i];
        EvalRow& row = rows[i];
        row.image_id = test.record.id;
        row.features = fk;
        row.classifier = ck;
        row.keypoints = prepared[i].features.size();
        row.seed = test.seed;
        row.detect_ms = detect_ms[i];

        std::vector<TrainingItem> items;
        std::vector<const GroundTruth*> truths;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i || (opt.leave_group_out && records[j].record.group == test.record.group)) continue;
          items.push_back({records[j].record.id, &prepared[j], &records[j].truth, records[j].seed});
          truths.push_back(&records[j].truth);
          row.training_ids.push_back(records[j].record.id);
        }
        try {
          TrainedModel model;
          const TrainedModel* model_ptr = nullptr;
          AspectStats aspect = aspect_stats(truths);
          if (ck == ClassifierKind::svm) {
            const auto t0 = std::chrono::steady_clock::now();
            model = train_model(items, fk, cfg, derive_seed(opt.master_seed, test.record.id + "/train"));
            row.train_ms = ms_since(t0);
            model_ptr = &model;
            aspect = model.aspect;
          }
          const Segmentation seg = segment_prepared(prepared[i], test.seed, ck, model_ptr, aspect, cfg,
                                                    derive_seed(opt.master_seed, test.record.id + "/cluster"));
          row.predict_ms = seg.predict_ms;
          row.ellipsify_ms = seg.ellipsify_ms;
          const auto t1 = std::chrono::steady_clock::now();
          row.ellipse = seg.ellipse;
          row.dice = dice(rasterize(seg.ellipse, test.image.width(), test.image.height()), test.truth.mask()).value;
          row.ellipsify_ms += ms_since(t1);
        } catch (const DataError& e) {
          row.dice = 0.0;
          row.error = e.what();
        }
      });
      for (auto& r : rows) report.rows.push_back(std::move(r));
    }
  }
  return report;
}

EvalReport run_evaluation(const Dataset& ds, std::span<const FeatureKind> features,
                          std::span<const ClassifierKind> classifiers, const PipelineConfig& cfg,
                          const LooOptions& opt) {
  cfg.validate();
  if (ds.records.size() < 2)
    throw DataError("leave-one-out needs at least 2 images, dataset has " + std::to_string(ds.records.size()));
  const auto records = load_records(ds, cfg, opt);
  EvalReport r = run_evaluation(records, features, classifiers, cfg, opt);
  r.dataset = ds.name;
  return r;
}

EvalReport run_loo(const Dataset& ds, FeatureKind features, ClassifierKind classifier, const PipelineConfig& cfg,
                   const LooOptions& opt) {
  const FeatureKind f[] = {features};
  const ClassifierKind c[] = {classifier};
  return run_evaluation(ds, f, c, cfg, opt);
}

}  // namespace roi
