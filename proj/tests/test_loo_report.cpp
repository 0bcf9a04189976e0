#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "roi/loo.hpp"
#include "roi/report.hpp"
#include "small_suite.hpp"

namespace {

roi::EvalRow row(const std::string& id, double dice, roi::FeatureKind f = roi::FeatureKind::surf,
                 roi::ClassifierKind c = roi::ClassifierKind::svm) {
  roi::EvalRow r;
  r.image_id = id;
  r.dice = dice;
  r.features = f;
  r.classifier = c;
  return r;
}

roi::Dataset first_n(std::size_t n) {
  auto ds = small_suite();
  ds.records.resize(n);
  return ds;
}

}  // namespace

TEST(Loo, TwoImagesGiveTwoFoldsTrainedOnTheOther) {
  const auto r = roi::run_loo(first_n(2), roi::FeatureKind::surf, roi::ClassifierKind::svm, {}, {});
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].image_id, "phantom_000");
  EXPECT_EQ(r.rows[1].image_id, "phantom_001");
  EXPECT_EQ(r.rows[0].training_ids, std::vector<std::string>{"phantom_001"});
  EXPECT_EQ(r.rows[1].training_ids, std::vector<std::string>{"phantom_000"});
}

TEST(Loo, TrainingIdsNeverContainTheTestImage) {
  const auto ds = small_suite();
  const std::vector<roi::FeatureKind> f{roi::FeatureKind::surf};
  const std::vector<roi::ClassifierKind> c{roi::ClassifierKind::svm, roi::ClassifierKind::kmeans};
  const auto r = roi::run_evaluation(ds, f, c, {}, {});
  ASSERT_EQ(r.rows.size(), 2 * ds.records.size());
  for (const auto& row : r.rows) {
    EXPECT_EQ(std::count(row.training_ids.begin(), row.training_ids.end(), row.image_id), 0);
    EXPECT_EQ(row.training_ids.size(), ds.records.size() - 1);
  }
}

TEST(Loo, LeaveGroupOutExcludesTheWholeGroup) {
  const auto ds = small_suite();
  roi::LooOptions opt;
  opt.leave_group_out = true;
  const auto r = roi::run_loo(ds, roi::FeatureKind::surf, roi::ClassifierKind::svm, {}, opt);
  ASSERT_EQ(r.rows.size(), ds.records.size());
  for (const auto& row : r.rows) {
    const auto& group = std::find_if(ds.records.begin(), ds.records.end(),
                                     [&](const auto& rec) { return rec.id == row.image_id; })->group;
    for (const auto& id : row.training_ids) {
      const auto it = std::find_if(ds.records.begin(), ds.records.end(), [&](const auto& rec) { return rec.id == id; });
      EXPECT_NE(it->group, group);
    }
  }
}

TEST(Loo, SingleImageIsDataError) {
  EXPECT_THROW(roi::run_loo(first_n(1), roi::FeatureKind::surf, roi::ClassifierKind::svm, {}, {}), roi::DataError);
}

TEST(Loo, FailuresScoreZeroAndTheRunContinues) {
  roi::PipelineConfig cfg;
  cfg.detector.surf_hessian_threshold = 1e9;
  const auto r = roi::run_loo(first_n(3), roi::FeatureKind::surf, roi::ClassifierKind::kmeans, cfg, {});
  ASSERT_EQ(r.rows.size(), 3u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.dice, 0.0);
    EXPECT_FALSE(row.error.empty());
    EXPECT_FALSE(row.ellipse);
  }
}

TEST(Loo, DeterministicAcrossWorkerCounts) {
  const auto ds = small_suite();
  roi::LooOptions one, many;
  many.workers = 3;
  const auto a = roi::run_loo(ds, roi::FeatureKind::brisk, roi::ClassifierKind::svm, {}, one);
  const auto b = roi::run_loo(ds, roi::FeatureKind::brisk, roi::ClassifierKind::svm, {}, many);
  EXPECT_EQ(roi::report_to_json(a).dump(), roi::report_to_json(b).dump());
}

TEST(Loo, ParallelForVisitsEveryIndexOnce) {
  std::vector<int> hits(100, 0);
  roi::parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  EXPECT_EQ(std::count(hits.begin(), hits.end(), 1), 100);
  EXPECT_THROW(roi::parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }),
               std::runtime_error);
}

TEST(Report, MeanStd) {
  const std::vector<double> two{0.4, 0.6};
  const auto m = roi::mean_std(two);
  EXPECT_NEAR(m.mean, 0.5, 1e-15);
  EXPECT_NEAR(m.std, std::sqrt(0.02), 1e-15);
  EXPECT_EQ(roi::format_mean_std(m.mean, m.std), "0.5000 ± 0.1414");
  const std::vector<double> one{0.5};
  EXPECT_EQ(roi::mean_std(one).std, 0.0);
}

TEST(Report, SingleRowFormatsWithZeroStd) {
  roi::EvalReport r;
  r.rows.push_back(row("a", 0.5));
  const auto agg = roi::aggregate(r);
  ASSERT_EQ(agg.size(), 1u);
  EXPECT_EQ(roi::format_mean_std(agg[0].dice.mean, agg[0].dice.std), "0.5000 ± 0.0000");
  EXPECT_NE(roi::format_table(r).find("0.5000 ± 0.0000"), std::string::npos);
}

TEST(Report, AggregatesFollowTableOrderAndRecompute) {
  roi::EvalReport r;
  const roi::FeatureKind fs[] = {roi::FeatureKind::surf, roi::FeatureKind::fast, roi::FeatureKind::brisk};
  const roi::ClassifierKind cs[] = {roi::ClassifierKind::fcm, roi::ClassifierKind::svm, roi::ClassifierKind::kmeans};
  int k = 0;
  for (auto c : cs)
    for (auto f : fs)
      for (const char* id : {"a", "b", "c"}) r.rows.push_back(row(id, 0.05 * (k++ % 17), f, c));
  const auto agg = roi::aggregate(r);
  ASSERT_EQ(agg.size(), 9u);
  EXPECT_EQ(agg[0].classifier, roi::ClassifierKind::svm);
  EXPECT_EQ(agg[0].features, roi::FeatureKind::brisk);
  EXPECT_EQ(agg[2].features, roi::FeatureKind::surf);
  EXPECT_EQ(agg[8].classifier, roi::ClassifierKind::fcm);
  for (const auto& a : agg) {
    std::vector<double> d;
    for (const auto& rw : r.rows)
      if (rw.features == a.features && rw.classifier == a.classifier) d.push_back(rw.dice);
    const double mean = (d[0] + d[1] + d[2]) / 3;
    double ss = 0;
    for (double v : d) ss += (v - mean) * (v - mean);
    EXPECT_NEAR(a.dice.mean, mean, 1e-12);
    EXPECT_NEAR(a.dice.std, std::sqrt(ss / 2), 1e-12);
  }
}

TEST(Report, JsonRoundTripKeepsAggregates) {
  const auto r = roi::run_loo(small_suite(), roi::FeatureKind::surf, roi::ClassifierKind::svm, {}, {});
  const auto j = roi::report_to_json(r);
  EXPECT_FALSE(j.at("rows").at(0).contains("timings_ms"));
  const auto back = roi::report_from_json(j);
  EXPECT_EQ(roi::report_to_json(back), j);
  const auto a = roi::aggregate(r), b = roi::aggregate(back);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(a[0].dice.mean, b[0].dice.mean);
  EXPECT_EQ(a[0].dice.std, b[0].dice.std);
  EXPECT_TRUE(roi::report_to_json(r, true).at("rows").at(0).contains("timings_ms"));
}

TEST(Report, MalformedJsonIsDataError) {
  EXPECT_THROW(roi::report_from_json(nlohmann::json{{"format", "x"}}), roi::DataError);
  EXPECT_THROW(roi::report_from_json(nlohmann::json{{"format", roi::kReportFormat}}), roi::DataError);
}

TEST(Report, KeypointStatsCountEachImageOnce) {
  roi::EvalReport r;
  for (auto c : {roi::ClassifierKind::svm, roi::ClassifierKind::kmeans}) {
    auto a = row("a", 0.1, roi::FeatureKind::fast, c);
    a.keypoints = 10;
    auto b = row("b", 0.1, roi::FeatureKind::fast, c);
    b.keypoints = 30;
    r.rows.push_back(a);
    r.rows.push_back(b);
  }
  const auto k = roi::keypoint_stats(r);
  ASSERT_EQ(k.size(), 1u);
  EXPECT_EQ(k[0].count.n, 2u);
  EXPECT_DOUBLE_EQ(k[0].count.mean, 20.0);
}
