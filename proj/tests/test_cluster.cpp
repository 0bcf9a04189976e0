#include <gtest/gtest.h>

#include <cmath>

#include "roi/classify.hpp"
#include "roi/random.hpp"

namespace {

roi::FeatureMatrix points(const std::vector<std::vector<double>>& rows, std::vector<double> dist = {}) {
  roi::FeatureMatrix m;
  m.rows = rows.size();
  m.cols = rows.front().size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m.values.insert(m.values.end(), rows[i].begin(), rows[i].end());
    m.xs.push_back(0);
    m.ys.push_back(0);
    m.distance.push_back(dist.empty() ? rows[i].back() : dist[i]);
  }
  return m;
}

roi::FeatureMatrix random_blobs(std::uint64_t seed, std::size_t n, std::size_t dim) {
  roi::Rng rng(seed);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r;
    const double shift = rng.uniform() < 0.5 ? 0.0 : 3.0;
    for (std::size_t k = 0; k < dim; ++k) r.push_back(shift + rng.uniform(-1.5, 1.5));
    rows.push_back(r);
  }
  return points(rows);
}

TEST(KMeans, SeparatesTwoObviousGroups) {
  const auto X = points({{0}, {0.1}, {10}, {10.1}});
  const auto m = roi::kmeans_fit(X, 2, 1);
  const auto a = roi::kmeans_assign(m, X);
  EXPECT_EQ(a[0], a[1]);
  EXPECT_EQ(a[2], a[3]);
  EXPECT_NE(a[0], a[2]);
  const double lo = std::min(m.centroids[0], m.centroids[1]), hi = std::max(m.centroids[0], m.centroids[1]);
  EXPECT_NEAR(lo, 0.05, 1e-12);
  EXPECT_NEAR(hi, 10.05, 1e-12);
}

TEST(KMeans, IdenticalPointsCollapse) {
  const auto m = roi::kmeans_fit(points({{2, 3}, {2, 3}, {2, 3}}), 2, 4);
  for (double v : {m.centroids[0], m.centroids[2]}) EXPECT_EQ(v, 2.0);
  for (double v : {m.centroids[1], m.centroids[3]}) EXPECT_EQ(v, 3.0);
}

TEST(KMeans, WcssNeverIncreasesAndRunIsSeeded) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto X = random_blobs(seed, 200, 4);
    const auto m = roi::kmeans_fit(X, 2, seed);
    ASSERT_FALSE(m.objective_history.empty());
    for (std::size_t i = 1; i < m.objective_history.size(); ++i)
      EXPECT_LE(m.objective_history[i], m.objective_history[i - 1] * (1 + 1e-12));
    EXPECT_EQ(roi::kmeans_fit(X, 2, seed).centroids, m.centroids);
  }
}

TEST(KMeans, TooFewPoints) {
  EXPECT_THROW(roi::kmeans_fit(points({{1}}), 2, 0), std::invalid_argument);
}

TEST(Fcm, MembershipsSumToOneAndObjectiveDecreases) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto X = random_blobs(100 + seed, 150, 3);
    const auto r = roi::fcm_fit(X, 2, 2.0, seed);
    for (std::size_t i = 0; i < X.rows; ++i) EXPECT_NEAR(r.memberships[2 * i] + r.memberships[2 * i + 1], 1.0, 1e-9);
    const auto& h = r.model.objective_history;
    ASSERT_FALSE(h.empty());
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1] * (1 + 1e-12));
    EXPECT_LE(r.model.iterations, 300);
  }
}

TEST(Fcm, PointOnCentroidGetsFullMembership) {
  const auto X = points({{0, 0}, {5, 5}, {1, 2}});
  const std::vector<double> centroids{0, 0, 9, 9};
  const auto u = roi::fcm_memberships(X, centroids, 2, 2.0);
  EXPECT_EQ(u[0], 1.0);
  EXPECT_EQ(u[1], 0.0);
  const std::vector<double> same{0, 0, 0, 0};
  const auto v = roi::fcm_memberships(X, same, 2, 2.0);
  EXPECT_EQ(v[0], 0.5);
  EXPECT_EQ(v[1], 0.5);
}

TEST(Fcm, RejectsBadFuzzifier) {
  EXPECT_THROW(roi::fcm_fit(points({{0}, {1}}), 2, 1.0, 0), std::invalid_argument);
}

TEST(ClustersToLabels, SmallerMeanDistanceIsTumour) {
  const auto X = points({{0.0, 10}, {0.1, 10}, {9.0, 200}, {9.1, 200}});
  auto m = roi::kmeans_fit(X, 2, 3);
  const auto labels = roi::clusters_to_labels(m, X);
  EXPECT_EQ(labels[0], roi::Label::tumour);
  EXPECT_EQ(labels[1], roi::Label::tumour);
  EXPECT_EQ(labels[2], roi::Label::non_tumour);

  // Swapping the centroid order does not change the outcome.
  std::swap_ranges(m.centroids.begin(), m.centroids.begin() + 2, m.centroids.begin() + 2);
  EXPECT_EQ(roi::clusters_to_labels(m, X), labels);
}

TEST(ClustersToLabels, SinglePointClusters) {
  const auto X = points({{5.0}, {500.0}});
  roi::ClusterModel m;
  m.k = 2;
  m.dim = 1;
  m.centroids = {500.0, 5.0};
  const auto labels = roi::clusters_to_labels(m, X);
  EXPECT_EQ(labels[0], roi::Label::tumour);
  EXPECT_EQ(labels[1], roi::Label::non_tumour);

  m.method = roi::ClusterMethod::fcm;
  EXPECT_EQ(roi::clusters_to_labels(m, X), labels);
}

TEST(ClustersToLabels, TieGoesToSmallerCluster) {
  // Equal mean distance; cluster at 0 has one member, the other has two.
  const auto X = points({{0.0}, {10.0}, {10.2}}, {7, 7, 7});
  roi::ClusterModel m;
  m.k = 2;
  m.dim = 1;
  m.centroids = {10.1, 0.0};
  const auto labels = roi::clusters_to_labels(m, X);
  EXPECT_EQ(labels[0], roi::Label::tumour);
  EXPECT_EQ(labels[1], roi::Label::non_tumour);
}

}  // namespace
