#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "roi/features.hpp"

namespace roi {

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

struct SvmParams {
  double C = 10.0;
  /// RBF width; 0 means 1 / (number of columns).
  double gamma = 0.0;
  /// Scale C per class by n_minority / n_class so |alpha| stays within C.
  bool class_weighting = true;
  /// Stop when the maximal KKT violation (m - M gap) drops below this.
  double tolerance = 1e-3;
  std::int64_t max_iterations = 10'000'000;
};

/// Trained binary RBF SVM. Labels are +1 (tumour) and -1 (non-tumour);
/// decision(x) = sum_i coef_i * K(sv_i, x) + bias with coef_i = alpha_i * y_i.
struct SvmModel {
  std::size_t dim = 0;
  std::vector<double> support_vectors;  // row-major, coef.size() x dim
  std::vector<double> coef;
  std::vector<std::size_t> support_indices;  // rows of the training matrix
  double bias = 0.0;
  double gamma = 1.0;
  double C = 1.0;
  double c_pos = 1.0;  // effective box bound for tumour samples
  double c_neg = 1.0;
  std::int64_t iterations = 0;

  std::size_t n_support() const { return coef.size(); }
  std::span<const double> support_vector(std::size_t i) const {
    return {support_vectors.data() + i * dim, dim};
  }
  double decision(std::span<const double> x) const;
};

/// Throws DataError("degenerate training set") when either class is absent.
SvmModel svm_train(const FeatureMatrix& X, const SvmParams& params);
/// Raw form: row-major X (n x dim), labels in {+1, -1}.
SvmModel svm_train(std::span<const double> X, std::size_t dim, std::span<const int> y, const SvmParams& params);

std::vector<double> svm_decision(const SvmModel& model, const FeatureMatrix& X);
/// decision > 0 is tumour; a decision of exactly 0 is non-tumour.
std::vector<Label> svm_predict(const SvmModel& model, const FeatureMatrix& X);

/// Dual objective sum(alpha) - 1/2 sum_ij coef_i coef_j K_ij.
double svm_dual_objective(const SvmModel& model);

/// 3-fold cross-validated grid over C in {1, 10, 100} and gamma in
/// {0.01, 0.1, 1} / m', scored by balanced accuracy. Returns the winning params.
SvmParams svm_grid_search(const FeatureMatrix& X, const SvmParams& base, std::uint64_t seed);

// ---------------------------------------------------------------------------

enum class ClusterMethod { kmeans, fcm };

struct ClusterModel {
  ClusterMethod method = ClusterMethod::kmeans;
  int k = 2;
  std::size_t dim = 0;
  std::vector<double> centroids;  // row-major k x dim
  double fuzzifier = 2.0;         // fcm only
  int iterations = 0;
  /// WCSS (k-means) or fuzzy objective (FCM) after each iteration.
  std::vector<double> objective_history;

  std::span<const double> centroid(int j) const { return {centroids.data() + j * dim, dim}; }
};

struct FcmResult {
  ClusterModel model;
  std::vector<double> memberships;  // row-major n x c
};

/// k-means++ seeding then Lloyd iterations until assignments stop changing
/// or 300 iterations. Throws std::invalid_argument when n < k.
ClusterModel kmeans_fit(const FeatureMatrix& X, int k, std::uint64_t seed);

/// Nearest centroid per row (ties go to the lower index).
std::vector<int> kmeans_assign(const ClusterModel& model, const FeatureMatrix& X);

/// Fuzzy c-means from random seeded memberships; stops when the largest
/// membership change is below 1e-5 or after 300 iterations.
FcmResult fcm_fit(const FeatureMatrix& X, int c, double fuzzifier, std::uint64_t seed);

/// Memberships of each row given fixed centroids. A row lying on one or more
/// centroids splits its membership evenly among them.
std::vector<double> fcm_memberships(const FeatureMatrix& X, std::span<const double> centroids, int c,
                                    double fuzzifier);

/// Maps the two clusters to labels: the cluster whose members have the
/// smaller mean seed distance is tumour. FCM rows use their argmax
/// membership. Ties go to the smaller cluster, then to the
/// lexicographically smaller centroid.
std::vector<Label> clusters_to_labels(const ClusterModel& model, const FeatureMatrix& X);

}  // namespace roi
