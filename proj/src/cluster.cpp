#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "roi/classify.hpp"
#include "roi/random.hpp"

namespace roi {

namespace {

constexpr int kMaxIterations = 300;

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

void check_fit_input(const FeatureMatrix& X, int k) {
  if (k < 1) throw std::invalid_argument("cluster count must be >= 1");
  if (X.rows < static_cast<std::size_t>(k))
    throw std::invalid_argument("need at least as many points as clusters");
}

}  // namespace

ClusterModel kmeans_fit(const FeatureMatrix& X, int k, std::uint64_t seed) {
  check_fit_input(X, k);
  const std::size_t n = X.rows, dim = X.cols;
  ClusterModel m;
  m.method = ClusterMethod::kmeans;
  m.k = k;
  m.dim = dim;
  m.centroids.reserve(static_cast<std::size_t>(k) * dim);

  // k-means++ seeding.
  Rng rng(seed);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = static_cast<std::size_t>(rng.below(n));
  for (int c = 0; c < k; ++c) {
    if (c > 0) {
      const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
      if (total > 0.0) {
        double r = rng.uniform() * total;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          if (r < d2[i]) {
            pick = i;
            break;
          }
          r -= d2[i];
        }
      } else {
        pick = static_cast<std::size_t>(rng.below(n));
      }
    }
    auto row = X.row(pick);
    m.centroids.insert(m.centroids.end(), row.begin(), row.end());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(X.row(i), m.centroid(c)));
  }

  std::vector<int> assign(n, -1);
  for (int it = 0; it < kMaxIterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = assign[i];
      double best_d = best >= 0 ? sq_dist(X.row(i), m.centroid(best)) : std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = sq_dist(X.row(i), m.centroid(c));
        if (d < best_d) best_d = d, best = c;  // strict: ties keep the current cluster
      }
      if (best != assign[i]) assign[i] = best, changed = true;
    }
    if (!changed && it > 0) break;

    std::vector<double> sums(static_cast<std::size_t>(k) * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = X.row(i);
      double* s = &sums[static_cast<std::size_t>(assign[i]) * dim];
      for (std::size_t d = 0; d < dim; ++d) s[d] += row[d];
      ++counts[assign[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      for (std::size_t d = 0; d < dim; ++d)
        m.centroids[c * dim + d] = sums[c * dim + d] / static_cast<double>(counts[c]);
    }
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) wcss += sq_dist(X.row(i), m.centroid(assign[i]));
    m.objective_history.push_back(wcss);
    m.iterations = it + 1;
  }
  return m;
}

std::vector<int> kmeans_assign(const ClusterModel& model, const FeatureMatrix& X) {
  if (X.rows > 0 && X.cols != model.dim) throw std::invalid_argument("cluster: feature dimension mismatch");
  std::vector<int> out(X.rows, 0);
  for (std::size_t i = 0; i < X.rows; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < model.k; ++c) {
      const double d = sq_dist(X.row(i), model.centroid(c));
      if (d < best) best = d, out[i] = c;
    }
  }
  return out;
}

std::vector<double> fcm_memberships(const FeatureMatrix& X, std::span<const double> centroids, int c,
                                    double fuzzifier) {
  if (!(fuzzifier > 1.0)) throw std::invalid_argument("fcm fuzzifier must be > 1");
  const std::size_t dim = X.cols;
  if (centroids.size() != static_cast<std::size_t>(c) * dim)
    throw std::invalid_argument("fcm: centroid array does not match c x dim");
  const double expo = 1.0 / (fuzzifier - 1.0);
  std::vector<double> u(X.rows * static_cast<std::size_t>(c), 0.0);
  std::vector<double> d2(c);
  for (std::size_t i = 0; i < X.rows; ++i) {
    double* ui = &u[i * c];
    int zeros = 0;
    for (int j = 0; j < c; ++j) {
      d2[j] = sq_dist(X.row(i), centroids.subspan(j * dim, dim));
      zeros += d2[j] == 0.0;
    }
    if (zeros > 0) {
      for (int j = 0; j < c; ++j) ui[j] = d2[j] == 0.0 ? 1.0 / zeros : 0.0;
      continue;
    }
    // u_ij = 1 / sum_k (d_ij^2 / d_ik^2)^(1/(m-1)), then renormalized.
    double total = 0.0;
    for (int j = 0; j < c; ++j) {
      double s = 0.0;
      for (int k = 0; k < c; ++k) s += std::pow(d2[j] / d2[k], expo);
      ui[j] = 1.0 / s;
      total += ui[j];
    }
    for (int j = 0; j < c; ++j) ui[j] /= total;
  }
  return u;
}

FcmResult fcm_fit(const FeatureMatrix& X, int c, double fuzzifier, std::uint64_t seed) {
  check_fit_input(X, c);
  if (!(fuzzifier > 1.0)) throw std::invalid_argument("fcm fuzzifier must be > 1");
  const std::size_t n = X.rows, dim = X.cols;
  FcmResult r;
  ClusterModel& m = r.model;
  m.method = ClusterMethod::fcm;
  m.k = c;
  m.dim = dim;
  m.fuzzifier = fuzzifier;
  m.centroids.assign(static_cast<std::size_t>(c) * dim, 0.0);

  Rng rng(seed);
  auto& u = r.memberships;
  u.resize(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (int j = 0; j < c; ++j) total += (u[i * c + j] = 0.05 + rng.uniform());
    for (int j = 0; j < c; ++j) u[i * c + j] /= total;
  }

  for (int it = 0; it < kMaxIterations; ++it) {
    for (int j = 0; j < c; ++j) {
      double wsum = 0.0;
      std::vector<double> acc(dim, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = std::pow(u[i * c + j], fuzzifier);
        wsum += w;
        auto row = X.row(i);
        for (std::size_t d = 0; d < dim; ++d) acc[d] += w * row[d];
      }
      if (wsum > 0.0)
        for (std::size_t d = 0; d < dim; ++d) m.centroids[j * dim + d] = acc[d] / wsum;
    }
    auto next = fcm_memberships(X, m.centroids, c, fuzzifier);
    double change = 0.0;
    for (std::size_t q = 0; q < next.size(); ++q) change = std::max(change, std::abs(next[q] - u[q]));
    u = std::move(next);

    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (int j = 0; j < c; ++j) obj += std::pow(u[i * c + j], fuzzifier) * sq_dist(X.row(i), m.centroid(j));
    m.objective_history.push_back(obj);
    m.iterations = it + 1;
    if (change < 1e-5) break;
  }
  return r;
}

std::vector<Label> clusters_to_labels(const ClusterModel& model, const FeatureMatrix& X) {
  if (model.k != 2) throw std::invalid_argument("clusters_to_labels expects exactly two clusters");
  if (X.distance.size() != X.rows) throw std::invalid_argument("matrix lacks seed distances");
  std::vector<int> assign;
  if (model.method == ClusterMethod::kmeans) {
    assign = kmeans_assign(model, X);
  } else {
    const auto u = fcm_memberships(X, model.centroids, model.k, model.fuzzifier);
    assign.resize(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) assign[i] = u[i * 2 + 1] > u[i * 2] ? 1 : 0;
  }
  double sum[2] = {0.0, 0.0};
  std::size_t cnt[2] = {0, 0};
  for (std::size_t i = 0; i < X.rows; ++i) {
    sum[assign[i]] += X.distance[i];
    ++cnt[assign[i]];
  }
  const double inf = std::numeric_limits<double>::infinity();
  const double mean0 = cnt[0] ? sum[0] / cnt[0] : inf, mean1 = cnt[1] ? sum[1] / cnt[1] : inf;
  int tumour;
  if (mean0 != mean1) {
    tumour = mean0 < mean1 ? 0 : 1;
  } else if (cnt[0] != cnt[1]) {
    tumour = cnt[0] < cnt[1] ? 0 : 1;
  } else {
    auto c0 = model.centroid(0), c1 = model.centroid(1);
    tumour = std::lexicographical_compare(c1.begin(), c1.end(), c0.begin(), c0.end()) ? 1 : 0;
  }
  std::vector<Label> out(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) out[i] = assign[i] == tumour ? Label::tumour : Label::non_tumour;
  return out;
}

}  // namespace roi
