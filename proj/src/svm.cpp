#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <numeric>

#include "roi/classify.hpp"
#include "roi/random.hpp"

namespace roi {

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::exp(-gamma * s);
}

double SvmModel::decision(std::span<const double> x) const {
  if (x.size() != dim) throw std::invalid_argument("svm: feature dimension mismatch");
  double f = bias;
  for (std::size_t i = 0; i < coef.size(); ++i) f += coef[i] * rbf_kernel(support_vector(i), x, gamma);
  return f;
}

namespace {

constexpr double kTau = 1e-12;

// LRU cache of kernel rows. Holds the full Gram matrix when it fits the budget.
class KernelRows {
 public:
  KernelRows(std::span<const double> X, std::size_t n, std::size_t dim, double gamma)
      : X_(X), n_(n), dim_(dim), gamma_(gamma), slot_of_(n, -1) {
    constexpr std::size_t budget = std::size_t{256} << 20;
    capacity_ = std::clamp<std::size_t>(budget / (sizeof(double) * std::max<std::size_t>(n, 1)), 2, n);
  }

  const double* row(std::size_t i) {
    if (slot_of_[i] >= 0) {
      lru_.splice(lru_.begin(), lru_, where_[slot_of_[i]]);
      return storage_[slot_of_[i]].data();
    }
    int slot;
    if (storage_.size() < capacity_) {
      slot = static_cast<int>(storage_.size());
      storage_.emplace_back(n_);
      owner_.push_back(i);
      lru_.push_front(slot);
      where_.push_back(lru_.begin());
    } else {
      slot = lru_.back();
      slot_of_[owner_[slot]] = -1;
      owner_[slot] = i;
      lru_.splice(lru_.begin(), lru_, where_[slot]);
    }
    slot_of_[i] = slot;
    auto& r = storage_[slot];
    const std::span<const double> xi(X_.data() + i * dim_, dim_);
    for (std::size_t j = 0; j < n_; ++j) r[j] = rbf_kernel(xi, {X_.data() + j * dim_, dim_}, gamma_);
    return r.data();
  }

 private:
  std::span<const double> X_;
  std::size_t n_, dim_;
  double gamma_;
  std::size_t capacity_;
  std::vector<int> slot_of_;
  std::vector<std::vector<double>> storage_;
  std::vector<std::size_t> owner_;
  std::list<int> lru_;
  std::vector<std::list<int>::iterator> where_;
};

}  // namespace

SvmModel svm_train(std::span<const double> X, std::size_t dim, std::span<const int> y, const SvmParams& params) {
  const std::size_t n = y.size();
  if (X.size() != n * dim) throw std::invalid_argument("svm: X size does not match labels x dim");
  if (!(params.C > 0.0)) throw ConfigError("svm: C must be > 0");
  if (params.gamma < 0.0) throw ConfigError("svm: gamma must be >= 0");
  const auto n_pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0 || n_pos + static_cast<std::size_t>(std::count(y.begin(), y.end(), -1)) != n)
    throw DataError("degenerate training set: need labelled examples of both classes");

  SvmModel m;
  m.dim = dim;
  m.C = params.C;
  m.gamma = params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(std::max<std::size_t>(dim, 1));
  if (params.class_weighting) {
    const double minority = static_cast<double>(std::min(n_pos, n_neg));
    m.c_pos = params.C * minority / static_cast<double>(n_pos);
    m.c_neg = params.C * minority / static_cast<double>(n_neg);
  } else {
    m.c_pos = m.c_neg = params.C;
  }

  KernelRows K(X, n, dim, m.gamma);
  std::vector<double> alpha(n, 0.0), G(n, -1.0), bound(n);
  for (std::size_t t = 0; t < n; ++t) bound[t] = y[t] > 0 ? m.c_pos : m.c_neg;
  auto upper = [&](std::size_t t) { return alpha[t] >= bound[t]; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  std::int64_t iter = 0;
  for (; iter < params.max_iterations; ++iter) {
    // Second-order working set selection (Fan, Chen & Lin).
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (!upper(t) && -G[t] >= gmax) gmax = -G[t], i = static_cast<std::ptrdiff_t>(t);
      } else {
        if (!lower(t) && G[t] >= gmax) gmax = G[t], i = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (i < 0) break;
    const double* Ki = K.row(static_cast<std::size_t>(i));
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    std::ptrdiff_t j = -1;
    for (std::size_t t = 0; t < n; ++t) {
      double grad_diff;
      if (y[t] > 0) {
        if (lower(t)) continue;
        gmax2 = std::max(gmax2, G[t]);
        grad_diff = gmax + G[t];
      } else {
        if (upper(t)) continue;
        gmax2 = std::max(gmax2, -G[t]);
        grad_diff = gmax - G[t];
      }
      if (grad_diff > 0.0) {
        double quad = 2.0 - 2.0 * Ki[t];
        if (quad <= 0.0) quad = kTau;
        const double obj = -(grad_diff * grad_diff) / quad;
        if (obj <= best) best = obj, j = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (gmax + gmax2 < params.tolerance || j < 0) break;

    const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
    const double* Kj = K.row(uj);
    Ki = K.row(ui);  // may have moved in the LRU list, storage is stable
    const double Ci = bound[ui], Cj = bound[uj];
    const double old_ai = alpha[ui], old_aj = alpha[uj];
    double& ai = alpha[ui];
    double& aj = alpha[uj];
    if (y[ui] != y[uj]) {
      double quad = 2.0 - 2.0 * Ki[uj];
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G[ui] - G[uj]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) aj = 0, ai = diff;
      } else {
        if (ai < 0) ai = 0, aj = -diff;
      }
      if (diff > Ci - Cj) {
        if (ai > Ci) ai = Ci, aj = Ci - diff;
      } else {
        if (aj > Cj) aj = Cj, ai = Cj + diff;
      }
    } else {
      double quad = 2.0 - 2.0 * Ki[uj];
      if (quad <= 0.0) quad = kTau;
      const double delta = (G[ui] - G[uj]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > Ci) {
        if (ai > Ci) ai = Ci, aj = sum - Ci;
      } else {
        if (aj < 0) aj = 0, ai = sum;
      }
      if (sum > Cj) {
        if (aj > Cj) aj = Cj, ai = sum - Cj;
      } else {
        if (ai < 0) ai = 0, aj = sum;
      }
    }
    const double dai = ai - old_ai, daj = aj - old_aj;
    for (std::size_t t = 0; t < n; ++t)
      G[t] += y[t] * (y[ui] * Ki[t] * dai + y[uj] * Kj[t] * daj);
  }
  m.iterations = iter;

  // Bias from free vectors, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * G[t];
    if (upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  m.bias = -rho;

  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] <= 0.0) continue;
    m.support_indices.push_back(t);
    m.coef.push_back(alpha[t] * y[t]);
    m.support_vectors.insert(m.support_vectors.end(), X.begin() + t * dim, X.begin() + (t + 1) * dim);
  }
  return m;
}

SvmModel svm_train(const FeatureMatrix& X, const SvmParams& params) {
  if (!X.labelled()) throw DataError("degenerate training set: matrix is empty or unlabelled");
  std::vector<int> y(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) y[i] = X.labels[i] == Label::tumour ? 1 : -1;
  return svm_train(X.values, X.cols, y, params);
}

std::vector<double> svm_decision(const SvmModel& model, const FeatureMatrix& X) {
  if (X.rows > 0 && X.cols != model.dim) throw std::invalid_argument("svm: feature dimension mismatch");
  std::vector<double> out(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) out[i] = model.decision(X.row(i));
  return out;
}

std::vector<Label> svm_predict(const SvmModel& model, const FeatureMatrix& X) {
  const auto d = svm_decision(model, X);
  std::vector<Label> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = d[i] > 0.0 ? Label::tumour : Label::non_tumour;
  return out;
}

double svm_dual_objective(const SvmModel& model) {
  double w = 0.0;
  for (double c : model.coef) w += std::abs(c);
  double quad = 0.0;
  for (std::size_t i = 0; i < model.n_support(); ++i)
    for (std::size_t j = 0; j < model.n_support(); ++j)
      quad += model.coef[i] * model.coef[j] *
              rbf_kernel(model.support_vector(i), model.support_vector(j), model.gamma);
  return w - 0.5 * quad;
}

SvmParams svm_grid_search(const FeatureMatrix& X, const SvmParams& base, std::uint64_t seed) {
  if (!X.labelled()) throw DataError("degenerate training set: matrix is empty or unlabelled");
  constexpr int kFolds = 3;
  std::vector<std::size_t> order(X.rows);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
  std::vector<int> fold(X.rows);
  for (std::size_t k = 0; k < order.size(); ++k) fold[order[k]] = static_cast<int>(k % kFolds);

  SvmParams best = base;
  double best_score = -1.0;
  const double inv_m = 1.0 / static_cast<double>(X.cols);
  for (double C : {1.0, 10.0, 100.0}) {
    for (double g : {0.01, 0.1, 1.0}) {
      SvmParams p = base;
      p.C = C;
      p.gamma = g * inv_m;
      double score = 0.0;
      int used = 0;
      for (int f = 0; f < kFolds; ++f) {
        std::vector<std::size_t> tr, te;
        for (std::size_t r = 0; r < X.rows; ++r) (fold[r] == f ? te : tr).push_back(r);
        const FeatureMatrix a = select_rows(X, tr), b = select_rows(X, te);
        SvmModel model;
        try {
          model = svm_train(a, p);
        } catch (const DataError&) {
          continue;
        }
        const auto pred = svm_predict(model, b);
        double tp = 0, pos = 0, tn = 0, neg = 0;
        for (std::size_t r = 0; r < b.rows; ++r) {
          if (b.labels[r] == Label::tumour) ++pos, tp += pred[r] == Label::tumour;
          else ++neg, tn += pred[r] == Label::non_tumour;
        }
        score += 0.5 * ((pos > 0 ? tp / pos : 1.0) + (neg > 0 ? tn / neg : 1.0));
        ++used;
      }
      if (used == 0) continue;
      score /= used;
      if (score > best_score) best_score = score, best = p;
    }
  }
  return best;
}

}  // namespace roi
