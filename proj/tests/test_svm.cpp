#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "roi/classify.hpp"

namespace {

struct Problem {
  std::vector<double> X;
  std::size_t dim = 2;
  std::vector<int> y;
};

Problem random_problem(std::uint64_t seed, std::size_t n, std::size_t dim) {
  roi::Rng rng(seed);
  Problem p;
  p.dim = dim;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i < 2 ? (i == 0 ? 1 : -1) : (rng.uniform() < 0.4 ? 1 : -1);
    p.y.push_back(label);
    for (std::size_t k = 0; k < dim; ++k) p.X.push_back(rng.uniform(-1, 1) + (k == 0 ? 0.6 * label : 0.0));
  }
  return p;
}

TEST(Svm, RbfKernel) {
  const std::vector<double> a{0, 0}, b{3, 4};
  EXPECT_DOUBLE_EQ(roi::rbf_kernel(a, a, 0.7), 1.0);
  EXPECT_DOUBLE_EQ(roi::rbf_kernel(a, b, 0.1), std::exp(-2.5));
}

TEST(Svm, TwoPointsSplitAtMidpoint) {
  const std::vector<double> X{0.2, -0.4, 1.8, 0.6};
  const std::vector<int> y{1, -1};
  roi::SvmParams p;
  p.gamma = 0.5;
  const auto m = roi::svm_train(X, 2, y, p);
  EXPECT_EQ(m.n_support(), 2u);
  const std::vector<double> mid{1.0, 0.1};
  EXPECT_NEAR(m.decision(mid), 0.0, 1e-6);
  EXPECT_GT(m.decision(std::span<const double>(X.data(), 2)), 0.0);
}

TEST(Svm, XorMatchesDenseQpAndFitsTrainingSet) {
  const std::vector<double> X{0, 0, 1, 1, 0, 1, 1, 0};
  const std::vector<int> y{1, 1, -1, -1};
  roi::SvmParams p;
  p.gamma = 1.0;
  p.C = 10.0;
  const auto m = roi::svm_train(X, 2, y, p);
  for (std::size_t i = 0; i < 4; ++i)
    EXPECT_EQ(m.decision(std::span<const double>(X.data() + 2 * i, 2)) > 0 ? 1 : -1, y[i]);
  const auto ref = oracle::svm_dual_qp(X, 2, y, oracle::svm_box_bounds(y, 10.0, true), 1.0);
  EXPECT_NEAR(roi::svm_dual_objective(m), ref.objective, 1e-4 * std::abs(ref.objective));
}

TEST(Svm, RandomProblemsMatchDenseQpAndSatisfyKkt) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const std::size_t n = 6 + seed * 4;
    const auto prob = random_problem(seed, n, 3);
    for (bool weighting : {true, false}) {
      roi::SvmParams p;
      p.C = seed % 2 ? 1.0 : 10.0;
      p.gamma = 0.5;
      p.class_weighting = weighting;
      const auto m = roi::svm_train(prob.X, prob.dim, prob.y, p);
      const auto ref = oracle::svm_dual_qp(prob.X, prob.dim, prob.y, oracle::svm_box_bounds(prob.y, p.C, weighting), 0.5);
      EXPECT_NEAR(roi::svm_dual_objective(m), ref.objective, 1e-4 * std::abs(ref.objective)) << "seed " << seed;
      EXPECT_LE(oracle::kkt_residual(m, prob.X, prob.y), 1e-3) << "seed " << seed;

      double sum = 0;
      for (double c : m.coef) {
        sum += c;
        EXPECT_LE(std::abs(c), p.C + 1e-12);
      }
      EXPECT_NEAR(sum, 0.0, 1e-6);
    }
  }
}

TEST(Svm, FreeSupportVectorsSitOnTheMargin) {
  const auto prob = random_problem(42, 30, 2);
  roi::SvmParams p;
  p.gamma = 1.0;
  p.C = 100.0;
  const auto m = roi::svm_train(prob.X, prob.dim, prob.y, p);
  int free = 0;
  for (std::size_t s = 0; s < m.n_support(); ++s) {
    const std::size_t i = m.support_indices[s];
    const double bound = prob.y[i] > 0 ? m.c_pos : m.c_neg;
    if (std::abs(m.coef[s]) < bound * (1 - 1e-9)) {
      ++free;
      EXPECT_NEAR(std::abs(m.decision(m.support_vector(s))), 1.0, 1e-3);
    }
  }
  EXPECT_GT(free, 0);
}

Problem duplicated(const Problem& p) {
  Problem d = p;
  d.X.insert(d.X.end(), p.X.begin(), p.X.end());
  d.y.insert(d.y.end(), p.y.begin(), p.y.end());
  return d;
}

// Two copies of a point share one combined multiplier, so duplication is
// the same problem with the box bound doubled.
TEST(Svm, DuplicatingTrainingSetEqualsDoublingC) {
  const auto prob = random_problem(7, 24, 2);
  roi::SvmParams p;
  p.gamma = 0.8;
  p.tolerance = 1e-10;
  const auto m2 = roi::svm_train(duplicated(prob).X, prob.dim, duplicated(prob).y, p);
  p.C *= 2;
  const auto m1 = roi::svm_train(prob.X, prob.dim, prob.y, p);
  for (double gx = -2; gx <= 2; gx += 0.25)
    for (double gy = -2; gy <= 2; gy += 0.25) {
      const std::vector<double> x{gx, gy};
      EXPECT_NEAR(m1.decision(x), m2.decision(x), 1e-6);
    }
}

TEST(Svm, DuplicatingSeparableSetKeepsPredictions) {
  Problem prob;
  roi::Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const int label = i % 2 ? 1 : -1;
    prob.y.push_back(label);
    prob.X.push_back(label * 1.5 + rng.uniform(-0.5, 0.5));
    prob.X.push_back(rng.uniform(-1, 1));
  }
  roi::SvmParams p;
  p.gamma = 0.5;
  p.C = 1e4;
  p.tolerance = 1e-10;
  const auto m1 = roi::svm_train(prob.X, prob.dim, prob.y, p);
  for (double c : m1.coef) ASSERT_LT(std::abs(c), 0.5 * p.C);  // box constraint inactive
  const auto d = duplicated(prob);
  const auto m2 = roi::svm_train(d.X, d.dim, d.y, p);
  for (double gx = -3; gx <= 3; gx += 0.25)
    for (double gy = -2; gy <= 2; gy += 0.25) {
      const std::vector<double> x{gx, gy};
      EXPECT_NEAR(m1.decision(x), m2.decision(x), 1e-6);
      EXPECT_EQ(m1.decision(x) > 0, m2.decision(x) > 0);
    }
}

TEST(Svm, SupportVectorOrderDoesNotMatter) {
  const auto prob = random_problem(3, 20, 2);
  roi::SvmParams p;
  auto m = roi::svm_train(prob.X, prob.dim, prob.y, p);
  auto r = m;
  std::vector<std::size_t> order(m.n_support());
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());
  r.coef.clear();
  r.support_vectors.clear();
  for (std::size_t s : order) {
    r.coef.push_back(m.coef[s]);
    auto sv = m.support_vector(s);
    r.support_vectors.insert(r.support_vectors.end(), sv.begin(), sv.end());
  }
  for (std::size_t i = 0; i < prob.y.size(); ++i) {
    const std::span<const double> x(prob.X.data() + i * 2, 2);
    EXPECT_EQ(m.decision(x) > 0, r.decision(x) > 0);
    EXPECT_NEAR(m.decision(x), r.decision(x), 1e-12);
  }
}

roi::FeatureMatrix to_matrix(const Problem& p) {
  roi::FeatureMatrix m;
  m.rows = p.y.size();
  m.cols = p.dim;
  m.values = p.X;
  for (std::size_t i = 0; i < m.rows; ++i) {
    m.xs.push_back(0);
    m.ys.push_back(0);
    m.distance.push_back(0);
    m.labels.push_back(p.y[i] > 0 ? roi::Label::tumour : roi::Label::non_tumour);
  }
  return m;
}

TEST(Svm, MatrixInterfaceAndEdgeCases) {
  const auto prob = random_problem(11, 30, 2);
  const auto X = to_matrix(prob);
  roi::SvmParams p;
  const auto m = roi::svm_train(X, p);
  EXPECT_DOUBLE_EQ(m.gamma, 0.5);  // 1 / columns
  const auto labels = roi::svm_predict(m, X);
  ASSERT_EQ(labels.size(), X.rows);
  const auto dec = roi::svm_decision(m, X);
  for (std::size_t i = 0; i < X.rows; ++i) EXPECT_EQ(labels[i] == roi::Label::tumour, dec[i] > 0);

  roi::FeatureMatrix empty;
  empty.cols = 2;
  EXPECT_TRUE(roi::svm_predict(m, empty).empty());

  roi::FeatureMatrix wrong = X;
  wrong.cols = 1;
  wrong.rows = X.values.size();
  EXPECT_THROW(roi::svm_predict(m, wrong), std::invalid_argument);

  auto one_class = X;
  for (auto& l : one_class.labels) l = roi::Label::tumour;
  try {
    roi::svm_train(one_class, p);
    FAIL() << "expected DataError";
  } catch (const roi::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate training set"), std::string::npos);
  }
}

TEST(Svm, ZeroDecisionIsNonTumour) {
  roi::SvmModel m;
  m.dim = 1;
  m.bias = 0.0;
  roi::FeatureMatrix X;
  X.rows = 1;
  X.cols = 1;
  X.values = {3.0};
  EXPECT_EQ(roi::svm_predict(m, X)[0], roi::Label::non_tumour);
}

TEST(Svm, GridSearchPicksFromTheGrid) {
  const auto X = to_matrix(random_problem(5, 60, 3));
  roi::SvmParams base;
  const auto best = roi::svm_grid_search(X, base, 9);
  EXPECT_TRUE(best.C == 1 || best.C == 10 || best.C == 100);
  const double g = best.gamma * 3;
  EXPECT_TRUE(std::abs(g - 0.01) < 1e-12 || std::abs(g - 0.1) < 1e-12 || std::abs(g - 1) < 1e-12) << best.gamma;
  EXPECT_EQ(roi::svm_grid_search(X, base, 9).C, best.C);
}

}  // namespace
