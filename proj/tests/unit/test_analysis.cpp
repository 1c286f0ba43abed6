#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mathemb/analysis.hpp"
#include "mathemb/error.hpp"
#include "oracles.hpp"

using namespace mathemb;
namespace mt = mathemb::testing;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

EmbeddingTable table_from(const std::vector<std::vector<double>>& rows) {
  EmbeddingTable t;
  t.vocab = mt::toy_vocabulary(rows.size());
  t.input = Matrix(rows.size(), rows.front().size());
  t.context = Matrix(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), t.input.row(i).begin());
  t.config.dim = rows.front().size();
  return t;
}

// Brute-force neighbours: every pair scored with a separately written cosine.
std::vector<std::string> oracle_neighbors(const EmbeddingTable& t, std::size_t query, std::size_t k) {
  std::vector<std::pair<double, std::string>> scored;
  auto q = t.input.row(query);
  for (std::size_t i = 0; i < t.vocab.size(); ++i) {
    if (i == query) continue;
    auto r = t.input.row(i);
    double d = 0, a = 0, b = 0;
    for (std::size_t j = 0; j < q.size(); ++j) d += q[j] * r[j], a += q[j] * q[j], b += r[j] * r[j];
    scored.emplace_back(-d / std::sqrt(a * b), t.vocab.surface(i));
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(scored[i].second);
  return out;
}

}  // namespace

TEST(Cosine, Examples) {
  EXPECT_NEAR(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0, 1e-15);
  EXPECT_NEAR(cosine(std::vector<double>{1, 2}, std::vector<double>{2, 4}), 1.0, 1e-15);
  EXPECT_NEAR(cosine(std::vector<double>{1, 1}, std::vector<double>{1, 0}), 1 / std::sqrt(2.0), 1e-12);
}

TEST(Cosine, Errors) {
  EXPECT_EQ(code_of([] { cosine(std::vector<double>{0, 0}, std::vector<double>{1, 0}); }), ErrorCode::ZeroVector);
  EXPECT_EQ(code_of([] { cosine(std::vector<double>{1}, std::vector<double>{1, 0}); }), ErrorCode::DimensionMismatch);
}

TEST(Cosine, SymmetricAndBounded) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  for (int i = 0; i < 500; ++i) {
    std::vector<double> u(7), v(7);
    for (auto& x : u) x = n(rng);
    for (auto& x : v) x = n(rng);
    EXPECT_EQ(cosine(u, v), cosine(v, u));
    EXPECT_LE(std::abs(cosine(u, v)), 1.0);
  }
}

TEST(Neighbors, AllOthersWhenKIsLarge) {
  auto t = table_from({{1, 0}, {0.9, 0.1}, {0, 1}, {-1, 0}});
  auto list = nearest_neighbors(t, "s0", 10);
  ASSERT_EQ(list.neighbors.size(), 3u);
  EXPECT_EQ(list.neighbors[0].surface, "s1");
  EXPECT_EQ(list.neighbors[2].surface, "s3");
  EXPECT_NEAR(list.neighbors[2].cosine, -1.0, 1e-12);
}

TEST(Neighbors, DuplicateRowRanksFirst) {
  auto t = table_from({{0.3, 0.7, 0.1}, {0.5, 0.1, 0.2}, {0.3, 0.7, 0.1}, {0.2, 0.2, 0.9}});
  auto list = nearest_neighbors(t, "s2", 2);
  EXPECT_EQ(list.neighbors[0].surface, "s0");
  EXPECT_NEAR(list.neighbors[0].cosine, 1.0, 1e-12);
}

TEST(Neighbors, Errors) {
  auto t = table_from({{1, 0}, {0, 1}});
  EXPECT_EQ(code_of([&] { nearest_neighbors(t, "zz", 1); }), ErrorCode::UnknownSurface);
  EXPECT_EQ(code_of([&] { nearest_neighbors(t, "s0", 0); }), ErrorCode::InvalidConfig);
}

TEST(Neighbors, AgreeWithBruteForceOracle) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n;
  for (std::size_t v : {5u, 40u, 200u}) {
    std::vector<std::vector<double>> rows(v, std::vector<double>(6));
    for (auto& r : rows)
      for (auto& x : r) x = n(rng);
    auto t = table_from(rows);
    for (std::size_t q = 0; q < v; q += 7) {
      auto list = nearest_neighbors(t, t.vocab.surface(q), 8);
      std::vector<std::string> got;
      for (const auto& nb : list.neighbors) got.push_back(nb.surface);
      EXPECT_EQ(got, oracle_neighbors(t, q, 8));
    }
  }
}

TEST(Neighbors, ScaleInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<std::vector<double>> rows(30, std::vector<double>(5));
  for (auto& r : rows)
    for (auto& x : r) x = u(rng);
  auto t = table_from(rows);
  auto scaled = t;
  for (double& x : scaled.input.data()) x *= 3.75;
  for (std::size_t q = 0; q < 30; ++q) {
    auto a = nearest_neighbors(t, t.vocab.surface(q), 29);
    auto b = nearest_neighbors(scaled, t.vocab.surface(q), 29);
    for (std::size_t i = 0; i < a.neighbors.size(); ++i) EXPECT_EQ(a.neighbors[i].surface, b.neighbors[i].surface);
  }
}

TEST(Pca, DiagonalLine) {
  Matrix rows(3, 2);
  rows.data() = {0, 0, 1, 1, 2, 2};
  std::vector<std::string> names = {"p", "q", "r"};
  PcaOptions opts;
  opts.components = 1;
  auto p = pca_project(rows, names, opts);
  const double s = std::sqrt(2.0);
  EXPECT_NEAR(p.components.row(0)[0], 1 / s, 1e-9);
  EXPECT_NEAR(p.components.row(0)[1], 1 / s, 1e-9);
  EXPECT_NEAR(p.coordinates.row(0)[0], -s, 1e-9);
  EXPECT_NEAR(p.coordinates.row(1)[0], 0.0, 1e-9);
  EXPECT_NEAR(p.coordinates.row(2)[0], s, 1e-9);
  EXPECT_NEAR(p.variances[0], 2.0, 1e-9);  // sample variance of {-sqrt2, 0, sqrt2}
}

TEST(Pca, IdenticalRowsProjectToZero) {
  Matrix rows(4, 3);
  for (std::size_t i = 0; i < 4; ++i) rows.data()[i * 3] = 2.0, rows.data()[i * 3 + 1] = -1.0;
  std::vector<std::string> names = {"a", "b", "c", "d"};
  auto p = pca_project(rows, names);
  for (double v : p.coordinates.data()) EXPECT_EQ(v, 0.0);
}

TEST(Pca, VariancesAreOrdered) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix rows(25, 6);
    for (std::size_t i = 0; i < 25; ++i)
      for (std::size_t j = 0; j < 6; ++j) rows.row(i)[j] = n(rng) * (1.0 + j);
    std::vector<std::string> names(25, "x");
    PcaOptions opts;
    opts.components = 3;
    auto p = pca_project(rows, names, opts);
    EXPECT_GE(p.variances[0] + 1e-9, p.variances[1]);
    EXPECT_GE(p.variances[1] + 1e-9, p.variances[2]);
    // components are unit length and orthogonal
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) {
        double d = 0;
        for (std::size_t j = 0; j < 6; ++j) d += p.components.row(a)[j] * p.components.row(b)[j];
        EXPECT_NEAR(d, a == b ? 1.0 : 0.0, 1e-6);
      }
  }
}

TEST(Pca, L2NormalizeOption) {
  Matrix rows(3, 2);
  rows.data() = {1, 0, 10, 0, 0, 3};
  std::vector<std::string> names = {"a", "b", "c"};
  PcaOptions opts;
  opts.l2_normalize = true;
  auto p = pca_project(rows, names, opts);
  // a and b coincide once normalised
  EXPECT_NEAR(p.coordinates.row(0)[0], p.coordinates.row(1)[0], 1e-9);
  EXPECT_NEAR(p.coordinates.row(0)[1], p.coordinates.row(1)[1], 1e-9);
}
