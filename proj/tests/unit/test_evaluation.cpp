#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "mathemb/error.hpp"
#include "mathemb/evaluation.hpp"
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

// Ranking p0, p1, ... with the given grades; every listed page is judged.
struct Case {
  std::vector<std::string> ranking;
  QueryJudgments judgments;
};

Case graded(const std::vector<int>& grades, const std::vector<int>& unretrieved = {}) {
  Case c;
  for (std::size_t i = 0; i < grades.size(); ++i) {
    c.ranking.push_back("p" + std::to_string(i));
    c.judgments.set(c.ranking.back(), grades[i]);
  }
  for (std::size_t i = 0; i < unretrieved.size(); ++i) c.judgments.set("u" + std::to_string(i), unretrieved[i]);
  return c;
}

}  // namespace

TEST(Metrics, HandComputedNdcg) {
  auto c = graded({2, 0, 1});
  EXPECT_NEAR(ndcg_at_k(c.ranking, c.judgments, 3), 3.5 / (3 + 1 / std::log2(3.0)), 1e-12);
  EXPECT_NEAR(ndcg_at_k(c.ranking, c.judgments, 3), 0.9639, 5e-5);
}

TEST(Metrics, HandComputedAveragePrecision) {
  auto c = graded({1, 0, 1, 0});
  EXPECT_NEAR(average_precision(c.ranking, c.judgments), 5.0 / 6.0, 1e-15);
}

TEST(Metrics, SimpleCases) {
  auto c = graded({0, 0, 1});
  EXPECT_NEAR(reciprocal_rank(c.ranking, c.judgments), 1.0 / 3, 1e-15);
  auto five = graded({1, 1, 1, 1, 1});
  EXPECT_EQ(precision_at_k(five.ranking, five.judgments, 5), 1.0);
  EXPECT_EQ(precision_at_k(five.ranking, five.judgments, 10), 0.5);  // fixed denominator
  auto ideal = graded({3, 2, 2, 1, 0});
  EXPECT_EQ(ndcg_at_k(ideal.ranking, ideal.judgments, 5), 1.0);
  auto none = graded({0, 0});
  EXPECT_EQ(ndcg_at_k(none.ranking, none.judgments, 5), 0.0);
  EXPECT_EQ(average_precision(none.ranking, none.judgments), 0.0);
}

TEST(Metrics, UnretrievedRelevantPagesCount) {
  auto c = graded({1, 0}, {1});
  EXPECT_NEAR(average_precision(c.ranking, c.judgments), 0.5, 1e-15);
  EXPECT_LT(ndcg_at_k(c.ranking, c.judgments, 10), 1.0);
}

TEST(Metrics, AgreeWithOracleAndStayInRange) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> grade(0, 3), len(0, 15), extra(0, 4);
  std::uniform_int_distribution<std::size_t> kdist(1, 20);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<int> ranked(len(rng)), missing(extra(rng));
    for (int& g : ranked) g = grade(rng);
    for (int& g : missing) g = grade(rng);
    auto c = graded(ranked, missing);
    std::vector<int> judged = ranked;
    judged.insert(judged.end(), missing.begin(), missing.end());
    const std::size_t k = kdist(rng);
    const int threshold = 1 + trial % 2;
    auto o = mt::oracle_metrics(ranked, judged, k, threshold);
    double values[] = {ndcg_at_k(c.ranking, c.judgments, k), precision_at_k(c.ranking, c.judgments, k, threshold),
                       average_precision(c.ranking, c.judgments, threshold),
                       reciprocal_rank(c.ranking, c.judgments, threshold)};
    EXPECT_NEAR(values[0], o.ndcg, 1e-12);
    EXPECT_NEAR(values[1], o.precision, 1e-12);
    EXPECT_NEAR(values[2], o.average_precision, 1e-12);
    EXPECT_NEAR(values[3], o.reciprocal_rank, 1e-12);
    for (double v : values) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0 + 1e-15);
    }
  }
}

TEST(Metrics, SwappingEqualGradesChangesNothing) {
  auto c = graded({2, 1, 0, 1, 2, 0});
  auto swapped = c.ranking;
  std::swap(swapped[1], swapped[3]);  // both grade 1
  for (std::size_t k : {1u, 2u, 4u, 6u}) {
    EXPECT_EQ(ndcg_at_k(c.ranking, c.judgments, k), ndcg_at_k(swapped, c.judgments, k));
    EXPECT_EQ(precision_at_k(c.ranking, c.judgments, k), precision_at_k(swapped, c.judgments, k));
  }
  EXPECT_EQ(average_precision(c.ranking, c.judgments), average_precision(swapped, c.judgments));
  EXPECT_EQ(reciprocal_rank(c.ranking, c.judgments), reciprocal_rank(swapped, c.judgments));
}

TEST(Metrics, OnlyPrefixMattersAtCutoff) {
  auto c = graded({1, 0, 2, 1, 1, 0, 2});
  std::vector<std::string> prefix(c.ranking.begin(), c.ranking.begin() + 3);
  prefix.push_back("zz");  // unjudged filler after the cutoff
  EXPECT_EQ(ndcg_at_k(c.ranking, c.judgments, 3), ndcg_at_k(prefix, c.judgments, 3));
  EXPECT_EQ(precision_at_k(c.ranking, c.judgments, 3), precision_at_k(prefix, c.judgments, 3));
}

TEST(Files, QrelsAndRunParsing) {
  std::istringstream qrels_in("# judged\nQ1 0 a 2\nQ1 0 b 0\nQ2 0 c 1\n");
  auto qrels = Qrels::parse(qrels_in);
  EXPECT_EQ(qrels.query_count(), 2u);
  EXPECT_EQ(qrels.find("Q1")->grade("a"), 2);
  EXPECT_EQ(qrels.find("Q1")->grade("zzz"), 0);

  // rank column is ignored: order comes from score, then page id
  std::istringstream run_in("# header\nQ1 Q0 b 1 0.5 t\nQ1 Q0 a 2 0.9 t\nQ1 Q0 c 3 0.5 t\n");
  auto run = Run::parse(run_in);
  EXPECT_EQ(run.rankings.at("Q1"), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Files, MalformedInput) {
  std::istringstream short_qrel("Q1 0 a\n");
  EXPECT_EQ(code_of([&] { Qrels::parse(short_qrel); }), ErrorCode::MalformedQrelLine);
  std::istringstream bad_grade("Q1 0 a x\n");
  EXPECT_EQ(code_of([&] { Qrels::parse(bad_grade); }), ErrorCode::MalformedQrelLine);
  std::istringstream bad_score("Q1 Q0 a 1 high t\n");
  EXPECT_EQ(code_of([&] { Run::parse(bad_score); }), ErrorCode::MalformedRunLine);
  std::istringstream dup("Q1 Q0 a 1 1 t\nQ1 Q0 a 2 0.5 t\n");
  EXPECT_EQ(code_of([&] { Run::parse(dup); }), ErrorCode::MalformedRunLine);
}

TEST(Report, SingleRelevantPageAtRankOne) {
  mathemb::Run run;
  run.rankings["Q"] = {"p"};
  Qrels qrels;
  qrels.add(Judgment{"Q", "p", 1});
  auto report = evaluate_run(run, qrels);
  const auto& m = report.per_query.at("Q");
  EXPECT_EQ(m.ndcg, (std::vector<double>{1.0, 1.0}));
  EXPECT_NEAR(m.precision[0], 1.0 / 30, 1e-15);
  EXPECT_NEAR(m.precision[1], 1.0 / 50, 1e-15);
  EXPECT_EQ(m.average_precision, 1.0);
  EXPECT_EQ(m.reciprocal_rank, 1.0);
}

TEST(Report, SkipsUnjudgedAndExcludesQueriesWithoutRelevantPages) {
  mathemb::Run run;
  run.rankings["A"] = {"x", "y"};
  run.rankings["B"] = {"z"};
  run.rankings["C"] = {"w"};
  Qrels qrels;
  qrels.add(Judgment{"A", "y", 1});
  qrels.add(Judgment{"B", "z", 0});
  auto report = evaluate_run(run, qrels, EvalOptions{{1, 2}, 1});
  EXPECT_EQ(report.unjudged_queries, (std::vector<std::string>{"C"}));
  EXPECT_EQ(report.no_relevant_queries, (std::vector<std::string>{"B"}));
  ASSERT_EQ(report.per_query.size(), 1u);
  EXPECT_EQ(report.mean.reciprocal_rank, 0.5);

  std::ostringstream out;
  write_report(out, report, "prov");
  EXPECT_EQ(out.str(),
            "# prov\n"
            "query\tNDCG@1\tNDCG@2\tP@1\tP@2\tMAP\tMRR\n"
            "A\t0.0000\t0.6309\t0.0000\t0.5000\t0.5000\t0.5000\n"
            "all\t0.0000\t0.6309\t0.0000\t0.5000\t0.5000\t0.5000\n");
}
