#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mathemb {

struct Judgment {
  std::string query_id;
  std::string page_id;
  int grade = 0;
};

/// Graded judgments of one query; unjudged pages are grade 0.
class QueryJudgments {
 public:
  void set(const std::string& page_id, int grade) { grades_[page_id] = grade; }
  int grade(std::string_view page_id) const;
  bool contains(std::string_view page_id) const { return grades_.contains(std::string(page_id)); }
  std::size_t relevant_count(int threshold) const;
  /// All judged grades, descending.
  std::vector<int> ideal_grades() const;

 private:
  std::unordered_map<std::string, int> grades_;
};

/// TREC qrels: "query_id iteration page_id grade" per line.
class Qrels {
 public:
  /// Throws Error{MalformedQrelLine} for short lines, negative or non-integer
  /// grades and repeated (query, page) pairs.
  static Qrels parse(std::istream& in);
  static Qrels load(const std::filesystem::path& path);

  void add(const Judgment& judgment);
  const QueryJudgments* find(std::string_view query_id) const;
  std::size_t query_count() const { return queries_.size(); }

 private:
  std::map<std::string, QueryJudgments> queries_;
};

/// Per-query rankings read from a TREC run file. Lines are ordered by score
/// descending with the page id as tie-break; the rank column is ignored.
struct Run {
  std::map<std::string, std::vector<std::string>> rankings;

  /// Lines starting with '#' are skipped. Throws Error{MalformedRunLine}.
  static Run parse(std::istream& in);
  static Run load(const std::filesystem::path& path);
};

/// DCG@k = sum_i (2^g_i - 1) / log2(i + 1) over the top k, normalised by
/// the ideal ordering of all judged grades. 0 when nothing is relevant.
double ndcg_at_k(std::span<const std::string> ranking, const QueryJudgments& judgments, std::size_t k);

/// Relevant-in-top-k / k; the denominator is k even for short rankings.
double precision_at_k(std::span<const std::string> ranking, const QueryJudgments& judgments, std::size_t k,
                      int threshold = 1);

/// Sum of precision at each relevant retrieved rank, over the total number
/// of relevant pages.
double average_precision(std::span<const std::string> ranking, const QueryJudgments& judgments, int threshold = 1);

double reciprocal_rank(std::span<const std::string> ranking, const QueryJudgments& judgments, int threshold = 1);

struct EvalOptions {
  std::vector<std::size_t> ks = {30, 50};
  /// Grades at or above this count as relevant for P@k, MAP and MRR.
  int threshold = 1;
};

struct QueryMetrics {
  std::vector<double> ndcg;       // one per k
  std::vector<double> precision;  // one per k
  double average_precision = 0;
  double reciprocal_rank = 0;

  friend bool operator==(const QueryMetrics&, const QueryMetrics&) = default;
};

struct MetricReport {
  std::vector<std::size_t> ks;
  std::map<std::string, QueryMetrics> per_query;
  QueryMetrics mean;
  /// Run queries absent from the qrels.
  std::vector<std::string> unjudged_queries;
  /// Judged queries without a relevant page, left out of the means.
  std::vector<std::string> no_relevant_queries;

  /// Column names: NDCG@k..., P@k..., MAP, MRR.
  std::vector<std::string> columns() const;
  /// Values in column order.
  static std::vector<double> values(const QueryMetrics& m);
};

MetricReport evaluate_run(const Run& run, const Qrels& qrels, const EvalOptions& options = {});

/// Tab-separated table with a "query" column, one row per evaluated query
/// and a final "all" row of means, four decimals.
void write_report(std::ostream& out, const MetricReport& report, std::string_view provenance = {});

}  // namespace mathemb
