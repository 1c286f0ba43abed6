#include "mathemb/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include "mathemb/error.hpp"
#include "util.hpp"

namespace mathemb {

int QueryJudgments::grade(std::string_view page_id) const {
  auto it = grades_.find(std::string(page_id));
  return it == grades_.end() ? 0 : it->second;
}

std::size_t QueryJudgments::relevant_count(int threshold) const {
  return static_cast<std::size_t>(
      std::count_if(grades_.begin(), grades_.end(), [&](const auto& g) { return g.second >= threshold; }));
}

std::vector<int> QueryJudgments::ideal_grades() const {
  std::vector<int> grades;
  for (const auto& [page, g] : grades_) grades.push_back(g);
  std::sort(grades.begin(), grades.end(), std::greater<>());
  return grades;
}

void Qrels::add(const Judgment& j) {
  auto& q = queries_[j.query_id];
  if (q.contains(j.page_id))
    throw Error(ErrorCode::MalformedQrelLine, "repeated judgment for " + j.query_id + " " + j.page_id);
  q.set(j.page_id, j.grade);
}

const QueryJudgments* Qrels::find(std::string_view query_id) const {
  auto it = queries_.find(std::string(query_id));
  return it == queries_.end() ? nullptr : &it->second;
}

Qrels Qrels::parse(std::istream& in) {
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = detail::split_ws(line);
    if (fields.empty() || fields[0][0] == '#') continue;
    auto where = "line " + std::to_string(line_no);
    if (fields.size() != 4) throw Error(ErrorCode::MalformedQrelLine, where + ": expected 4 fields");
    int grade = 0;
    auto [end, ec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), grade);
    if (ec != std::errc() || end != fields[3].data() + fields[3].size() || grade < 0)
      throw Error(ErrorCode::MalformedQrelLine, where + ": grade must be a non-negative integer");
    try {
      qrels.add(Judgment{std::string(fields[0]), std::string(fields[2]), grade});
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedQrelLine, where + ": " + e.what());
    }
  }
  return qrels;
}

Qrels Qrels::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return parse(in);
}

Run Run::parse(std::istream& in) {
  struct Entry {
    std::string page;
    double score;
  };
  std::map<std::string, std::vector<Entry>> entries;
  std::map<std::string, std::set<std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = detail::split_ws(line);
    if (fields.empty() || fields[0][0] == '#') continue;
    auto where = "line " + std::to_string(line_no);
    if (fields.size() != 6) throw Error(ErrorCode::MalformedRunLine, where + ": expected 6 fields");
    double score = detail::parse_double(fields[4], ErrorCode::MalformedRunLine, where);
    if (std::isnan(score)) throw Error(ErrorCode::MalformedRunLine, where + ": NaN score");
    std::string query(fields[0]);
    std::string page(fields[2]);
    if (!seen[query].insert(page).second)
      throw Error(ErrorCode::MalformedRunLine, where + ": page " + page + " listed twice for query " + query);
    entries[query].push_back(Entry{std::move(page), score});
  }
  Run run;
  for (auto& [query, list] : entries) {
    std::sort(list.begin(), list.end(), [](const Entry& a, const Entry& b) {
      return a.score != b.score ? a.score > b.score : a.page < b.page;
    });
    auto& ranking = run.rankings[query];
    for (auto& e : list) ranking.push_back(std::move(e.page));
  }
  return run;
}

Run Run::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return parse(in);
}

namespace {

double gain(int grade) { return std::exp2(static_cast<double>(grade)) - 1.0; }
double discount(std::size_t rank) { return std::log2(static_cast<double>(rank) + 1.0); }

}  // namespace

double ndcg_at_k(std::span<const std::string> ranking, const QueryJudgments& judgments, std::size_t k) {
  auto ideal = judgments.ideal_grades();
  double idcg = 0;
  for (std::size_t i = 0; i < std::min(k, ideal.size()); ++i) idcg += gain(ideal[i]) / discount(i + 1);
  if (idcg == 0) return 0;
  double dcg = 0;
  for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) dcg += gain(judgments.grade(ranking[i])) / discount(i + 1);
  return dcg / idcg;
}

double precision_at_k(std::span<const std::string> ranking, const QueryJudgments& judgments, std::size_t k,
                      int threshold) {
  if (k == 0) return 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i)
    if (judgments.grade(ranking[i]) >= threshold) ++hits;
  return static_cast<double>(hits) / static_cast<double>(k);
}

double average_precision(std::span<const std::string> ranking, const QueryJudgments& judgments, int threshold) {
  const std::size_t relevant = judgments.relevant_count(threshold);
  if (relevant == 0) return 0;
  std::size_t hits = 0;
  double sum = 0;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (judgments.grade(ranking[i]) >= threshold) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(relevant);
}

double reciprocal_rank(std::span<const std::string> ranking, const QueryJudgments& judgments, int threshold) {
  for (std::size_t i = 0; i < ranking.size(); ++i)
    if (judgments.grade(ranking[i]) >= threshold) return 1.0 / static_cast<double>(i + 1);
  return 0;
}

std::vector<std::string> MetricReport::columns() const {
  std::vector<std::string> cols;
  for (auto k : ks) cols.push_back("NDCG@" + std::to_string(k));
  for (auto k : ks) cols.push_back("P@" + std::to_string(k));
  cols.emplace_back("MAP");
  cols.emplace_back("MRR");
  return cols;
}

std::vector<double> MetricReport::values(const QueryMetrics& m) {
  std::vector<double> v(m.ndcg);
  v.insert(v.end(), m.precision.begin(), m.precision.end());
  v.push_back(m.average_precision);
  v.push_back(m.reciprocal_rank);
  return v;
}

MetricReport evaluate_run(const Run& run, const Qrels& qrels, const EvalOptions& options) {
  MetricReport report;
  report.ks = options.ks;
  report.mean.ndcg.assign(options.ks.size(), 0.0);
  report.mean.precision.assign(options.ks.size(), 0.0);
  for (const auto& [query, ranking] : run.rankings) {
    const QueryJudgments* judgments = qrels.find(query);
    if (!judgments) {
      report.unjudged_queries.push_back(query);
      continue;
    }
    if (judgments->relevant_count(options.threshold) == 0) {
      report.no_relevant_queries.push_back(query);
      continue;
    }
    QueryMetrics m;
    for (auto k : options.ks) {
      m.ndcg.push_back(ndcg_at_k(ranking, *judgments, k));
      m.precision.push_back(precision_at_k(ranking, *judgments, k, options.threshold));
    }
    m.average_precision = average_precision(ranking, *judgments, options.threshold);
    m.reciprocal_rank = reciprocal_rank(ranking, *judgments, options.threshold);
    report.per_query.emplace(query, std::move(m));
  }
  if (!report.per_query.empty()) {
    const double n = static_cast<double>(report.per_query.size());
    for (const auto& [query, m] : report.per_query) {
      for (std::size_t i = 0; i < options.ks.size(); ++i) {
        report.mean.ndcg[i] += m.ndcg[i];
        report.mean.precision[i] += m.precision[i];
      }
      report.mean.average_precision += m.average_precision;
      report.mean.reciprocal_rank += m.reciprocal_rank;
    }
    for (double& v : report.mean.ndcg) v /= n;
    for (double& v : report.mean.precision) v /= n;
    report.mean.average_precision /= n;
    report.mean.reciprocal_rank /= n;
  }
  return report;
}

void write_report(std::ostream& out, const MetricReport& report, std::string_view provenance) {
  detail::write_provenance(out, provenance);
  out << "query";
  for (const auto& c : report.columns()) out << '\t' << c;
  out << '\n';
  auto row = [&](const std::string& name, const QueryMetrics& m) {
    out << name;
    for (double v : MetricReport::values(m)) out << '\t' << detail::fixed(v, 4);
    out << '\n';
  };
  for (const auto& [query, m] : report.per_query) row(query, m);
  row("all", report.mean);
}

}  // namespace mathemb
