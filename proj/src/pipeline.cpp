#include "mathemb/pipeline.hpp"

#include <cmath>
#include <ostream>

#include "mathemb/error.hpp"
#include "util.hpp"

namespace mathemb {

std::vector<RankedList> search_all(std::span<const Query> queries, const RankingInputs& inputs, RankingMethod method,
                                   double alpha, double mu, std::vector<std::string>* skipped) {
  std::vector<RankedList> lists;
  for (const auto& q : queries) {
    try {
      lists.push_back(rank_pages(q, inputs, method, alpha, mu));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoQueryFormulae) throw;
      if (skipped) skipped->push_back(q.query_id);
    }
  }
  return lists;
}

Run to_run(std::span<const RankedList> lists, std::size_t top) {
  Run run;
  for (const auto& list : lists) {
    auto& ranking = run.rankings[list.query_id];
    for (std::size_t r = 0; r < std::min(top, list.pages.size()); ++r) ranking.push_back(list.pages[r].page_id);
  }
  return run;
}

std::string_view to_string(SweepAxis axis) noexcept { return axis == SweepAxis::Dimension ? "dimension" : "alpha"; }

std::vector<SweepRow> sweep(SweepAxis axis, std::span<const double> values, const PipelineData& data,
                            const PipelineConfig& config) {
  if (values.empty()) throw Error(ErrorCode::InvalidConfig, "sweep needs at least one value");
  auto vocab = build_vocabulary(data.corpus, config.min_count, config.sampling_power);
  TextIndex index(data.collection);
  std::vector<SweepRow> rows;

  auto evaluate = [&](const EmbeddingTable& table, RankingMethod method, double alpha) {
    FormulaEncoder encoder(table, data.collection, config.encoder);
    RankingInputs inputs{data.collection, &index, &encoder};
    auto lists = search_all(data.queries, inputs, method, alpha, config.mu);
    return evaluate_run(to_run(lists, config.top), data.qrels, config.eval);
  };

  if (axis == SweepAxis::Dimension) {
    for (double value : values) {
      if (!(value >= 1) || value != std::floor(value))
        throw Error(ErrorCode::InvalidConfig, "dimension must be a positive integer");
      TrainingConfig training = config.training;
      training.dim = static_cast<std::size_t>(value);
      auto model = train_formula2vec(data.corpus, vocab, training);
      rows.push_back(SweepRow{value, evaluate(model.table, RankingMethod::Formula2Vec, config.alpha)});
    }
  } else {
    auto model = train_formula2vec(data.corpus, vocab, config.training);
    for (double value : values) rows.push_back(SweepRow{value, evaluate(model.table, RankingMethod::Combined, value)});
  }
  return rows;
}

void write_sweep(std::ostream& out, SweepAxis axis, std::span<const SweepRow> rows, std::string_view provenance) {
  detail::write_provenance(out, provenance);
  out << to_string(axis);
  if (!rows.empty())
    for (const auto& c : rows.front().report.columns()) out << '\t' << c;
  out << '\n';
  for (const auto& row : rows) {
    out << detail::shortest(row.value);
    for (double v : MetricReport::values(row.report.mean)) out << '\t' << detail::fixed(v, 4);
    out << '\n';
  }
}

}  // namespace mathemb
