#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mathemb/corpus.hpp"
#include "mathemb/embeddings.hpp"
#include "mathemb/evaluation.hpp"
#include "mathemb/retrieval.hpp"

namespace mathemb {

/// Everything downstream of ingestion that a train -> rank -> evaluate pass needs.
struct PipelineConfig {
  TrainingConfig training{.dim = 300, .mode = TrainingMode::Formula2Vec};
  std::size_t min_count = 1;
  double sampling_power = 0.75;
  double alpha = 4.0;
  double mu = 2000.0;
  std::size_t top = 1000;
  FormulaEncoder::Options encoder;
  EvalOptions eval;
};

struct PipelineData {
  const Collection& collection;
  const std::vector<Query>& queries;
  const Qrels& qrels;
  const TrainingCorpus& corpus;
};

/// Ranks every query. Queries FORMULA2VEC cannot rank (no usable formula)
/// are left out and their ids appended to `skipped` when given.
std::vector<RankedList> search_all(std::span<const Query> queries, const RankingInputs& inputs, RankingMethod method,
                                   double alpha, double mu, std::vector<std::string>* skipped = nullptr);

/// The first `top` pages of each list, in list order.
Run to_run(std::span<const RankedList> lists, std::size_t top);

enum class SweepAxis { Dimension, Alpha };

std::string_view to_string(SweepAxis axis) noexcept;

struct SweepRow {
  double value = 0;
  MetricReport report;
};

/// DIMENSION retrains formula2vec at each dimension and ranks with
/// FORMULA2VEC; ALPHA trains once and ranks with COMBINED at each alpha.
/// Throws Error{InvalidConfig} for an empty value list.
std::vector<SweepRow> sweep(SweepAxis axis, std::span<const double> values, const PipelineData& data,
                            const PipelineConfig& config);

/// One row of mean metrics per swept value, first column named after the axis.
void write_sweep(std::ostream& out, SweepAxis axis, std::span<const SweepRow> rows, std::string_view provenance = {});

}  // namespace mathemb
