#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mathemb/corpus.hpp"
#include "mathemb/embeddings.hpp"

namespace mathemb {

inline constexpr std::string_view kIndexHeader = "MATHEMB-INDEX v1";

/// Score given to a page without usable formulae; below any cosine mean.
inline constexpr double kFormulaFloor = -1.0;

/// Term statistics for the Dirichlet-smoothed query-likelihood model.
class TextIndex {
 public:
  TextIndex() = default;
  explicit TextIndex(const Collection& collection);

  std::size_t page_count() const { return page_ids_.size(); }
  const std::string& page_id(std::size_t i) const { return page_ids_[i]; }
  std::optional<std::size_t> page_index(std::string_view page_id) const;

  std::uint64_t term_frequency(std::size_t page, std::string_view term) const;
  std::uint64_t page_length(std::size_t page) const { return lengths_[page]; }
  std::uint64_t collection_frequency(std::string_view term) const;
  std::uint64_t collection_length() const { return collection_length_; }

  void save(std::ostream& out, std::string_view provenance = {}) const;
  static TextIndex load(std::istream& in);

 private:
  std::vector<std::string> page_ids_;
  std::unordered_map<std::string, std::size_t> page_lookup_;
  std::vector<std::unordered_map<std::string, std::uint64_t>> tf_;
  std::vector<std::uint64_t> lengths_;
  std::unordered_map<std::string, std::uint64_t> cf_;
  std::uint64_t collection_length_ = 0;

  void add_page(std::string page_id, std::unordered_map<std::string, std::uint64_t> tf);
};

/// sum over query terms w of log((tf(w,d) + mu p(w|C)) / (|d| + mu)); terms
/// absent from the collection contribute nothing. Throws Error{UnknownPage}
/// and Error{InvalidConfig} for mu <= 0.
double lm_score(std::span<const std::string> keywords, std::string_view page_id, const TextIndex& index, double mu);

/// Mean over query vectors of the mean cosine against the page vectors, the
/// double average of the formula2vec page-matching method. An empty page
/// scores kFormulaFloor. Throws Error{NoQueryFormulae} for an empty query.
double formula_page_score(std::span<const std::vector<double>> query_vectors,
                          std::span<const std::vector<double>> page_vectors);

/// (F + alpha T) / (1 + alpha). Throws Error{NegativeAlpha}.
double combined_score(double f_norm, double t_norm, double alpha);

/// Maps each value to (v - min) / (max - min); all zeros when max == min.
std::vector<double> min_max_normalize(std::span<const double> values);

/// Supplies formula vectors: trained rows for corpus formulae, inferred
/// vectors for everything else. Formulae with no in-vocabulary token have
/// no vector.
class FormulaEncoder {
 public:
  struct Options {
    std::size_t infer_steps = 50;
    /// 0 means the table's lr_start.
    double infer_lr = 0;
  };

  FormulaEncoder(const EmbeddingTable& table, const Collection& collection, Options options);
  FormulaEncoder(const EmbeddingTable& table, const Collection& collection)
      : FormulaEncoder(table, collection, Options{}) {}

  std::optional<std::vector<double>> encode(const TokenizedFormula& formula) const;

  /// Vectors of the page's formulae that have one, in page order.
  const std::vector<std::vector<double>>& page_vectors(std::string_view page_id) const;
  std::vector<std::vector<double>> query_vectors(const Query& query) const;

  std::size_t inferred_page_formulae() const { return inferred_; }
  std::size_t unencodable_page_formulae() const { return unencodable_; }

 private:
  const EmbeddingTable& table_;
  Options options_;
  std::unordered_map<std::string, std::vector<std::vector<double>>> pages_;
  std::size_t inferred_ = 0;
  std::size_t unencodable_ = 0;
};

/// Convenience overload over an encoder.
double formula_page_score(const Query& query, const Page& page, const FormulaEncoder& encoder);

enum class RankingMethod { Formula2Vec, LanguageModel, Combined };

std::string_view to_string(RankingMethod method) noexcept;
RankingMethod parse_ranking_method(std::string_view name);

struct PageScore {
  std::string page_id;
  double formula = 0;        // raw F
  double text = 0;           // raw T (log-likelihood)
  double formula_norm = 0;   // min-max normalised over the candidate set
  double text_norm = 0;
  double combined = 0;
  double score = 0;          // the value the list is sorted by
};

struct RankedList {
  std::string query_id;
  std::vector<PageScore> pages;
};

struct RankingInputs {
  const Collection& collection;
  const TextIndex* index = nullptr;
  const FormulaEncoder* encoder = nullptr;
};

/// Scores every page of the collection. FORMULA2VEC sorts by raw F, LM by raw
/// T, COMBINED by combined_score of the min-max normalised F and T. A query
/// without usable formulae gives F = 0 everywhere under COMBINED and
/// Error{NoQueryFormulae} under FORMULA2VEC. Ties go to the smaller page_id.
RankedList rank_pages(const Query& query, const RankingInputs& inputs, RankingMethod method, double alpha, double mu);

/// "query_id Q0 page_id rank score run_tag" lines, at most `top` per list.
void write_trec_run(std::ostream& out, std::span<const RankedList> lists, std::string_view run_tag, std::size_t top,
                    std::string_view provenance = {});

}  // namespace mathemb
