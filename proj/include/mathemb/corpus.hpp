#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mathemb/tokenizer.hpp"

namespace mathemb {

inline constexpr std::string_view kCorpusHeader = "MATHEMB-CORPUS v1";
inline constexpr std::string_view kTrainingHeader = "MATHEMB-TRAIN v1";

struct Page {
  std::string page_id;
  std::string title;
  std::vector<std::string> text_terms;
  std::vector<std::string> formula_ids;

  friend bool operator==(const Page&, const Page&) = default;
};

struct Query {
  std::string query_id;
  std::vector<std::string> keywords;
  std::vector<TokenizedFormula> formulae;
};

/// Lowercases ASCII, splits on anything that is not an ASCII letter or
/// digit (bytes >= 0x80 count as word characters so UTF-8 words survive) and
/// drops stopwords. No stemming.
class TextAnalyzer {
 public:
  TextAnalyzer() = default;
  explicit TextAnalyzer(std::unordered_set<std::string> stopwords) : stopwords_(std::move(stopwords)) {}

  /// One stopword per line; blank lines and '#' comments ignored.
  static TextAnalyzer from_stopword_file(const std::filesystem::path& path);

  std::vector<std::string> analyze(std::string_view text) const;

 private:
  std::unordered_set<std::string> stopwords_;
};

class FormulaStore {
 public:
  /// Throws Error{BadFormat} if `id` is already present.
  const TokenizedFormula& add(std::string id, std::string latex, std::vector<SymbolToken> tokens);

  const TokenizedFormula* find(std::string_view id) const;
  const std::vector<TokenizedFormula>& formulae() const { return formulae_; }
  const std::string& latex(std::size_t i) const { return latex_[i]; }
  std::size_t size() const { return formulae_.size(); }

 private:
  std::vector<TokenizedFormula> formulae_;
  std::vector<std::string> latex_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

struct Collection {
  std::vector<Page> pages;
  FormulaStore formulae;

  const Page* find_page(std::string_view page_id) const;
};

struct IngestResult {
  Collection collection;
  std::size_t pages_read = 0;
  std::size_t formulae_read = 0;
};

/// Reads the collection format: one JSON object per line,
/// {"page_id": str, "title": str, "text": str, "formulas": [latex, ...]}.
/// Blank lines are skipped. Formula ids are "<page_id>#<n>" (n from 0).
/// Text terms are drawn from the title followed by the text.
///
/// Throws Error{MalformedRecord} (message carries the line number) and
/// Error{DuplicatePageId}.
IngestResult ingest_pages(std::istream& in, const TextAnalyzer& analyzer = {},
                          const ClassTables& tables = ClassTables::builtin());
IngestResult ingest_pages(const std::filesystem::path& path, const TextAnalyzer& analyzer = {},
                          const ClassTables& tables = ClassTables::builtin());

/// Reads {"query_id": str, "keywords": [str, ...], "formulas": [latex, ...]}
/// lines. Keywords pass through the analyzer; query formula ids are
/// "<query_id>#<n>".
std::vector<Query> ingest_queries(std::istream& in, const TextAnalyzer& analyzer = {},
                                  const ClassTables& tables = ClassTables::builtin());
std::vector<Query> ingest_queries(const std::filesystem::path& path, const TextAnalyzer& analyzer = {},
                                  const ClassTables& tables = ClassTables::builtin());

struct TrainingCorpus {
  std::vector<TokenizedFormula> formulae;
  std::size_t kept = 0;
  std::size_t dropped = 0;
};

/// Keeps the formulae accepted by passes_filter, in order.
TrainingCorpus filter_corpus(std::span<const TokenizedFormula> formulae);
inline TrainingCorpus filter_corpus(const FormulaStore& store) { return filter_corpus(store.formulae()); }

class Vocabulary {
 public:
  Vocabulary() = default;

  /// `entries` are (surface, count) in index order; counts must be >= 1.
  Vocabulary(std::vector<std::pair<std::string, std::uint64_t>> entries, double sampling_power);

  std::optional<std::size_t> index_of(std::string_view surface) const;
  const std::string& surface(std::size_t i) const { return surfaces_[i]; }
  std::uint64_t count(std::size_t i) const { return counts_[i]; }
  std::size_t size() const { return surfaces_.size(); }
  bool empty() const { return surfaces_.empty(); }
  std::uint64_t total_count() const { return total_; }
  double sampling_power() const { return power_; }

  /// count^power / sum, one entry per index.
  std::span<const double> sampling_probabilities() const { return probabilities_; }

  /// Maps u in [0, 1) to an index through the cumulative sampling table.
  std::size_t sample(double u) const;

  /// FNV-1a over surfaces and counts; identifies the vocabulary a table was trained on.
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> surfaces_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
  std::uint64_t total_ = 0;
  double power_ = 0.75;
};

/// Counts surfaces, drops those below `min_count`, orders by descending count
/// with lexicographic tie-break. Throws Error{InvalidConfig} for min_count 0
/// and Error{EmptyVocabulary} when nothing survives.
Vocabulary build_vocabulary(std::span<const TokenizedFormula> corpus, std::size_t min_count,
                            double sampling_power = 0.75);
inline Vocabulary build_vocabulary(const TrainingCorpus& corpus, std::size_t min_count,
                                   double sampling_power = 0.75) {
  return build_vocabulary(corpus.formulae, min_count, sampling_power);
}

// Persistence. Both formats start with their version line, followed by
// optional "# ..." provenance lines.

void save_collection(std::ostream& out, const Collection& collection, std::string_view provenance = {});
Collection load_collection(std::istream& in, const ClassTables& tables = ClassTables::builtin());

/// One "<formula id>\t<space-joined surfaces>" line per formula.
void save_training_corpus(std::ostream& out, const TrainingCorpus& corpus, std::string_view provenance = {});
TrainingCorpus load_training_corpus(std::istream& in, const ClassTables& tables = ClassTables::builtin());

}  // namespace mathemb
