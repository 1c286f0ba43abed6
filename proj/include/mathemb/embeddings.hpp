#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mathemb/corpus.hpp"

namespace mathemb {

inline constexpr std::string_view kDocvecHeader = "MATHEMB-DOCVEC v1";
inline constexpr std::string_view kModelFormat = "MATHEMB-MODEL v1";

enum class TrainingMode { Symbol2Vec, Formula2Vec };

std::string_view to_string(TrainingMode mode) noexcept;

struct TrainingConfig {
  std::size_t dim = 100;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double lr_start = 0.025;
  double lr_end = 0.0001;
  std::uint64_t seed = 1;
  TrainingMode mode = TrainingMode::Symbol2Vec;
  /// 1 is the deterministic single-worker mode; more workers share the
  /// tables without locks and give run-dependent results.
  std::size_t workers = 1;
  /// Frequent-token subsampling threshold; 0 disables it.
  double subsample = 0.0;

  /// Throws Error{InvalidConfig} unless dim, window, negatives, epochs and
  /// workers are >= 1 and lr_start >= lr_end > 0.
  void validate() const;

  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Trained vectors. `input` holds the token vectors used for similarity,
/// `context` the output-side vectors of negative sampling, and `formula`
/// one paragraph vector per training formula (Formula2Vec mode only).
struct EmbeddingTable {
  Vocabulary vocab;
  Matrix input;
  Matrix context;
  Matrix formula;
  std::vector<std::string> formula_ids;
  TrainingConfig config;

  std::size_t dim() const { return input.cols(); }
  std::optional<std::size_t> formula_row(std::string_view id) const;

  /// Rebuilds the id -> row map after formula_ids changes.
  void index_formulas();

 private:
  std::unordered_map<std::string, std::size_t> formula_index_;
};

/// Negative-sampling loss -log s(pos.h) - sum_n log s(-neg_n.h), with
/// pre-activations clamped to [-30, 30]. Throws Error{DimensionMismatch}.
double nce_loss(std::span<const double> hidden, std::span<const double> positive,
                std::span<const std::span<const double>> negatives);

/// One CBOW step: h is the mean of the context rows of `table.input`. Applies
/// exact SGD on nce_loss to the target and negative rows of `table.context`
/// and to each context row (gradient of h split equally), and returns the
/// loss before the update. Repeated indices accumulate. Throws
/// Error{EmptyContext} for an empty context.
double cbow_step(std::span<const std::size_t> context, std::size_t target, std::span<const std::size_t> negatives,
                 EmbeddingTable& table, double lr);

/// PV-DM step: as cbow_step with the paragraph row `formula_row` of
/// `table.formula` averaged in with the context rows.
double pvdm_step(std::size_t formula_row, std::span<const std::size_t> context, std::size_t target,
                 std::span<const std::size_t> negatives, EmbeddingTable& table, double lr);

struct TrainingStats {
  std::vector<double> epoch_mean_loss;
  std::size_t steps = 0;
  /// Formulae with fewer than two in-vocabulary tokens (Formula2Vec only).
  std::size_t skipped_formulae = 0;
  /// Negatives dropped after 100 draws that all hit the target.
  std::size_t skipped_negatives = 0;
};

struct TrainedModel {
  EmbeddingTable table;
  TrainingStats stats;
};

/// CBOW with negative sampling over every token position. Tokens missing
/// from `vocab` are removed from their formula first. Throws
/// Error{EmptyCorpus} when no position can be trained on.
TrainedModel train_symbol2vec(const TrainingCorpus& corpus, const Vocabulary& vocab, const TrainingConfig& config);

/// PV-DM: one paragraph vector per corpus formula, trained jointly with the
/// token rows.
TrainedModel train_formula2vec(const TrainingCorpus& corpus, const Vocabulary& vocab, const TrainingConfig& config);

/// Fits a fresh paragraph vector for `tokens` against the frozen rows of a
/// Formula2Vec table: `steps` passes over the formula with learning rate
/// decaying linearly from `lr` to the table's lr_end. Out-of-vocabulary
/// tokens are skipped; Error{UnknownTokensOnly} if none remain.
std::vector<double> infer_vector(std::span<const SymbolToken> tokens, const EmbeddingTable& table, std::size_t steps,
                                 double lr, std::uint64_t seed);

/// Seed used for inference: a hash of the table seed and the surfaces, so a
/// formula always gets the same vector whatever order it is met in.
std::uint64_t inference_seed(const EmbeddingTable& table, std::span<const SymbolToken> tokens);

// Persistence -----------------------------------------------------------

/// word2vec text format: "V dim", then "surface v1 ... vdim" with six decimals.
void write_word2vec(std::ostream& out, const Vocabulary& vocab, const Matrix& vectors);
/// Returns surfaces and vectors in file order.
std::pair<std::vector<std::string>, Matrix> read_word2vec(std::istream& in);

void write_docvec(std::ostream& out, std::span<const std::string> ids, const Matrix& vectors,
                  std::string_view provenance = {});
std::pair<std::vector<std::string>, Matrix> read_docvec(std::istream& in);

/// Writes model.json (config, vocabulary, provenance), vectors.txt,
/// context.txt and, for Formula2Vec, formulas.txt into `dir`.
void save_model(const std::filesystem::path& dir, const EmbeddingTable& table, std::string_view provenance = {});
EmbeddingTable load_model(const std::filesystem::path& dir);

}  // namespace mathemb
