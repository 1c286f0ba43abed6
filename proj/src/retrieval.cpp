#include "mathemb/retrieval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>

#include "mathemb/analysis.hpp"
#include "mathemb/error.hpp"
#include "util.hpp"

namespace mathemb {

// ---------------------------------------------------------------------------
// Text index and language model
// ---------------------------------------------------------------------------

TextIndex::TextIndex(const Collection& collection) {
  for (const auto& page : collection.pages) {
    std::unordered_map<std::string, std::uint64_t> tf;
    for (const auto& term : page.text_terms) ++tf[term];
    add_page(page.page_id, std::move(tf));
  }
}

void TextIndex::add_page(std::string page_id, std::unordered_map<std::string, std::uint64_t> tf) {
  if (!page_lookup_.emplace(page_id, page_ids_.size()).second)
    throw Error(ErrorCode::DuplicatePageId, page_id);
  std::uint64_t length = 0;
  for (const auto& [term, count] : tf) {
    length += count;
    cf_[term] += count;
  }
  collection_length_ += length;
  page_ids_.push_back(std::move(page_id));
  tf_.push_back(std::move(tf));
  lengths_.push_back(length);
}

std::optional<std::size_t> TextIndex::page_index(std::string_view page_id) const {
  auto it = page_lookup_.find(std::string(page_id));
  if (it == page_lookup_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t TextIndex::term_frequency(std::size_t page, std::string_view term) const {
  const auto& tf = tf_.at(page);
  auto it = tf.find(std::string(term));
  return it == tf.end() ? 0 : it->second;
}

std::uint64_t TextIndex::collection_frequency(std::string_view term) const {
  auto it = cf_.find(std::string(term));
  return it == cf_.end() ? 0 : it->second;
}

void TextIndex::save(std::ostream& out, std::string_view provenance) const {
  out << kIndexHeader << '\n';
  detail::write_provenance(out, provenance);
  out << "pages " << page_ids_.size() << '\n';
  for (std::size_t i = 0; i < page_ids_.size(); ++i) {
    std::map<std::string_view, std::uint64_t> sorted(tf_[i].begin(), tf_[i].end());
    out << page_ids_[i];
    for (const auto& [term, count] : sorted) out << ' ' << term << ':' << count;
    out << '\n';
  }
}

TextIndex TextIndex::load(std::istream& in) {
  detail::expect_header(in, kIndexHeader);
  std::string line;
  if (!detail::next_data_line(in, line) || line.rfind("pages ", 0) != 0)
    throw Error(ErrorCode::BadFormat, "index: missing 'pages' line");
  const std::size_t expected = std::stoul(line.substr(6));
  TextIndex index;
  while (detail::next_data_line(in, line)) {
    auto fields = detail::split_ws(line);
    if (fields.empty()) throw Error(ErrorCode::BadFormat, "index: empty page line");
    std::unordered_map<std::string, std::uint64_t> tf;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto colon = fields[i].rfind(':');
      if (colon == std::string_view::npos) throw Error(ErrorCode::BadFormat, "index: bad posting " + std::string(fields[i]));
      auto digits = fields[i].substr(colon + 1);
      std::uint64_t count = 0;
      auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), count);
      if (ec != std::errc() || end != digits.data() + digits.size() || digits.empty())
        throw Error(ErrorCode::BadFormat, "index: bad count in " + std::string(fields[i]));
      tf[std::string(fields[i].substr(0, colon))] = count;
    }
    index.add_page(std::string(fields[0]), std::move(tf));
  }
  if (index.page_count() != expected) throw Error(ErrorCode::BadFormat, "index: page count mismatch");
  return index;
}

double lm_score(std::span<const std::string> keywords, std::string_view page_id, const TextIndex& index, double mu) {
  if (!(mu > 0)) throw Error(ErrorCode::InvalidConfig, "mu must be > 0");
  auto page = index.page_index(page_id);
  if (!page) throw Error(ErrorCode::UnknownPage, std::string(page_id));
  const double collection_length = static_cast<double>(index.collection_length());
  const double doc_length = static_cast<double>(index.page_length(*page));
  double score = 0;
  for (const auto& term : keywords) {
    const auto cf = index.collection_frequency(term);
    if (cf == 0) continue;
    const double background = static_cast<double>(cf) / collection_length;
    const double tf = static_cast<double>(index.term_frequency(*page, term));
    score += std::log((tf + mu * background) / (doc_length + mu));
  }
  return score;
}

// ---------------------------------------------------------------------------
// Formula matching
// ---------------------------------------------------------------------------

double formula_page_score(std::span<const std::vector<double>> query_vectors,
                          std::span<const std::vector<double>> page_vectors) {
  if (query_vectors.empty()) throw Error(ErrorCode::NoQueryFormulae, "query has no usable formula");
  if (page_vectors.empty()) return kFormulaFloor;
  double page_score = 0;
  for (const auto& fq : query_vectors) {
    double similarity = 0;
    for (const auto& fp : page_vectors) similarity += cosine(fq, fp);
    similarity /= static_cast<double>(page_vectors.size());
    page_score += similarity;
  }
  return page_score / static_cast<double>(query_vectors.size());
}

double combined_score(double f_norm, double t_norm, double alpha) {
  if (alpha < 0 || std::isnan(alpha)) throw Error(ErrorCode::NegativeAlpha, "alpha must be >= 0");
  return (f_norm + alpha * t_norm) / (1.0 + alpha);
}

std::vector<double> min_max_normalize(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (range == 0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
  return out;
}

FormulaEncoder::FormulaEncoder(const EmbeddingTable& table, const Collection& collection, Options options)
    : table_(table), options_(options) {
  if (table.config.mode != TrainingMode::Formula2Vec)
    throw Error(ErrorCode::InvalidConfig, "formula matching needs a formula2vec model");
  if (options_.infer_lr <= 0) options_.infer_lr = table.config.lr_start;
  for (const auto& page : collection.pages) {
    auto& vectors = pages_[page.page_id];
    for (const auto& id : page.formula_ids) {
      const TokenizedFormula* f = collection.formulae.find(id);
      if (!f) throw Error(ErrorCode::BadFormat, "unknown formula " + id);
      if (auto row = table.formula_row(id)) {
        auto r = table.formula.row(*row);
        vectors.emplace_back(r.begin(), r.end());
        continue;
      }
      if (auto v = encode(*f)) {
        vectors.push_back(std::move(*v));
        ++inferred_;
      } else {
        ++unencodable_;
      }
    }
  }
}

std::optional<std::vector<double>> FormulaEncoder::encode(const TokenizedFormula& formula) const {
  try {
    return infer_vector(formula.tokens, table_, options_.infer_steps, options_.infer_lr,
                        inference_seed(table_, formula.tokens));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnknownTokensOnly) return std::nullopt;
    throw;
  }
}

const std::vector<std::vector<double>>& FormulaEncoder::page_vectors(std::string_view page_id) const {
  auto it = pages_.find(std::string(page_id));
  if (it == pages_.end()) throw Error(ErrorCode::UnknownPage, std::string(page_id));
  return it->second;
}

std::vector<std::vector<double>> FormulaEncoder::query_vectors(const Query& query) const {
  std::vector<std::vector<double>> out;
  for (const auto& f : query.formulae)
    if (auto v = encode(f)) out.push_back(std::move(*v));
  return out;
}

double formula_page_score(const Query& query, const Page& page, const FormulaEncoder& encoder) {
  return formula_page_score(encoder.query_vectors(query), encoder.page_vectors(page.page_id));
}

// ---------------------------------------------------------------------------
// Ranking
// ---------------------------------------------------------------------------

std::string_view to_string(RankingMethod method) noexcept {
  switch (method) {
    case RankingMethod::Formula2Vec: return "formula2vec";
    case RankingMethod::LanguageModel: return "lm";
    case RankingMethod::Combined: return "combined";
  }
  return "combined";
}

RankingMethod parse_ranking_method(std::string_view name) {
  if (name == "formula2vec") return RankingMethod::Formula2Vec;
  if (name == "lm") return RankingMethod::LanguageModel;
  if (name == "combined") return RankingMethod::Combined;
  throw Error(ErrorCode::InvalidConfig, "unknown ranking method '" + std::string(name) + "'");
}

RankedList rank_pages(const Query& query, const RankingInputs& inputs, RankingMethod method, double alpha, double mu) {
  const bool use_formula = method != RankingMethod::LanguageModel;
  const bool use_text = method != RankingMethod::Formula2Vec;
  if (use_formula && !inputs.encoder) throw Error(ErrorCode::InvalidConfig, "ranking needs a formula encoder");
  if (use_text && !inputs.index) throw Error(ErrorCode::InvalidConfig, "ranking needs a text index");
  if (method == RankingMethod::Combined && (alpha < 0 || std::isnan(alpha)))
    throw Error(ErrorCode::NegativeAlpha, "alpha must be >= 0");

  const auto& pages = inputs.collection.pages;
  RankedList list{query.query_id, std::vector<PageScore>(pages.size())};
  for (std::size_t i = 0; i < pages.size(); ++i) list.pages[i].page_id = pages[i].page_id;

  if (use_formula) {
    auto qv = inputs.encoder->query_vectors(query);
    if (qv.empty() && method == RankingMethod::Formula2Vec)
      throw Error(ErrorCode::NoQueryFormulae, "query " + query.query_id + " has no usable formula");
    if (!qv.empty())
      for (std::size_t i = 0; i < pages.size(); ++i)
        list.pages[i].formula = formula_page_score(qv, inputs.encoder->page_vectors(pages[i].page_id));
  }
  if (use_text)
    for (std::size_t i = 0; i < pages.size(); ++i)
      list.pages[i].text = lm_score(query.keywords, pages[i].page_id, *inputs.index, mu);

  std::vector<double> raw_f;
  std::vector<double> raw_t;
  for (const auto& p : list.pages) {
    raw_f.push_back(p.formula);
    raw_t.push_back(p.text);
  }
  auto f_norm = min_max_normalize(raw_f);
  auto t_norm = min_max_normalize(raw_t);
  for (std::size_t i = 0; i < list.pages.size(); ++i) {
    auto& p = list.pages[i];
    p.formula_norm = f_norm[i];
    p.text_norm = t_norm[i];
    if (method == RankingMethod::Combined) p.combined = combined_score(p.formula_norm, p.text_norm, alpha);
    switch (method) {
      case RankingMethod::Formula2Vec: p.score = p.formula; break;
      case RankingMethod::LanguageModel: p.score = p.text; break;
      case RankingMethod::Combined: p.score = p.combined; break;
    }
  }
  std::sort(list.pages.begin(), list.pages.end(), [](const PageScore& a, const PageScore& b) {
    return a.score != b.score ? a.score > b.score : a.page_id < b.page_id;
  });
  return list;
}

void write_trec_run(std::ostream& out, std::span<const RankedList> lists, std::string_view run_tag, std::size_t top,
                    std::string_view provenance) {
  detail::write_provenance(out, provenance);
  for (const auto& list : lists) {
    const std::size_t n = std::min(top, list.pages.size());
    for (std::size_t r = 0; r < n; ++r)
      out << list.query_id << " Q0 " << list.pages[r].page_id << ' ' << (r + 1) << ' '
          << detail::shortest(list.pages[r].score) << ' ' << run_tag << '\n';
  }
}

}  // namespace mathemb
