#include "mathemb/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <json.hpp>

#include "mathemb/error.hpp"
#include "util.hpp"

namespace mathemb {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Text analysis
// ---------------------------------------------------------------------------

TextAnalyzer TextAnalyzer::from_stopword_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open stopword file " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  TextAnalyzer plain;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    for (auto& w : plain.analyze(line)) words.insert(std::move(w));
  }
  return TextAnalyzer(std::move(words));
}

std::vector<std::string> TextAnalyzer::analyze(std::string_view text) const {
  std::vector<std::string> terms;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !stopwords_.contains(current)) terms.push_back(current);
    current.clear();
  };
  for (unsigned char c : text) {
    if (c >= 'A' && c <= 'Z') {
      current += static_cast<char>(c - 'A' + 'a');
    } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80) {
      current += static_cast<char>(c);
    } else {
      flush();
    }
  }
  flush();
  return terms;
}

// ---------------------------------------------------------------------------
// Stores
// ---------------------------------------------------------------------------

const TokenizedFormula& FormulaStore::add(std::string id, std::string latex, std::vector<SymbolToken> tokens) {
  if (by_id_.contains(id)) throw Error(ErrorCode::BadFormat, "duplicate formula id " + id);
  by_id_.emplace(id, formulae_.size());
  formulae_.push_back(TokenizedFormula{std::move(id), std::move(tokens)});
  latex_.push_back(std::move(latex));
  return formulae_.back();
}

const TokenizedFormula* FormulaStore::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &formulae_[it->second];
}

const Page* Collection::find_page(std::string_view page_id) const {
  auto it = std::find_if(pages.begin(), pages.end(), [&](const Page& p) { return p.page_id == page_id; });
  return it == pages.end() ? nullptr : &*it;
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": " + what);
}

bool valid_id(const std::string& id) {
  return !id.empty() && std::none_of(id.begin(), id.end(), [](unsigned char c) { return c <= ' '; });
}

std::string string_field(const json& record, const char* key, std::size_t line_no, bool required) {
  auto it = record.find(key);
  if (it == record.end()) {
    if (required) malformed(line_no, std::string("missing field '") + key + "'");
    return {};
  }
  if (!it->is_string()) malformed(line_no, std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

std::vector<std::string> string_list_field(const json& record, const char* key, std::size_t line_no) {
  std::vector<std::string> out;
  auto it = record.find(key);
  if (it == record.end()) return out;
  if (!it->is_array()) malformed(line_no, std::string("field '") + key + "' is not a list");
  for (const auto& v : *it) {
    if (!v.is_string()) malformed(line_no, std::string("field '") + key + "' holds a non-string");
    out.push_back(v.get<std::string>());
  }
  return out;
}

json parse_record(const std::string& line, std::size_t line_no) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    malformed(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!record.is_object()) malformed(line_no, "record is not an object");
  return record;
}

std::vector<SymbolToken> tokenize_field(const std::string& latex, std::size_t line_no, const ClassTables& tables) {
  try {
    return tokenize(latex, tables);
  } catch (const Error& e) {
    malformed(line_no, std::string("formula rejected by tokenizer: ") + e.what());
  }
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

}  // namespace

IngestResult ingest_pages(std::istream& in, const TextAnalyzer& analyzer, const ClassTables& tables) {
  IngestResult result;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json record = parse_record(line, line_no);

    Page page;
    page.page_id = string_field(record, "page_id", line_no, true);
    if (!valid_id(page.page_id)) malformed(line_no, "page_id must be non-empty without whitespace");
    if (!seen.insert(page.page_id).second)
      throw Error(ErrorCode::DuplicatePageId, "line " + std::to_string(line_no) + ": " + page.page_id);
    page.title = string_field(record, "title", line_no, false);
    page.text_terms = analyzer.analyze(page.title);
    for (auto& t : analyzer.analyze(string_field(record, "text", line_no, false))) page.text_terms.push_back(std::move(t));

    auto formulas = string_list_field(record, "formulas", line_no);
    for (std::size_t i = 0; i < formulas.size(); ++i) {
      auto tokens = tokenize_field(formulas[i], line_no, tables);
      std::string id = page.page_id + "#" + std::to_string(i);
      result.collection.formulae.add(id, formulas[i], std::move(tokens));
      page.formula_ids.push_back(std::move(id));
    }
    result.formulae_read += formulas.size();
    result.collection.pages.push_back(std::move(page));
    ++result.pages_read;
  }
  return result;
}

IngestResult ingest_pages(const std::filesystem::path& path, const TextAnalyzer& analyzer, const ClassTables& tables) {
  auto in = open_input(path);
  return ingest_pages(in, analyzer, tables);
}

std::vector<Query> ingest_queries(std::istream& in, const TextAnalyzer& analyzer, const ClassTables& tables) {
  std::vector<Query> queries;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json record = parse_record(line, line_no);

    Query q;
    q.query_id = string_field(record, "query_id", line_no, true);
    if (!valid_id(q.query_id)) malformed(line_no, "query_id must be non-empty without whitespace");
    if (!seen.insert(q.query_id).second)
      throw Error(ErrorCode::DuplicateQueryId, "line " + std::to_string(line_no) + ": " + q.query_id);
    for (const auto& keyword : string_list_field(record, "keywords", line_no))
      for (auto& term : analyzer.analyze(keyword)) q.keywords.push_back(std::move(term));
    auto formulas = string_list_field(record, "formulas", line_no);
    for (std::size_t i = 0; i < formulas.size(); ++i)
      q.formulae.push_back(
          TokenizedFormula{q.query_id + "#" + std::to_string(i), tokenize_field(formulas[i], line_no, tables)});
    if (q.keywords.empty() && q.formulae.empty()) malformed(line_no, "query has neither keywords nor formulas");
    queries.push_back(std::move(q));
  }
  return queries;
}

std::vector<Query> ingest_queries(const std::filesystem::path& path, const TextAnalyzer& analyzer,
                                  const ClassTables& tables) {
  auto in = open_input(path);
  return ingest_queries(in, analyzer, tables);
}

// ---------------------------------------------------------------------------
// Filtering and vocabulary
// ---------------------------------------------------------------------------

TrainingCorpus filter_corpus(std::span<const TokenizedFormula> formulae) {
  TrainingCorpus corpus;
  for (const auto& f : formulae) {
    if (passes_filter(f.tokens)) {
      corpus.formulae.push_back(f);
      ++corpus.kept;
    } else {
      ++corpus.dropped;
    }
  }
  return corpus;
}

Vocabulary::Vocabulary(std::vector<std::pair<std::string, std::uint64_t>> entries, double sampling_power)
    : power_(sampling_power) {
  surfaces_.reserve(entries.size());
  counts_.reserve(entries.size());
  double norm = 0;
  for (auto& [surface, count] : entries) {
    if (count == 0) throw Error(ErrorCode::InvalidConfig, "vocabulary count must be positive for " + surface);
    if (!index_.emplace(surface, surfaces_.size()).second)
      throw Error(ErrorCode::BadFormat, "duplicate vocabulary surface " + surface);
    surfaces_.push_back(std::move(surface));
    counts_.push_back(count);
    total_ += count;
    probabilities_.push_back(std::pow(static_cast<double>(count), power_));
    norm += probabilities_.back();
  }
  double running = 0;
  for (double& p : probabilities_) {
    p /= norm;
    running += p;
    cumulative_.push_back(running);
  }
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view surface) const {
  auto it = index_.find(std::string(surface));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::sample(double u) const {
  // the last cumulative entry can sit a few ulps below 1
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) return cumulative_.size() - 1;
  return static_cast<std::size_t>(it - cumulative_.begin());
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t h = detail::fnv1a("vocab");
  for (std::size_t i = 0; i < size(); ++i) {
    h = detail::fnv1a(surfaces_[i], h);
    h = detail::fnv1a("\t" + std::to_string(counts_[i]) + "\n", h);
  }
  return h;
}

Vocabulary build_vocabulary(std::span<const TokenizedFormula> corpus, std::size_t min_count, double sampling_power) {
  if (min_count == 0) throw Error(ErrorCode::InvalidConfig, "min_count must be >= 1");
  std::map<std::string, std::uint64_t> counts;
  for (const auto& f : corpus)
    for (const auto& t : f.tokens) ++counts[t.surface];

  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [surface, count] : counts)
    if (count >= min_count) kept.emplace_back(surface, count);
  if (kept.empty()) throw Error(ErrorCode::EmptyVocabulary, "no surface reaches min_count " + std::to_string(min_count));
  // std::map iteration is lexicographic, so a stable sort keeps that as the tie-break
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return Vocabulary(std::move(kept), sampling_power);
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

void save_collection(std::ostream& out, const Collection& collection, std::string_view provenance) {
  out << kCorpusHeader << '\n';
  detail::write_provenance(out, provenance);
  out << "pages " << collection.pages.size() << '\n';
  for (const auto& page : collection.pages) {
    json formulas = json::array();
    for (const auto& id : page.formula_ids) {
      const TokenizedFormula* f = collection.formulae.find(id);
      if (!f) throw Error(ErrorCode::BadFormat, "page " + page.page_id + " references unknown formula " + id);
      json surfaces = json::array();
      for (const auto& t : f->tokens) surfaces.push_back(t.surface);
      std::size_t index = static_cast<std::size_t>(f - collection.formulae.formulae().data());
      formulas.push_back(json{{"id", id}, {"latex", collection.formulae.latex(index)}, {"tokens", surfaces}});
    }
    json record = {{"page_id", page.page_id},
                   {"title", page.title},
                   {"text_terms", page.text_terms},
                   {"formulas", formulas}};
    out << record.dump() << '\n';
  }
}

Collection load_collection(std::istream& in, const ClassTables& tables) {
  detail::expect_header(in, kCorpusHeader);
  std::string line;
  if (!detail::next_data_line(in, line) || line.rfind("pages ", 0) != 0)
    throw Error(ErrorCode::BadFormat, "missing 'pages' count line");
  std::size_t expected = std::stoul(line.substr(6));

  Collection collection;
  std::unordered_set<std::string> seen;
  while (detail::next_data_line(in, line)) {
    json record;
    try {
      record = json::parse(line);
      Page page;
      page.page_id = record.at("page_id").get<std::string>();
      page.title = record.at("title").get<std::string>();
      page.text_terms = record.at("text_terms").get<std::vector<std::string>>();
      for (const auto& f : record.at("formulas")) {
        std::vector<SymbolToken> tokens;
        for (const auto& s : f.at("tokens")) {
          auto surface = s.get<std::string>();
          TokenClass cls = tables.classify(surface);
          tokens.push_back(SymbolToken{std::move(surface), cls});
        }
        auto id = f.at("id").get<std::string>();
        collection.formulae.add(id, f.at("latex").get<std::string>(), std::move(tokens));
        page.formula_ids.push_back(std::move(id));
      }
      if (!seen.insert(page.page_id).second) throw Error(ErrorCode::DuplicatePageId, page.page_id);
      collection.pages.push_back(std::move(page));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::BadFormat, std::string("corrupt corpus record: ") + e.what());
    }
  }
  if (collection.pages.size() != expected)
    throw Error(ErrorCode::BadFormat, "corpus declares " + std::to_string(expected) + " pages, found " +
                                          std::to_string(collection.pages.size()));
  return collection;
}

void save_training_corpus(std::ostream& out, const TrainingCorpus& corpus, std::string_view provenance) {
  out << kTrainingHeader << '\n';
  detail::write_provenance(out, provenance);
  out << "kept " << corpus.kept << " dropped " << corpus.dropped << '\n';
  for (const auto& f : corpus.formulae) out << f.id << '\t' << join_surfaces(f.tokens) << '\n';
}

TrainingCorpus load_training_corpus(std::istream& in, const ClassTables& tables) {
  detail::expect_header(in, kTrainingHeader);
  std::string line;
  if (!detail::next_data_line(in, line)) throw Error(ErrorCode::BadFormat, "missing kept/dropped line");
  auto fields = detail::split_ws(line);
  if (fields.size() != 4 || fields[0] != "kept" || fields[2] != "dropped")
    throw Error(ErrorCode::BadFormat, "bad kept/dropped line: " + line);
  TrainingCorpus corpus;
  corpus.kept = std::stoul(std::string(fields[1]));
  corpus.dropped = std::stoul(std::string(fields[3]));
  while (detail::next_data_line(in, line)) {
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(ErrorCode::BadFormat, "training line without tab: " + line);
    // surfaces are whitespace-free, so re-tokenizing the joined form is exact
    corpus.formulae.push_back(TokenizedFormula{line.substr(0, tab), tokenize(std::string_view(line).substr(tab + 1), tables)});
  }
  if (corpus.formulae.size() != corpus.kept)
    throw Error(ErrorCode::BadFormat, "training corpus declares " + std::to_string(corpus.kept) + " formulae, found " +
                                          std::to_string(corpus.formulae.size()));
  return corpus;
}

}  // namespace mathemb
