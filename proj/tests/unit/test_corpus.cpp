#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "mathemb/corpus.hpp"
#include "mathemb/error.hpp"
#include "oracles.hpp"

using namespace mathemb;

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

IngestResult ingest_text(const std::string& text) {
  std::istringstream in(text);
  return ingest_pages(in);
}

TrainingCorpus corpus_of(std::initializer_list<std::string> latex) {
  TrainingCorpus c;
  int i = 0;
  for (const auto& l : latex) c.formulae.push_back(TokenizedFormula{"f" + std::to_string(i++), tokenize(l)});
  c.kept = c.formulae.size();
  return c;
}

std::string serialized(const Collection& c) {
  std::ostringstream out;
  save_collection(out, c, "test");
  return out.str();
}

}  // namespace

TEST(Ingest, TwoPageFixture) {
  auto result = ingest_pages(mathemb::testing::source_dir() / "tests" / "data" / "two_pages.jsonl");
  EXPECT_EQ(result.pages_read, 2u);
  EXPECT_EQ(result.formulae_read, 3u);
  ASSERT_EQ(result.collection.pages.size(), 2u);
  const Page& first = result.collection.pages[0];
  EXPECT_EQ(first.page_id, "Pythagorean_theorem");
  EXPECT_EQ(first.formula_ids, (std::vector<std::string>{"Pythagorean_theorem#0", "Pythagorean_theorem#1"}));
  // title terms come first, lowercased
  ASSERT_GE(first.text_terms.size(), 3u);
  EXPECT_EQ(first.text_terms[0], "pythagorean");
  EXPECT_EQ(first.text_terms[2], "in");
  ASSERT_NE(result.collection.formulae.find("Successor#0"), nullptr);
  EXPECT_EQ(result.collection.formulae.find("Successor#0")->tokens.size(), 3u);
}

TEST(Ingest, EmptyFile) {
  auto result = ingest_text("");
  EXPECT_EQ(result.pages_read, 0u);
  EXPECT_EQ(result.formulae_read, 0u);
  EXPECT_TRUE(result.collection.pages.empty());
}

TEST(Ingest, DuplicatePageId) {
  EXPECT_EQ(code_of([] { ingest_text("{\"page_id\":\"p\"}\n{\"page_id\":\"p\"}\n"); }), ErrorCode::DuplicatePageId);
}

TEST(Ingest, MalformedRecords) {
  EXPECT_EQ(code_of([] { ingest_text("not json\n"); }), ErrorCode::MalformedRecord);
  EXPECT_EQ(code_of([] { ingest_text("{\"title\":\"x\"}\n"); }), ErrorCode::MalformedRecord);
  EXPECT_EQ(code_of([] { ingest_text("{\"page_id\":\"a b\"}\n"); }), ErrorCode::MalformedRecord);
  EXPECT_EQ(code_of([] { ingest_text("{\"page_id\":\"p\",\"formulas\":[\"x \\\\\"]}\n"); }),
            ErrorCode::MalformedRecord);
  EXPECT_EQ(code_of([] { ingest_text("{\"page_id\":\"p\",\"formulas\":\"x\"}\n"); }), ErrorCode::MalformedRecord);
}

TEST(Ingest, Queries) {
  std::istringstream in(
      "{\"query_id\":\"Q1\",\"keywords\":[\"Right Triangle\"],\"formulas\":[\"a^2+b^2\"]}\n"
      "{\"query_id\":\"Q2\",\"keywords\":[\"sum\"]}\n");
  auto queries = ingest_queries(in);
  ASSERT_EQ(queries.size(), 2u);
  EXPECT_EQ(queries[0].keywords, (std::vector<std::string>{"right", "triangle"}));
  ASSERT_EQ(queries[0].formulae.size(), 1u);
  EXPECT_EQ(queries[0].formulae[0].id, "Q1#0");
  EXPECT_TRUE(queries[1].formulae.empty());

  std::istringstream dup("{\"query_id\":\"Q\",\"keywords\":[\"a\"]}\n{\"query_id\":\"Q\",\"keywords\":[\"b\"]}\n");
  EXPECT_EQ(code_of([&] { ingest_queries(dup); }), ErrorCode::DuplicateQueryId);
  std::istringstream empty_query("{\"query_id\":\"Q\"}\n");
  EXPECT_EQ(code_of([&] { ingest_queries(empty_query); }), ErrorCode::MalformedRecord);
}

TEST(Analyzer, Stopwords) {
  TextAnalyzer analyzer({"the", "of"});
  EXPECT_EQ(analyzer.analyze("The square OF the hypotenuse, x2!"),
            (std::vector<std::string>{"square", "hypotenuse", "x2"}));
}

TEST(Filter, KeepsOnlyPassingFormulae) {
  FormulaStore store;
  store.add("a", "x+y=z+1", tokenize("x+y=z+1"));
  store.add("b", "x+1", tokenize("x+1"));
  auto corpus = filter_corpus(store);
  ASSERT_EQ(corpus.formulae.size(), 1u);
  EXPECT_EQ(corpus.formulae[0].id, "a");
  EXPECT_EQ(corpus.kept, 1u);
  EXPECT_EQ(corpus.dropped, 1u);
}

TEST(Filter, EmptyStore) {
  auto corpus = filter_corpus(FormulaStore{});
  EXPECT_TRUE(corpus.formulae.empty());
  EXPECT_EQ(corpus.kept + corpus.dropped, 0u);
}

TEST(Filter, Idempotent) {
  auto collection = ingest_pages(mathemb::testing::fixture_dir() / "collection.jsonl").collection;
  auto once = filter_corpus(collection.formulae);
  auto twice = filter_corpus(once.formulae);
  EXPECT_EQ(once.formulae, twice.formulae);
  EXPECT_EQ(twice.dropped, 0u);
}

TEST(Vocabulary, SamplingProbabilities) {
  auto corpus = corpus_of({"a a a a a b b c"});
  auto vocab = build_vocabulary(corpus, 2);
  ASSERT_EQ(vocab.size(), 2u);
  EXPECT_EQ(vocab.surface(0), "a");
  EXPECT_EQ(vocab.surface(1), "b");
  const double pa = std::pow(5.0, 0.75), pb = std::pow(2.0, 0.75);
  EXPECT_NEAR(vocab.sampling_probabilities()[0], pa / (pa + pb), 1e-12);
  EXPECT_NEAR(vocab.sampling_probabilities()[0], 0.665, 5e-4);
  EXPECT_NEAR(vocab.sampling_probabilities()[1], 0.335, 5e-4);
  EXPECT_EQ(vocab.total_count(), 7u);
}

TEST(Vocabulary, MinCountOneKeepsEverything) {
  auto vocab = build_vocabulary(corpus_of({"a a a a a b b c"}), 1);
  EXPECT_EQ(vocab.size(), 3u);
}

TEST(Vocabulary, Errors) {
  EXPECT_EQ(code_of([] { build_vocabulary(corpus_of({"a a a a a b b c"}), 10); }), ErrorCode::EmptyVocabulary);
  EXPECT_EQ(code_of([] { build_vocabulary(corpus_of({"a"}), 0); }), ErrorCode::InvalidConfig);
}

TEST(Vocabulary, IndexIsBijection) {
  auto corpus = filter_corpus(ingest_pages(mathemb::testing::fixture_dir() / "collection.jsonl").collection.formulae);
  auto vocab = build_vocabulary(corpus, 1);
  std::set<std::string> surfaces;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    EXPECT_EQ(vocab.index_of(vocab.surface(i)), i);
    surfaces.insert(vocab.surface(i));
  }
  EXPECT_EQ(surfaces.size(), vocab.size());
  EXPECT_FALSE(vocab.index_of("\\notasymbol").has_value());
}

TEST(Vocabulary, SampleFollowsCumulativeTable) {
  auto vocab = build_vocabulary(corpus_of({"a a a a a b b c"}), 1);
  auto p = vocab.sampling_probabilities();
  EXPECT_EQ(vocab.sample(0.0), 0u);
  EXPECT_EQ(vocab.sample(p[0] - 1e-9), 0u);
  EXPECT_EQ(vocab.sample(p[0] + 1e-9), 1u);
  EXPECT_EQ(vocab.sample(0.999999), 2u);
}

TEST(Persistence, CollectionRoundTrip) {
  auto collection = ingest_pages(mathemb::testing::fixture_dir() / "collection.jsonl").collection;
  std::string first = serialized(collection);
  std::istringstream in(first);
  auto reloaded = load_collection(in);
  EXPECT_EQ(reloaded.pages, collection.pages);
  EXPECT_EQ(reloaded.formulae.formulae(), collection.formulae.formulae());
  EXPECT_EQ(serialized(reloaded), first);
}

TEST(Persistence, TrainingCorpusRoundTrip) {
  auto corpus = filter_corpus(ingest_pages(mathemb::testing::fixture_dir() / "collection.jsonl").collection.formulae);
  std::ostringstream out;
  save_training_corpus(out, corpus, "test");
  std::istringstream in(out.str());
  auto reloaded = load_training_corpus(in);
  EXPECT_EQ(reloaded.formulae, corpus.formulae);
  EXPECT_EQ(reloaded.kept, corpus.kept);
  EXPECT_EQ(reloaded.dropped, corpus.dropped);
}

TEST(Persistence, RejectsWrongHeader) {
  std::istringstream in("SOMETHING ELSE\n");
  EXPECT_EQ(code_of([&] { load_collection(in); }), ErrorCode::BadFormat);
}
