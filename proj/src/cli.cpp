#include "mathemb/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "mathemb/analysis.hpp"
#include "mathemb/corpus.hpp"
#include "mathemb/embeddings.hpp"
#include "mathemb/error.hpp"
#include "mathemb/evaluation.hpp"
#include "mathemb/pipeline.hpp"
#include "mathemb/retrieval.hpp"
#include "mathemb/tokenizer.hpp"
#include "util.hpp"

namespace mathemb {

namespace {

struct Settings {
  // global
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::string tables;
  std::string stopwords;
  bool dump_config = false;

  // paths
  std::string collection;
  std::string corpus;
  std::string train;
  std::string model;
  std::string index;
  std::string queries;
  std::string qrels;
  std::string run;
  std::string out;

  // training
  std::size_t dim = 100;
  std::size_t formula_dim = 300;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double lr_start = 0.025;
  double lr_end = 0.0001;
  std::size_t min_count = 1;
  double sampling_power = 0.75;
  double subsample = 0;

  // analysis
  std::size_t k = 8;
  std::vector<std::string> symbols;
  std::size_t components = 2;
  bool l2_normalize = false;

  // retrieval and evaluation
  std::string method = "combined";
  double alpha = 4.0;
  double mu = 2000.0;
  std::size_t top = 1000;
  std::string run_tag = "mathemb";
  std::size_t infer_steps = 50;
  std::vector<std::size_t> ks = {30, 50};
  int threshold = 1;
  std::string axis = "alpha";
  std::vector<double> values;
};

/// "key=value ..." line written at the top of every artifact.
class Provenance {
 public:
  Provenance(std::string_view command, const Settings& s) {
    line_ << kToolName << ' ' << kToolVersion << " command=" << command << " seed=" << s.seed;
  }
  template <class T>
  Provenance& add(std::string_view key, const T& value) {
    line_ << ' ' << key << '=' << value;
    return *this;
  }
  Provenance& add(std::string_view key, double value) {
    line_ << ' ' << key << '=' << detail::shortest(value);
    return *this;
  }
  std::string str() const { return line_.str(); }

 private:
  std::ostringstream line_;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  return in;
}

// Runs `body` with the --out file, or with `fallback` when --out is empty.
void with_output(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(fallback);
    return;
  }
  auto out = open_output(path);
  body(out);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

ClassTables tables_for(const Settings& s) {
  return s.tables.empty() ? ClassTables::builtin() : ClassTables::load(s.tables);
}

TextAnalyzer analyzer_for(const Settings& s) {
  return s.stopwords.empty() ? TextAnalyzer{} : TextAnalyzer::from_stopword_file(s.stopwords);
}

Collection read_collection(const Settings& s, const ClassTables& tables) {
  auto in = open_input(s.corpus);
  return load_collection(in, tables);
}

TrainingCorpus read_training(const Settings& s, const ClassTables& tables) {
  auto in = open_input(s.train);
  return load_training_corpus(in, tables);
}

TrainingConfig training_config(const Settings& s, TrainingMode mode) {
  TrainingConfig c;
  c.dim = s.dim;
  c.window = s.window;
  c.negatives = s.negatives;
  c.epochs = s.epochs;
  c.lr_start = s.lr_start;
  c.lr_end = s.lr_end;
  c.seed = s.seed;
  c.mode = mode;
  c.workers = s.workers;
  c.subsample = s.subsample;
  c.validate();
  return c;
}

Provenance& add_training(Provenance& p, const Settings& s) {
  return p.add("dim", s.dim)
      .add("window", s.window)
      .add("negatives", s.negatives)
      .add("epochs", s.epochs)
      .add("lr_start", s.lr_start)
      .add("lr_end", s.lr_end)
      .add("min_count", s.min_count)
      .add("sampling_power", s.sampling_power)
      .add("subsample", s.subsample)
      .add("workers", s.workers);
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void cmd_tokenize(const Settings& s, std::istream& in, std::ostream& out) {
  auto tables = tables_for(s);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    try {
      out << join_surfaces(tokenize(line, tables)) << '\n';
    } catch (const Error& e) {
      throw Error(e.code(), "stdin line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void cmd_ingest(const Settings& s, std::ostream& err) {
  auto tables = tables_for(s);
  auto result = ingest_pages(std::filesystem::path(s.collection), analyzer_for(s), tables);
  Provenance p("ingest", s);
  p.add("stopwords", s.stopwords.empty() ? "none" : "custom").add("tables", s.tables.empty() ? "builtin" : "custom");
  with_output(s.out, err, [&](std::ostream& o) { save_collection(o, result.collection, p.str()); });
  err << "pages=" << result.pages_read << " formulae=" << result.formulae_read << '\n';
}

void cmd_filter(const Settings& s, std::ostream& err) {
  auto tables = tables_for(s);
  auto collection = read_collection(s, tables);
  auto corpus = filter_corpus(collection.formulae);
  Provenance p("filter", s);
  with_output(s.out, err, [&](std::ostream& o) { save_training_corpus(o, corpus, p.str()); });
  err << "kept=" << corpus.kept << " dropped=" << corpus.dropped << '\n';
}

void cmd_train(const Settings& s, TrainingMode mode, std::ostream& err) {
  auto tables = tables_for(s);
  auto corpus = read_training(s, tables);
  auto config = training_config(s, mode);
  auto vocab = build_vocabulary(corpus, s.min_count, s.sampling_power);
  auto model = mode == TrainingMode::Symbol2Vec ? train_symbol2vec(corpus, vocab, config)
                                                : train_formula2vec(corpus, vocab, config);
  Provenance p(mode == TrainingMode::Symbol2Vec ? "train-symbol2vec" : "train-formula2vec", s);
  add_training(p, s);
  save_model(s.out, model.table, p.str());
  err << "vocabulary=" << vocab.size() << " steps=" << model.stats.steps
      << " skipped_formulae=" << model.stats.skipped_formulae << '\n';
  for (std::size_t e = 0; e < model.stats.epoch_mean_loss.size(); ++e)
    err << "epoch " << (e + 1) << " mean_loss=" << detail::fixed(model.stats.epoch_mean_loss[e], 6) << '\n';
}

void cmd_neighbors(const Settings& s, std::ostream& out) {
  auto table = load_model(s.model);
  std::vector<std::string> symbols = s.symbols;
  if (symbols.empty())
    for (std::size_t i = 0; i < table.vocab.size(); ++i) symbols.push_back(table.vocab.surface(i));
  // resolve every symbol first so an unknown one leaves no partial output
  std::vector<NeighborList> lists;
  for (const auto& symbol : symbols) lists.push_back(nearest_neighbors(table, symbol, s.k));
  Provenance p("neighbors", s);
  p.add("k", s.k);
  with_output(s.out, out, [&](std::ostream& o) {
    detail::write_provenance(o, p.str());
    o << "surface\trank\tneighbor\tcosine\n";
    for (const auto& list : lists)
      for (std::size_t r = 0; r < list.neighbors.size(); ++r)
        o << list.query << '\t' << (r + 1) << '\t' << list.neighbors[r].surface << '\t'
          << detail::fixed(list.neighbors[r].cosine, 6) << '\n';
  });
}

void cmd_pca(const Settings& s, std::ostream& out) {
  auto table = load_model(s.model);
  PcaOptions options;
  options.components = s.components;
  options.l2_normalize = s.l2_normalize;
  auto projection = pca_project(table, options);
  Provenance p("pca", s);
  p.add("components", s.components).add("l2_normalize", s.l2_normalize ? "true" : "false");
  with_output(s.out, out, [&](std::ostream& o) {
    detail::write_provenance(o, p.str());
    o << "surface";
    for (std::size_t c = 0; c < s.components; ++c) o << '\t' << (c == 0 ? "x" : c == 1 ? "y" : "pc" + std::to_string(c + 1));
    o << '\n';
    for (std::size_t i = 0; i < projection.surfaces.size(); ++i) {
      o << projection.surfaces[i];
      for (double v : projection.coordinates.row(i)) o << '\t' << detail::fixed(v, 6);
      o << '\n';
    }
  });
}

void cmd_index(const Settings& s, std::ostream& out) {
  auto collection = read_collection(s, tables_for(s));
  TextIndex index(collection);
  Provenance p("index-text", s);
  with_output(s.out, out, [&](std::ostream& o) { index.save(o, p.str()); });
}

void cmd_search(const Settings& s, std::ostream& out, std::ostream& err) {
  auto tables = tables_for(s);
  const auto method = parse_ranking_method(s.method);
  auto collection = read_collection(s, tables);
  auto queries = ingest_queries(std::filesystem::path(s.queries), analyzer_for(s), tables);

  std::optional<TextIndex> index;
  if (method != RankingMethod::Formula2Vec) {
    if (s.index.empty()) {
      index.emplace(collection);
    } else {
      auto in = open_input(s.index);
      index = TextIndex::load(in);
    }
  }
  std::optional<EmbeddingTable> table;
  std::optional<FormulaEncoder> encoder;
  if (method != RankingMethod::LanguageModel) {
    if (s.model.empty()) throw Error(ErrorCode::InvalidConfig, "--model is required for method " + s.method);
    table = load_model(s.model);
    encoder.emplace(*table, collection, FormulaEncoder::Options{s.infer_steps, 0});
  }
  RankingInputs inputs{collection, index ? &*index : nullptr, encoder ? &*encoder : nullptr};
  std::vector<std::string> skipped;
  auto lists = search_all(queries, inputs, method, s.alpha, s.mu, &skipped);
  for (const auto& q : skipped) err << "warning: query " << q << " has no usable formula; skipped\n";

  Provenance p("search", s);
  p.add("method", s.method).add("alpha", s.alpha).add("mu", s.mu).add("top", s.top).add("infer_steps", s.infer_steps);
  with_output(s.out, out, [&](std::ostream& o) { write_trec_run(o, lists, s.run_tag, s.top, p.str()); });
}

EvalOptions eval_options(const Settings& s) {
  if (s.ks.empty()) throw Error(ErrorCode::InvalidConfig, "--ks needs at least one cutoff");
  for (auto k : s.ks)
    if (k == 0) throw Error(ErrorCode::InvalidConfig, "cutoffs must be >= 1");
  return EvalOptions{s.ks, s.threshold};
}

std::string join_ks(const std::vector<std::size_t>& ks) {
  std::string out;
  for (auto k : ks) out += (out.empty() ? "" : ",") + std::to_string(k);
  return out;
}

void cmd_evaluate(const Settings& s, std::ostream& out, std::ostream& err) {
  auto run = Run::load(s.run);
  auto qrels = Qrels::load(s.qrels);
  auto report = evaluate_run(run, qrels, eval_options(s));
  for (const auto& q : report.unjudged_queries) err << "warning: query " << q << " has no judgments; skipped\n";
  if (!report.no_relevant_queries.empty())
    err << "queries without relevant pages (excluded from means): " << report.no_relevant_queries.size() << '\n';
  Provenance p("evaluate", s);
  p.add("ks", join_ks(s.ks)).add("threshold", s.threshold);
  with_output(s.out, out, [&](std::ostream& o) { write_report(o, report, p.str()); });
}

void cmd_sweep(const Settings& s, std::ostream& out) {
  auto tables = tables_for(s);
  SweepAxis axis;
  if (s.axis == "dimension") axis = SweepAxis::Dimension;
  else if (s.axis == "alpha") axis = SweepAxis::Alpha;
  else throw Error(ErrorCode::InvalidConfig, "unknown sweep axis " + s.axis);

  auto collection = read_collection(s, tables);
  auto corpus = read_training(s, tables);
  auto queries = ingest_queries(std::filesystem::path(s.queries), analyzer_for(s), tables);
  auto qrels = Qrels::load(s.qrels);

  PipelineConfig config;
  config.training = training_config(s, TrainingMode::Formula2Vec);
  config.min_count = s.min_count;
  config.sampling_power = s.sampling_power;
  config.alpha = s.alpha;
  config.mu = s.mu;
  config.top = s.top;
  config.encoder.infer_steps = s.infer_steps;
  config.eval = eval_options(s);

  auto rows = sweep(axis, s.values, PipelineData{collection, queries, qrels, corpus}, config);
  Provenance p("sweep", s);
  p.add("axis", s.axis);
  add_training(p, s);
  p.add("alpha", s.alpha).add("mu", s.mu).add("top", s.top).add("infer_steps", s.infer_steps).add("ks", join_ks(s.ks));
  with_output(s.out, out, [&](std::ostream& o) { write_sweep(o, axis, rows, p.str()); });
}

// ---------------------------------------------------------------------------
// Option wiring
// ---------------------------------------------------------------------------

void add_training_options(CLI::App* cmd, Settings& s) {
  cmd->add_option("--window", s.window, "context symbols on each side");
  cmd->add_option("--negatives", s.negatives, "negative samples per step");
  cmd->add_option("--epochs", s.epochs, "passes over the corpus");
  cmd->add_option("--lr-start", s.lr_start, "initial learning rate");
  cmd->add_option("--lr-end", s.lr_end, "final learning rate");
  cmd->add_option("--min-count", s.min_count, "drop symbols rarer than this");
  cmd->add_option("--sampling-power", s.sampling_power, "exponent of the negative-sampling distribution");
  cmd->add_option("--subsample", s.subsample, "frequent-symbol subsampling threshold, 0 = off");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"Formula embedding toolkit for mathematical information retrieval", std::string(kToolName)};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kToolVersion));
  app.set_config("--config", "", "read options from a TOML/INI file (flags on the command line win)");
  app.add_flag("--dump-config", s.dump_config, "print the resolved configuration and exit");
  app.add_option("--seed", s.seed, "random seed, recorded in every output header");
  app.add_option("--workers", s.workers, "training threads; 1 is deterministic")->check(CLI::PositiveNumber);
  app.add_option("--tables", s.tables, "directory of symbol classification tables (default: built in)")
      ->check(CLI::ExistingDirectory);
  app.add_option("--stopwords", s.stopwords, "stopword file applied to page text and keywords")
      ->check(CLI::ExistingFile);

  auto* tokenize_cmd = app.add_subcommand("tokenize", "tokenize LaTeX lines from stdin to stdout");

  auto* ingest = app.add_subcommand("ingest", "read a JSON-lines collection into a corpus store");
  ingest->add_option("--collection", s.collection, "collection file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--out", s.out, "corpus store to write")->required();

  auto* filter = app.add_subcommand("filter", "keep formulae with >= 2 distinct variables and >= 3 operators");
  filter->add_option("--corpus", s.corpus, "corpus store")->required()->check(CLI::ExistingFile);
  filter->add_option("--out", s.out, "training corpus to write")->required();

  auto* sym = app.add_subcommand("train-symbol2vec", "train CBOW symbol vectors with negative sampling");
  sym->add_option("--train", s.train, "training corpus")->required()->check(CLI::ExistingFile);
  sym->add_option("--out", s.out, "model directory to write")->required();
  sym->add_option("--dim", s.dim, "vector dimension (reference setting: 100)");
  add_training_options(sym, s);

  auto* form = app.add_subcommand("train-formula2vec", "train PV-DM formula vectors");
  form->add_option("--train", s.train, "training corpus")->required()->check(CLI::ExistingFile);
  form->add_option("--out", s.out, "model directory to write")->required();
  form->add_option("--dim", s.formula_dim, "vector dimension (reference setting: 300)");
  add_training_options(form, s);

  auto* neighbors = app.add_subcommand("neighbors", "nearest symbols by cosine, as TSV");
  neighbors->add_option("--model", s.model, "model directory")->required()->check(CLI::ExistingDirectory);
  neighbors->add_option("--k", s.k, "neighbors per symbol")->check(CLI::PositiveNumber);
  neighbors->add_option("--symbol", s.symbols, "symbols to query (default: whole vocabulary)");
  neighbors->add_option("--out", s.out, "output file (default: stdout)");

  auto* pca = app.add_subcommand("pca", "PCA projection of the symbol vectors, as TSV");
  pca->add_option("--model", s.model, "model directory")->required()->check(CLI::ExistingDirectory);
  pca->add_option("--components", s.components, "number of components")->check(CLI::PositiveNumber);
  pca->add_flag("--l2-normalize", s.l2_normalize, "unit-normalise vectors before projecting");
  pca->add_option("--out", s.out, "output file (default: stdout)");

  auto* index = app.add_subcommand("index-text", "build the text index of a corpus store");
  index->add_option("--corpus", s.corpus, "corpus store")->required()->check(CLI::ExistingFile);
  index->add_option("--out", s.out, "index file to write")->required();

  auto* search = app.add_subcommand("search", "rank pages for every query, TREC run format");
  search->add_option("--corpus", s.corpus, "corpus store")->required()->check(CLI::ExistingFile);
  search->add_option("--queries", s.queries, "JSON-lines queries")->required()->check(CLI::ExistingFile);
  search->add_option("--model", s.model, "formula2vec model directory")->check(CLI::ExistingDirectory);
  search->add_option("--index", s.index, "text index (default: built from the corpus)")->check(CLI::ExistingFile);
  search->add_option("--method", s.method, "formula2vec | lm | combined")
      ->check(CLI::IsMember({"formula2vec", "lm", "combined"}));
  search->add_option("--alpha", s.alpha, "text weight in (F + alpha T)/(1 + alpha) (reference setting: 4)");
  search->add_option("--mu", s.mu, "Dirichlet smoothing mass (conventional setting: 2000)");
  search->add_option("--top", s.top, "pages written per query")->check(CLI::PositiveNumber);
  search->add_option("--run-tag", s.run_tag, "last column of the run file");
  search->add_option("--infer-steps", s.infer_steps, "inference passes for unseen formulae");
  search->add_option("--out", s.out, "run file (default: stdout)");

  auto* evaluate = app.add_subcommand("evaluate", "NDCG@k, P@k, MAP and MRR of a run");
  evaluate->add_option("--run", s.run, "TREC run file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--qrels", s.qrels, "TREC qrels file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--ks", s.ks, "cutoffs for NDCG and P")->delimiter(',');
  evaluate->add_option("--threshold", s.threshold, "minimum relevant grade for P, MAP and MRR");
  evaluate->add_option("--out", s.out, "report file (default: stdout)");

  auto* sweep_cmd = app.add_subcommand("sweep", "metrics across formula dimensions or alpha values");
  sweep_cmd->add_option("--axis", s.axis, "dimension | alpha")->check(CLI::IsMember({"dimension", "alpha"}));
  sweep_cmd->add_option("--values", s.values, "values to sweep")->required()->delimiter(',');
  sweep_cmd->add_option("--corpus", s.corpus, "corpus store")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--train", s.train, "training corpus")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--queries", s.queries, "JSON-lines queries")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--qrels", s.qrels, "TREC qrels file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--dim", s.formula_dim, "formula dimension for the alpha axis (reference setting: 300)");
  add_training_options(sweep_cmd, s);
  sweep_cmd->add_option("--alpha", s.alpha, "alpha for the dimension axis (unused there; recorded)");
  sweep_cmd->add_option("--mu", s.mu, "Dirichlet smoothing mass");
  sweep_cmd->add_option("--top", s.top, "pages kept per query")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--infer-steps", s.infer_steps, "inference passes for unseen formulae");
  sweep_cmd->add_option("--ks", s.ks, "cutoffs for NDCG and P")->delimiter(',');
  sweep_cmd->add_option("--out", s.out, "TSV output (default: stdout)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (s.dump_config) {
    out << app.config_to_str(true, false);
    return 0;
  }

  try {
    if (tokenize_cmd->parsed()) cmd_tokenize(s, in, out);
    else if (ingest->parsed()) cmd_ingest(s, err);
    else if (filter->parsed()) cmd_filter(s, err);
    else if (sym->parsed()) cmd_train(s, TrainingMode::Symbol2Vec, err);
    else if (form->parsed()) {
      s.dim = s.formula_dim;
      cmd_train(s, TrainingMode::Formula2Vec, err);
    }
    else if (neighbors->parsed()) cmd_neighbors(s, out);
    else if (pca->parsed()) cmd_pca(s, out);
    else if (index->parsed()) cmd_index(s, out);
    else if (search->parsed()) cmd_search(s, out, err);
    else if (evaluate->parsed()) cmd_evaluate(s, out, err);
    else if (sweep_cmd->parsed()) {
      s.dim = s.formula_dim;
      cmd_sweep(s, out);
    }
  } catch (const Error& e) {
    err << kToolName << ": " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidConfig ? 2 : 1;
  } catch (const std::exception& e) {
    err << kToolName << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace mathemb
