#include "mathemb/embeddings.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "mathemb/error.hpp"
#include "util.hpp"

namespace mathemb {

using nlohmann::json;

std::string_view to_string(TrainingMode mode) noexcept {
  return mode == TrainingMode::Symbol2Vec ? "symbol2vec" : "formula2vec";
}

void TrainingConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (dim < 1) fail("dim must be >= 1");
  if (window < 1) fail("window must be >= 1");
  if (negatives < 1) fail("negatives must be >= 1");
  if (epochs < 1) fail("epochs must be >= 1");
  if (workers < 1) fail("workers must be >= 1");
  if (!(lr_end > 0)) fail("lr_end must be > 0");
  if (!(lr_start >= lr_end)) fail("lr_start must be >= lr_end");
  if (!(subsample >= 0)) fail("subsample must be >= 0");
}

std::optional<std::size_t> EmbeddingTable::formula_row(std::string_view id) const {
  auto it = formula_index_.find(std::string(id));
  if (it == formula_index_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingTable::index_formulas() {
  formula_index_.clear();
  for (std::size_t i = 0; i < formula_ids.size(); ++i) formula_index_.emplace(formula_ids[i], i);
}

// ---------------------------------------------------------------------------
// Loss and the SGD kernel
// ---------------------------------------------------------------------------

namespace {

constexpr double kClamp = 30.0;
constexpr int kMaxResample = 100;

double clamp_activation(double x) { return std::clamp(x, -kClamp, kClamp); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log s(x), stable on both tails
double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

// Shared tables are touched through relaxed atomics so that lock-free
// multi-worker training has defined behaviour.
template <bool Shared>
inline double load(const double& x) {
  if constexpr (Shared) {
    return std::atomic_ref<double>(const_cast<double&>(x)).load(std::memory_order_relaxed);
  } else {
    return x;
  }
}

template <bool Shared>
inline void add(double& x, double delta) {
  if constexpr (Shared) {
    std::atomic_ref<double> ref(x);
    ref.store(ref.load(std::memory_order_relaxed) + delta, std::memory_order_relaxed);
  } else {
    x += delta;
  }
}

struct Scratch {
  std::vector<double> hidden;
  std::vector<double> grad_hidden;
  std::vector<double> output_grad;  // per output row: s(u.h) - label
};

struct StepRows {
  std::span<double* const> inputs;  // rows averaged into h
  std::size_t trainable_inputs;     // leading inputs that receive updates
  double* positive;
  std::span<double* const> negatives;
  bool train_outputs;
};

// Exact SGD on nce_loss: every gradient is taken at the pre-update point.
template <bool Shared>
double sgd_step(const StepRows& rows, std::size_t dim, double lr, Scratch& s) {
  s.hidden.assign(dim, 0.0);
  s.grad_hidden.assign(dim, 0.0);
  s.output_grad.resize(1 + rows.negatives.size());
  const double inv_n = 1.0 / static_cast<double>(rows.inputs.size());

  for (double* r : rows.inputs)
    for (std::size_t j = 0; j < dim; ++j) s.hidden[j] += load<Shared>(r[j]);
  for (double& v : s.hidden) v *= inv_n;

  double loss = 0;
  auto score = [&](const double* u, double label, std::size_t slot) {
    double dot = 0;
    for (std::size_t j = 0; j < dim; ++j) dot += load<Shared>(u[j]) * s.hidden[j];
    double x = clamp_activation(dot);
    loss -= label > 0 ? log_sigmoid(x) : log_sigmoid(-x);
    double g = sigmoid(x) - label;
    s.output_grad[slot] = g;
    for (std::size_t j = 0; j < dim; ++j) s.grad_hidden[j] += g * load<Shared>(u[j]);
  };
  score(rows.positive, 1.0, 0);
  for (std::size_t n = 0; n < rows.negatives.size(); ++n) score(rows.negatives[n], 0.0, n + 1);

  if (lr == 0) return loss;

  if (rows.train_outputs) {
    auto update = [&](double* u, double g) {
      for (std::size_t j = 0; j < dim; ++j) add<Shared>(u[j], -lr * g * s.hidden[j]);
    };
    update(rows.positive, s.output_grad[0]);
    for (std::size_t n = 0; n < rows.negatives.size(); ++n) update(rows.negatives[n], s.output_grad[n + 1]);
  }
  for (std::size_t i = 0; i < rows.trainable_inputs; ++i)
    for (std::size_t j = 0; j < dim; ++j) add<Shared>(rows.inputs[i][j], -lr * inv_n * s.grad_hidden[j]);
  return loss;
}

void check_index(std::size_t index, std::size_t rows, const char* what) {
  if (index >= rows) throw Error(ErrorCode::DimensionMismatch, std::string(what) + " index out of range");
}

double table_step(EmbeddingTable& table, std::optional<std::size_t> formula_row, std::span<const std::size_t> context,
                  std::size_t target, std::span<const std::size_t> negatives, double lr) {
  if (context.empty()) throw Error(ErrorCode::EmptyContext, "no context tokens");
  const std::size_t vocab_rows = table.input.rows();
  std::vector<double*> inputs;
  if (formula_row) {
    check_index(*formula_row, table.formula.rows(), "formula");
    inputs.push_back(table.formula.row(*formula_row).data());
  }
  for (auto c : context) {
    check_index(c, vocab_rows, "context");
    inputs.push_back(table.input.row(c).data());
  }
  check_index(target, table.context.rows(), "target");
  std::vector<double*> negs;
  for (auto n : negatives) {
    check_index(n, table.context.rows(), "negative");
    negs.push_back(table.context.row(n).data());
  }
  Scratch scratch;
  StepRows rows{inputs, inputs.size(), table.context.row(target).data(), negs, true};
  return sgd_step<false>(rows, table.dim(), lr, scratch);
}

}  // namespace

double nce_loss(std::span<const double> hidden, std::span<const double> positive,
                std::span<const std::span<const double>> negatives) {
  auto dot = [&](std::span<const double> u) {
    if (u.size() != hidden.size()) throw Error(ErrorCode::DimensionMismatch, "vector dimensions differ");
    double d = 0;
    for (std::size_t j = 0; j < u.size(); ++j) d += u[j] * hidden[j];
    return clamp_activation(d);
  };
  double loss = -log_sigmoid(dot(positive));
  for (auto n : negatives) loss -= log_sigmoid(-dot(n));
  return loss;
}

double cbow_step(std::span<const std::size_t> context, std::size_t target, std::span<const std::size_t> negatives,
                 EmbeddingTable& table, double lr) {
  return table_step(table, std::nullopt, context, target, negatives, lr);
}

double pvdm_step(std::size_t formula_row, std::span<const std::size_t> context, std::size_t target,
                 std::span<const std::size_t> negatives, EmbeddingTable& table, double lr) {
  return table_step(table, formula_row, context, target, negatives, lr);
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

namespace {

struct Sequence {
  std::vector<std::size_t> ids;
  std::size_t formula_row = 0;
};

void init_uniform(Matrix& m, detail::Rng& rng) {
  const double scale = 1.0 / static_cast<double>(m.cols());
  for (double& v : m.data()) v = (rng.uniform() - 0.5) * scale;
}

std::uint64_t worker_seed(std::uint64_t seed, std::size_t worker) {
  return detail::fnv1a(std::to_string(seed) + ":worker:" + std::to_string(worker));
}

// Draws a context window and negatives around `pos`; returns false when the
// window holds no token.
struct Sampler {
  const Vocabulary& vocab;
  std::size_t window;
  std::size_t negatives;
  std::vector<std::size_t> context;
  std::vector<std::size_t> negs;
  std::size_t skipped_negatives = 0;

  bool draw(std::span<const std::size_t> seq, std::size_t pos, detail::Rng& rng) {
    const auto reach = static_cast<std::size_t>(rng.uniform_int(1, window));
    context.clear();
    const std::size_t lo = pos >= reach ? pos - reach : 0;
    const std::size_t hi = std::min(seq.size() - 1, pos + reach);
    for (std::size_t i = lo; i <= hi; ++i)
      if (i != pos) context.push_back(seq[i]);
    if (context.empty()) return false;

    negs.clear();
    const std::size_t target = seq[pos];
    for (std::size_t k = 0; k < negatives; ++k) {
      std::size_t drawn = vocab.sample(rng.uniform());
      for (int tries = 0; drawn == target && tries < kMaxResample; ++tries) drawn = vocab.sample(rng.uniform());
      if (drawn == target) {
        ++skipped_negatives;
        continue;
      }
      negs.push_back(drawn);
    }
    return true;
  }
};

// Tokens kept by frequent-token subsampling (word2vec's rule).
void subsample(std::span<const std::size_t> ids, const Vocabulary& vocab, double threshold, detail::Rng& rng,
               std::vector<std::size_t>& out) {
  out.clear();
  const double scaled = threshold * static_cast<double>(vocab.total_count());
  for (auto id : ids) {
    const double count = static_cast<double>(vocab.count(id));
    const double keep = (std::sqrt(count / scaled) + 1.0) * scaled / count;
    if (keep >= 1.0 || rng.uniform() < keep) out.push_back(id);
  }
}

struct WorkerTotals {
  std::vector<double> loss;
  std::vector<std::size_t> steps;
  std::size_t skipped_negatives = 0;
};

template <bool Shared>
void train_worker(EmbeddingTable& table, std::span<const Sequence> sequences, std::size_t worker,
                  std::size_t workers, std::uint64_t total_steps, std::atomic<std::uint64_t>& progress,
                  detail::Rng& rng, WorkerTotals& totals) {
  const TrainingConfig& cfg = table.config;
  const bool paragraph = cfg.mode == TrainingMode::Formula2Vec;
  Sampler sampler{table.vocab, cfg.window, cfg.negatives, {}, {}};
  Scratch scratch;
  std::vector<double*> inputs;
  std::vector<double*> negs;
  std::vector<std::size_t> active;
  totals.loss.assign(cfg.epochs, 0.0);
  totals.steps.assign(cfg.epochs, 0);
  const double denom = static_cast<double>(std::max<std::uint64_t>(total_steps, 1));

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t s = worker; s < sequences.size(); s += workers) {
      const Sequence& seq = sequences[s];
      std::span<const std::size_t> ids = seq.ids;
      if (cfg.subsample > 0) {
        subsample(seq.ids, table.vocab, cfg.subsample, rng, active);
        ids = active;
      }
      std::uint64_t done = progress.fetch_add(seq.ids.size(), std::memory_order_relaxed);
      for (std::size_t pos = 0; pos < ids.size(); ++pos) {
        const double lr = cfg.lr_start - (cfg.lr_start - cfg.lr_end) * static_cast<double>(done + pos) / denom;
        if (!sampler.draw(ids, pos, rng)) continue;
        inputs.clear();
        if (paragraph) inputs.push_back(table.formula.row(seq.formula_row).data());
        for (auto c : sampler.context) inputs.push_back(table.input.row(c).data());
        negs.clear();
        for (auto n : sampler.negs) negs.push_back(table.context.row(n).data());
        StepRows rows{inputs, inputs.size(), table.context.row(ids[pos]).data(), negs, true};
        totals.loss[epoch] += sgd_step<Shared>(rows, table.dim(), lr, scratch);
        ++totals.steps[epoch];
      }
    }
  }
  totals.skipped_negatives = sampler.skipped_negatives;
}

TrainedModel train(const TrainingCorpus& corpus, const Vocabulary& vocab, const TrainingConfig& config,
                   TrainingMode mode) {
  config.validate();
  if (config.mode != mode)
    throw Error(ErrorCode::InvalidConfig, std::string("config mode is ") + std::string(to_string(config.mode)) +
                                              ", expected " + std::string(to_string(mode)));
  if (vocab.empty()) throw Error(ErrorCode::EmptyVocabulary, "vocabulary is empty");

  TrainedModel model;
  EmbeddingTable& table = model.table;
  table.vocab = vocab;
  table.config = config;

  std::vector<Sequence> sequences;
  std::uint64_t positions = 0;
  for (const auto& f : corpus.formulae) {
    Sequence seq;
    for (const auto& t : f.tokens)
      if (auto id = vocab.index_of(t.surface)) seq.ids.push_back(*id);
    if (mode == TrainingMode::Formula2Vec) {
      seq.formula_row = table.formula_ids.size();
      table.formula_ids.push_back(f.id);
      if (seq.ids.size() < 2) {
        ++model.stats.skipped_formulae;
        continue;
      }
    } else if (seq.ids.size() < 2) {
      continue;
    }
    positions += seq.ids.size();
    sequences.push_back(std::move(seq));
  }
  if (sequences.empty()) throw Error(ErrorCode::EmptyCorpus, "no formula has two in-vocabulary tokens");
  table.index_formulas();

  detail::Rng init_rng(config.seed);
  table.input = Matrix(vocab.size(), config.dim);
  table.context = Matrix(vocab.size(), config.dim);
  init_uniform(table.input, init_rng);
  if (mode == TrainingMode::Formula2Vec) {
    table.formula = Matrix(table.formula_ids.size(), config.dim);
    init_uniform(table.formula, init_rng);
  }

  const std::uint64_t total_steps = positions * config.epochs;
  std::atomic<std::uint64_t> progress{0};
  std::vector<WorkerTotals> totals(config.workers);
  if (config.workers == 1) {
    train_worker<false>(table, sequences, 0, 1, total_steps, progress, init_rng, totals[0]);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < config.workers; ++w) {
      threads.emplace_back([&, w] {
        detail::Rng rng(worker_seed(config.seed, w));
        train_worker<true>(table, sequences, w, config.workers, total_steps, progress, rng, totals[w]);
      });
    }
    for (auto& t : threads) t.join();
  }

  model.stats.epoch_mean_loss.assign(config.epochs, 0.0);
  for (std::size_t e = 0; e < config.epochs; ++e) {
    double loss = 0;
    std::size_t steps = 0;
    for (const auto& t : totals) {
      loss += t.loss[e];
      steps += t.steps[e];
    }
    model.stats.epoch_mean_loss[e] = steps ? loss / static_cast<double>(steps) : 0.0;
    model.stats.steps += steps;
  }
  for (const auto& t : totals) model.stats.skipped_negatives += t.skipped_negatives;
  return model;
}

}  // namespace

TrainedModel train_symbol2vec(const TrainingCorpus& corpus, const Vocabulary& vocab, const TrainingConfig& config) {
  return train(corpus, vocab, config, TrainingMode::Symbol2Vec);
}

TrainedModel train_formula2vec(const TrainingCorpus& corpus, const Vocabulary& vocab, const TrainingConfig& config) {
  return train(corpus, vocab, config, TrainingMode::Formula2Vec);
}

std::uint64_t inference_seed(const EmbeddingTable& table, std::span<const SymbolToken> tokens) {
  return detail::fnv1a(join_surfaces(tokens), detail::fnv1a(std::to_string(table.config.seed) + ":infer:"));
}

std::vector<double> infer_vector(std::span<const SymbolToken> tokens, const EmbeddingTable& table, std::size_t steps,
                                 double lr, std::uint64_t seed) {
  if (table.config.mode != TrainingMode::Formula2Vec)
    throw Error(ErrorCode::InvalidConfig, "inference needs a formula2vec table");
  std::vector<std::size_t> ids;
  for (const auto& t : tokens)
    if (auto id = table.vocab.index_of(t.surface)) ids.push_back(*id);
  if (ids.empty()) throw Error(ErrorCode::UnknownTokensOnly, "no token of the formula is in the vocabulary");

  const std::size_t dim = table.dim();
  detail::Rng rng(seed);
  std::vector<double> vec(dim);
  for (double& v : vec) v = (rng.uniform() - 0.5) / static_cast<double>(dim);
  if (steps == 0) return vec;

  const double lr_end = std::min(lr, table.config.lr_end);
  const double total = static_cast<double>(steps * ids.size());
  Sampler sampler{table.vocab, table.config.window, table.config.negatives, {}, {}};
  Scratch scratch;
  std::vector<double*> inputs;
  std::vector<double*> negs;
  // Frozen rows are only read; the const_cast never leads to a write
  // because train_outputs is false and only inputs[0] is trainable.
  auto row = [](const Matrix& m, std::size_t i) { return const_cast<double*>(m.row(i).data()); };
  std::uint64_t done = 0;
  for (std::size_t step = 0; step < steps; ++step) {
    for (std::size_t pos = 0; pos < ids.size(); ++pos, ++done) {
      const double rate = lr - (lr - lr_end) * static_cast<double>(done) / total;
      if (!sampler.draw(ids, pos, rng)) continue;
      inputs.assign(1, vec.data());
      for (auto c : sampler.context) inputs.push_back(row(table.input, c));
      negs.clear();
      for (auto n : sampler.negs) negs.push_back(row(table.context, n));
      StepRows rows{inputs, 1, row(table.context, ids[pos]), negs, false};
      sgd_step<false>(rows, dim, rate, scratch);
    }
  }
  return vec;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

void write_rows(std::ostream& out, std::span<const std::string> keys, const Matrix& vectors) {
  for (std::size_t i = 0; i < keys.size(); ++i) {
    out << keys[i];
    for (double v : vectors.row(i)) out << ' ' << detail::fixed(v, 6);
    out << '\n';
  }
}

std::pair<std::vector<std::string>, Matrix> read_rows(std::istream& in, const std::string& what) {
  std::string line;
  if (!detail::next_data_line(in, line)) throw Error(ErrorCode::BadFormat, what + ": missing 'count dim' line");
  auto head = detail::split_ws(line);
  if (head.size() != 2) throw Error(ErrorCode::BadFormat, what + ": bad 'count dim' line: " + line);
  std::size_t count = 0;
  std::size_t dim = 0;
  try {
    count = std::stoul(std::string(head[0]));
    dim = std::stoul(std::string(head[1]));
  } catch (const std::exception&) {
    throw Error(ErrorCode::BadFormat, what + ": bad 'count dim' line: " + line);
  }
  std::vector<std::string> keys;
  Matrix m(count, dim);
  for (std::size_t i = 0; i < count; ++i) {
    if (!detail::next_data_line(in, line)) throw Error(ErrorCode::BadFormat, what + ": truncated");
    auto fields = detail::split_ws(line);
    if (fields.size() != dim + 1) throw Error(ErrorCode::BadFormat, what + ": row " + std::to_string(i) + " has wrong width");
    keys.emplace_back(fields[0]);
    auto row = m.row(i);
    for (std::size_t j = 0; j < dim; ++j) row[j] = detail::parse_double(fields[j + 1], ErrorCode::BadFormat, what);
  }
  return {std::move(keys), std::move(m)};
}

json config_to_json(const TrainingConfig& c) {
  return json{{"dim", c.dim},           {"window", c.window},     {"negatives", c.negatives},
              {"epochs", c.epochs},     {"lr_start", c.lr_start}, {"lr_end", c.lr_end},
              {"seed", c.seed},         {"mode", to_string(c.mode)}, {"workers", c.workers},
              {"subsample", c.subsample}};
}

TrainingConfig config_from_json(const json& j) {
  TrainingConfig c;
  c.dim = j.at("dim").get<std::size_t>();
  c.window = j.at("window").get<std::size_t>();
  c.negatives = j.at("negatives").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.lr_start = j.at("lr_start").get<double>();
  c.lr_end = j.at("lr_end").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  auto mode = j.at("mode").get<std::string>();
  if (mode == "symbol2vec") c.mode = TrainingMode::Symbol2Vec;
  else if (mode == "formula2vec") c.mode = TrainingMode::Formula2Vec;
  else throw Error(ErrorCode::BadFormat, "unknown training mode " + mode);
  c.workers = j.at("workers").get<std::size_t>();
  c.subsample = j.at("subsample").get<double>();
  return c;
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << v;
  return s.str();
}

}  // namespace

void write_word2vec(std::ostream& out, const Vocabulary& vocab, const Matrix& vectors) {
  if (vectors.rows() != vocab.size()) throw Error(ErrorCode::DimensionMismatch, "vocabulary and matrix row counts differ");
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < vocab.size(); ++i) keys.push_back(vocab.surface(i));
  out << vectors.rows() << ' ' << vectors.cols() << '\n';
  write_rows(out, keys, vectors);
}

std::pair<std::vector<std::string>, Matrix> read_word2vec(std::istream& in) { return read_rows(in, "word2vec"); }

void write_docvec(std::ostream& out, std::span<const std::string> ids, const Matrix& vectors,
                  std::string_view provenance) {
  if (vectors.rows() != ids.size()) throw Error(ErrorCode::DimensionMismatch, "id and matrix row counts differ");
  out << kDocvecHeader << '\n';
  detail::write_provenance(out, provenance);
  out << vectors.rows() << ' ' << vectors.cols() << '\n';
  write_rows(out, ids, vectors);
}

std::pair<std::vector<std::string>, Matrix> read_docvec(std::istream& in) {
  detail::expect_header(in, kDocvecHeader);
  return read_rows(in, "docvec");
}

void save_model(const std::filesystem::path& dir, const EmbeddingTable& table, std::string_view provenance) {
  std::filesystem::create_directories(dir);
  json vocab = json::array();
  for (std::size_t i = 0; i < table.vocab.size(); ++i) vocab.push_back(json::array({table.vocab.surface(i), table.vocab.count(i)}));
  json meta = {{"format", kModelFormat},
               {"provenance", provenance},
               {"config", config_to_json(table.config)},
               {"sampling_power", table.vocab.sampling_power()},
               {"vocab_fingerprint", hex(table.vocab.fingerprint())},
               {"vocab", vocab}};

  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("model.json");
    out << meta.dump(1) << '\n';
  }
  {
    auto out = open("vectors.txt");
    write_word2vec(out, table.vocab, table.input);
  }
  {
    auto out = open("context.txt");
    write_word2vec(out, table.vocab, table.context);
  }
  if (table.config.mode == TrainingMode::Formula2Vec) {
    auto out = open("formulas.txt");
    write_docvec(out, table.formula_ids, table.formula, provenance);
  }
}

EmbeddingTable load_model(const std::filesystem::path& dir) {
  auto open = [&](const char* name) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + (dir / name).string());
    return in;
  };
  EmbeddingTable table;
  try {
    auto in = open("model.json");
    json meta = json::parse(in);
    if (meta.at("format").get<std::string>() != kModelFormat) throw Error(ErrorCode::BadFormat, "unknown model format");
    table.config = config_from_json(meta.at("config"));
    std::vector<std::pair<std::string, std::uint64_t>> entries;
    for (const auto& e : meta.at("vocab")) entries.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::uint64_t>());
    table.vocab = Vocabulary(std::move(entries), meta.at("sampling_power").get<double>());
    if (hex(table.vocab.fingerprint()) != meta.at("vocab_fingerprint").get<std::string>())
      throw Error(ErrorCode::BadFormat, "vocabulary fingerprint mismatch");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadFormat, std::string("model.json: ") + e.what());
  }

  auto load_rows = [&](const char* name) {
    auto in = open(name);
    auto [keys, m] = read_word2vec(in);
    if (keys.size() != table.vocab.size() || m.cols() != table.config.dim)
      throw Error(ErrorCode::BadFormat, std::string(name) + " does not match the vocabulary");
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (keys[i] != table.vocab.surface(i)) throw Error(ErrorCode::BadFormat, std::string(name) + ": surface order differs");
    return std::move(m);
  };
  table.input = load_rows("vectors.txt");
  table.context = load_rows("context.txt");
  if (table.config.mode == TrainingMode::Formula2Vec) {
    auto in = open("formulas.txt");
    auto [ids, m] = read_docvec(in);
    if (m.cols() != table.config.dim) throw Error(ErrorCode::BadFormat, "formulas.txt has the wrong dimension");
    table.formula_ids = std::move(ids);
    table.formula = std::move(m);
    table.index_formulas();
  }
  return table;
}

}  // namespace mathemb
