#include "seqrank/trainer.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>
#include <tuple>
#include <unordered_map>

#include "seqrank/grad.hpp"
#include "seqrank/objective.hpp"
#include "seqrank/optim.hpp"

namespace seqrank {

namespace {

// Independent random-stream ids (mixed into the master seed).
constexpr std::uint64_t kStreamQueryInit = 10;
constexpr std::uint64_t kStreamDocInit = 11;
constexpr std::uint64_t kStreamEvalNeg = 7;
constexpr std::uint64_t kStreamEpochNeg = 100;  // + epoch

// Records are reduced in fixed blocks of this size, and blocks are summed in
// index order, so gradient totals are identical for any thread count.
constexpr int kReduceBlock = 8;

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return (a + b - 1) / b;
}

// Hashed sentences and the distinct-document pool for a click corpus.
struct Prepared {
  std::vector<SeqPack> query_seqs;    // per record
  std::vector<int> record_doc;        // record -> doc_pool index
  std::vector<std::string> doc_pool;  // distinct docs, first-occurrence order
  std::vector<SeqPack> doc_seqs;      // per pool entry
};

Prepared prepare(const std::vector<ClickRecord>& records,
                 const TrigramDict& dict, bool bidirectional) {
  Prepared p;
  std::unordered_map<std::string, int> doc_index;
  p.query_seqs.reserve(records.size());
  p.record_doc.reserve(records.size());
  for (const auto& r : records) {
    p.query_seqs.push_back(
        SeqPack::make(hash_sentence(r.query, dict), bidirectional));
    auto [it, inserted] =
        doc_index.emplace(r.doc, static_cast<int>(p.doc_pool.size()));
    if (inserted) {
      p.doc_pool.push_back(r.doc);
      p.doc_seqs.push_back(
          SeqPack::make(hash_sentence(r.doc, dict), bidirectional));
    }
    p.record_doc.push_back(it->second);
  }
  return p;
}

// n distinct pool ids excluding `own`, uniform without replacement.
std::vector<int> sample_negative_ids(int own, int pool_size, int n, Rng& rng) {
  std::vector<int> candidates;
  candidates.reserve(pool_size - 1);
  for (int i = 0; i < pool_size; ++i) {
    if (i != own) candidates.push_back(i);
  }
  if (n > static_cast<int>(candidates.size())) {
    throw CorpusTooSmall("need " + std::to_string(n) +
                         " negative documents but only " +
                         std::to_string(candidates.size()) +
                         " other distinct clicked documents exist");
  }
  for (int i = 0; i < n; ++i) {
    const std::size_t j = i + rng.below(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(n);
  return candidates;
}

// Negative draws for every record, from a stream deriving only from
// (seed, stream, record) so they are identical regardless of processing
// order, minibatch size, or thread count.
std::vector<std::vector<int>> draw_all_negatives(const Prepared& prep,
                                                 const TrainConfig& cfg,
                                                 std::uint64_t stream) {
  std::vector<std::vector<int>> out(prep.record_doc.size());
  for (std::size_t r = 0; r < out.size(); ++r) {
    Rng rng(derive_seed(cfg.seed, stream, r));
    out[r] = sample_negative_ids(prep.record_doc[r],
                                 static_cast<int>(prep.doc_pool.size()),
                                 cfg.n_negatives, rng);
  }
  return out;
}

template <class P>
P init_params(const TrainConfig& cfg, Index dim, Rng& rng);

template <>
RnnParams init_params<RnnParams>(const TrainConfig& cfg, Index dim, Rng& rng) {
  return init_rnn(cfg.cells, dim, rng, cfg.init_scale);
}

template <>
LstmParams init_params<LstmParams>(const TrainConfig& cfg, Index dim,
                                   Rng& rng) {
  return init_lstm(cfg.cells, dim, cfg.variant, rng, cfg.init_scale);
}

template <class P>
Directed<P> make_model(const TrainConfig& cfg, Index dim,
                       std::uint64_t stream) {
  Directed<P> m;
  Rng fwd_rng(derive_seed(cfg.seed, stream, 0));
  m.fwd = init_params<P>(cfg, dim, fwd_rng);
  if (cfg.bidirectional) {
    Rng bwd_rng(derive_seed(cfg.seed, stream, 1));
    m.bwd = init_params<P>(cfg, dim, bwd_rng);
  }
  return m;
}

std::vector<const SeqPack*> doc_pointers(const Prepared& prep,
                                         std::size_t record,
                                         const std::vector<int>& negatives) {
  std::vector<const SeqPack*> docs;
  docs.reserve(negatives.size() + 1);
  docs.push_back(&prep.doc_seqs[prep.record_doc[record]]);
  for (const int id : negatives) docs.push_back(&prep.doc_seqs[id]);
  return docs;
}

// Gradient of the summed loss over records [lo, hi) at the given (lookahead)
// parameters. Returns the number of zero-norm records skipped.
template <class P>
int range_gradient(const Directed<P>& q_look, const Directed<P>& d_look,
                   const Prepared& prep,
                   const std::vector<std::vector<int>>& negatives,
                   std::size_t lo, std::size_t hi, const TrainConfig& cfg,
                   Directed<P>& q_grad, Directed<P>& d_grad) {
  int skipped = 0;
  for (std::size_t r = lo; r < hi; ++r) {
    const auto docs = doc_pointers(prep, r, negatives[r]);
    const auto work =
        record_forward(q_look, d_look, prep.query_seqs[r], docs, cfg.gamma);
    if (!work) {
      ++skipped;
      continue;
    }
    record_backward(q_look, d_look, prep.query_seqs[r], docs, *work,
                    cfg.bptt_depth, q_grad, d_grad);
  }
  return skipped;
}

template <class P>
struct MinibatchGrad {
  Directed<P> query;
  Directed<P> doc;
  int skipped = 0;
};

template <class P>
MinibatchGrad<P> minibatch_gradient(const Directed<P>& q_look,
                                    const Directed<P>& d_look,
                                    const Prepared& prep,
                                    const std::vector<std::vector<int>>& negs,
                                    std::size_t lo, std::size_t hi,
                                    const TrainConfig& cfg) {
  const std::int64_t count = static_cast<std::int64_t>(hi - lo);
  const int nblocks = static_cast<int>(ceil_div(count, kReduceBlock));
  std::vector<MinibatchGrad<P>> blocks;
  blocks.reserve(nblocks);
  for (int b = 0; b < nblocks; ++b) {
    blocks.push_back({zeros_like(q_look), zeros_like(d_look), 0});
  }

  auto run_block = [&](int b) {
    const std::size_t blo = lo + static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t bhi = std::min(hi, blo + kReduceBlock);
    blocks[b].skipped = range_gradient(q_look, d_look, prep, negs, blo, bhi,
                                       cfg, blocks[b].query, blocks[b].doc);
  };

  const int nthreads = std::max(1, std::min(cfg.threads, nblocks));
  if (nthreads == 1) {
    for (int b = 0; b < nblocks; ++b) run_block(b);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(nthreads);
    for (int w = 0; w < nthreads; ++w) {
      workers.emplace_back([&] {
        for (int b = next.fetch_add(1); b < nblocks; b = next.fetch_add(1)) {
          try {
            run_block(b);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
    for (auto& w : workers) w.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // Deterministic reduction: always in block-index order.
  MinibatchGrad<P> total = std::move(blocks[0]);
  for (int b = 1; b < nblocks; ++b) {
    axpy_in_place(total.query, blocks[b].query, 1.0);
    axpy_in_place(total.doc, blocks[b].doc, 1.0);
    total.skipped += blocks[b].skipped;
  }
  return total;
}

// Mean per-record loss at the given parameters with the given negatives.
template <class P>
double mean_loss(const Directed<P>& q_model, const Directed<P>& d_model,
                 const Prepared& prep,
                 const std::vector<std::vector<int>>& negatives,
                 const TrainConfig& cfg) {
  double acc = 0.0;
  std::int64_t evaluated = 0;
  for (std::size_t r = 0; r < prep.query_seqs.size(); ++r) {
    const auto docs = doc_pointers(prep, r, negatives[r]);
    const auto work =
        record_forward(q_model, d_model, prep.query_seqs[r], docs, cfg.gamma);
    if (!work) continue;
    acc += loss(work->sims);
    ++evaluated;
  }
  if (evaluated == 0) {
    throw NumericError("no record in the corpus could be evaluated");
  }
  return acc / static_cast<double>(evaluated);
}

void validate_config(const TrainConfig& cfg) {
  if (cfg.cells < 1) throw SpecInvalid("cells must be >= 1");
  if (cfg.n_negatives < 1) throw SpecInvalid("negatives must be >= 1");
  if (cfg.epochs < 0) throw SpecInvalid("epochs must be >= 0");
  if (cfg.minibatch_size < 1) throw SpecInvalid("minibatch must be >= 1");
  if (cfg.bptt_depth < 1) throw SpecInvalid("bptt-depth must be >= 1");
  if (!(cfg.gamma > 0.0) || !std::isfinite(cfg.gamma)) {
    throw SpecInvalid("gamma must be positive and finite");
  }
  if (!(cfg.eps > 0.0) || !std::isfinite(cfg.eps)) {
    throw SpecInvalid("eps must be positive and finite");
  }
  if (!(cfg.clip_threshold > 0.0)) {
    throw SpecInvalid("clip threshold must be positive");
  }
  if (cfg.threads < 1) throw SpecInvalid("threads must be >= 1");
}

template <class P>
TrainResult train_impl(const std::vector<ClickRecord>& records,
                       const TrainConfig& cfg, TrigramDict dict) {
  const Prepared prep = prepare(records, dict, cfg.bidirectional);
  if (static_cast<int>(prep.doc_pool.size()) <= cfg.n_negatives) {
    throw CorpusTooSmall(
        "corpus has " + std::to_string(prep.doc_pool.size()) +
        " distinct clicked documents; need more than " +
        std::to_string(cfg.n_negatives));
  }

  const std::int64_t n_records = static_cast<std::int64_t>(records.size());
  const std::int64_t mb_per_epoch = ceil_div(n_records, cfg.minibatch_size);
  const std::int64_t total_updates = mb_per_epoch * cfg.epochs;

  Directed<P> q_model = make_model<P>(cfg, dict.dim(), kStreamQueryInit);
  Directed<P> d_model = make_model<P>(cfg, dict.dim(), kStreamDocInit);

  TrainResult result;
  result.dict = std::move(dict);

  if (cfg.epochs > 0) {
    NesterovOptimizer<Directed<P>> q_opt(q_model, total_updates, cfg.eps,
                                         cfg.clip_threshold);
    NesterovOptimizer<Directed<P>> d_opt(d_model, total_updates, cfg.eps,
                                         cfg.clip_threshold);
    const auto eval_negs = draw_all_negatives(prep, cfg, kStreamEvalNeg);

    Directed<P> q_look = zeros_like(q_model);
    Directed<P> d_look = zeros_like(d_model);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto negs =
          draw_all_negatives(prep, cfg, kStreamEpochNeg + epoch);
      for (std::int64_t b = 0; b < mb_per_epoch; ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * cfg.minibatch_size;
        const std::size_t hi =
            std::min<std::size_t>(records.size(), lo + cfg.minibatch_size);
        q_opt.lookahead_into(q_model, q_look);
        d_opt.lookahead_into(d_model, d_look);
        auto grad =
            minibatch_gradient(q_look, d_look, prep, negs, lo, hi, cfg);
        result.skipped_records += grad.skipped;
        q_opt.step(q_model, grad.query);
        d_opt.step(d_model, grad.doc);
      }
      const double mean = mean_loss(q_model, d_model, prep, eval_negs, cfg);
      // Deterministic runs must produce byte-identical loss curves, so the one
      // inherently nondeterministic field is redacted to 0 in that mode.
      const double seconds =
          cfg.deterministic
              ? 0.0
              : std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0)
                    .count();
      result.curve.push_back({epoch, mean, seconds});
      log_info("epoch " + std::to_string(epoch) +
               " mean_loss=" + format_double(mean));
      result.updates = q_opt.updates_done();
    }
  }

  result.query_model = std::move(q_model);
  result.doc_model = std::move(d_model);
  return result;
}

}  // namespace

TrainResult train(const std::vector<ClickRecord>& corpus,
                  const TrainConfig& cfg) {
  validate_config(cfg);
  std::vector<std::string> lines;
  lines.reserve(corpus.size() * 2);
  for (const auto& r : corpus) {
    lines.push_back(r.query);
    lines.push_back(r.doc);
  }
  TrigramDict dict = TrigramDict::build(lines);  // throws EmptyCorpus
  if (cfg.arch == Arch::kRnn) {
    return train_impl<RnnParams>(corpus, cfg, std::move(dict));
  }
  return train_impl<LstmParams>(corpus, cfg, std::move(dict));
}

double evaluate_loss(const std::vector<ClickRecord>& corpus,
                     const AnyModel& query_model, const AnyModel& doc_model,
                     const TrigramDict& dict, const TrainConfig& cfg) {
  return std::visit(
      [&](const auto& qm) -> double {
        using M = std::decay_t<decltype(qm)>;
        const M* dm = std::get_if<M>(&doc_model);
        if (!dm) {
          throw DimMismatch("query/document model architecture mismatch");
        }
        const Prepared prep = prepare(corpus, dict, qm.bidirectional());
        if (static_cast<int>(prep.doc_pool.size()) <= cfg.n_negatives) {
          throw CorpusTooSmall(
              "corpus has " + std::to_string(prep.doc_pool.size()) +
              " distinct clicked documents; need more than " +
              std::to_string(cfg.n_negatives));
        }
        const auto negs = draw_all_negatives(prep, cfg, kStreamEvalNeg);
        return mean_loss(qm, *dm, prep, negs, cfg);
      },
      query_model);
}

std::vector<std::string> sample_negatives(
    std::size_t record_index, const std::vector<ClickRecord>& records, int n,
    Rng& rng) {
  if (record_index >= records.size()) {
    throw DataError("record index out of range");
  }
  std::vector<std::string> pool;
  std::unordered_map<std::string, int> seen;
  for (const auto& r : records) {
    if (seen.emplace(r.doc, 0).second) pool.push_back(r.doc);
  }
  const std::string& own = records[record_index].doc;
  int own_id = -1;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i] == own) {
      own_id = static_cast<int>(i);
      break;
    }
  }
  const auto ids =
      sample_negative_ids(own_id, static_cast<int>(pool.size()), n, rng);
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (const int id : ids) out.push_back(pool[id]);
  return out;
}

void write_loss_curve(const std::filesystem::path& path,
                      const std::vector<LossCurvePoint>& curve) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "epoch,mean_loss,seconds\n";
  for (const auto& p : curve) {
    out << p.epoch << ',' << format_double(p.mean_loss) << ','
        << format_double(p.seconds) << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<LossCurvePoint> read_loss_curve(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open loss curve: " + path.string());
  std::vector<LossCurvePoint> curve;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != "epoch,mean_loss,seconds") {
        throw ParseError(lineno, "unexpected loss-curve header");
      }
      continue;
    }
    LossCurvePoint p;
    char* cursor = line.data();
    char* end = nullptr;
    p.epoch = static_cast<int>(std::strtol(cursor, &end, 10));
    if (end == cursor || *end != ',') throw ParseError(lineno, "bad epoch");
    cursor = end + 1;
    p.mean_loss = std::strtod(cursor, &end);
    if (end == cursor || *end != ',') throw ParseError(lineno, "bad loss");
    cursor = end + 1;
    p.seconds = std::strtod(cursor, &end);
    if (end == cursor || *end != '\0') throw ParseError(lineno, "bad seconds");
    curve.push_back(p);
  }
  return curve;
}

}  // namespace seqrank
