// seqrank: sentence-embedding rankers over letter-trigram input.
//
// Subcommands:
//   gen-data   write a seeded synthetic click corpus with judgments
//   train      train query/document models on a click corpus
//   gradcheck  verify analytic gradients against finite differences
//   embed      print sentence embeddings under one checkpoint
//   rank       rank candidate documents for one query
//   eval       mean NDCG@k against judgments
//   analyze    export activation grids / keyword / topic-cell reports
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "seqrank/analysis.hpp"
#include "seqrank/checkpoint.hpp"
#include "seqrank/corpus.hpp"
#include "seqrank/eval.hpp"
#include "seqrank/gradcheck.hpp"
#include "seqrank/grad.hpp"
#include "seqrank/model.hpp"
#include "seqrank/texthash.hpp"
#include "seqrank/trainer.hpp"

namespace fs = std::filesystem;
using namespace seqrank;

namespace {

// Resolved-configuration sidecar written next to every command's outputs so
// a run can be reproduced from the file alone.
class Provenance {
 public:
  explicit Provenance(std::string command) {
    add("command", std::move(command));
  }
  void add(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
  }
  void add(const std::string& key, double value) {
    add(key, format_double(value));
  }
  void add(const std::string& key, long long value) {
    add(key, std::to_string(value));
  }
  void add(const std::string& key, bool value) {
    add(key, std::string(value ? "true" : "false"));
  }
  void write(const fs::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
    if (!out) throw DataError("write failed: " + path.string());
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

Arch parse_arch(const std::string& s) {
  if (s == "rnn") return Arch::kRnn;
  if (s == "lstm") return Arch::kLstm;
  throw CLI::ValidationError("--arch must be 'rnn' or 'lstm'");
}

LstmVariant parse_variant(const std::string& s) {
  if (s == "full") return LstmVariant::kFull;
  if (s == "reduced") return LstmVariant::kReduced;
  throw CLI::ValidationError("--variant must be 'full' or 'reduced'");
}

struct LoadedSide {
  AnyModel model;
  CheckpointMeta meta;
};

LoadedSide load_side(const fs::path& ckpt, const TrigramDict& dict,
                     Side expected) {
  LoadedCheckpoint loaded = load_checkpoint(ckpt);
  if (loaded.meta.dim != dict.dim()) {
    throw DataError("checkpoint " + ckpt.string() + " expects trigram dim " +
                    std::to_string(loaded.meta.dim) + " but dictionary has " +
                    std::to_string(dict.dim()));
  }
  if (loaded.meta.side != expected) {
    log_info("warning: " + ckpt.string() + " was saved for the " +
             (loaded.meta.side == Side::kQuery ? "query" : "document") +
             " side");
  }
  return {std::move(loaded.model), std::move(loaded.meta)};
}

std::vector<std::string> read_lines(const std::string& path_or_dash) {
  std::vector<std::string> lines;
  std::string line;
  if (path_or_dash == "-") {
    while (std::getline(std::cin, line)) lines.push_back(line);
  } else {
    std::ifstream in(path_or_dash, std::ios::binary);
    if (!in) throw DataError("cannot open input: " + path_or_dash);
    while (std::getline(in, line)) lines.push_back(line);
  }
  return lines;
}

std::ostream& open_out(std::ofstream& file, const std::string& out) {
  if (out.empty() || out == "-") return std::cout;
  file.open(out, std::ios::binary);
  if (!file) throw DataError("cannot open for writing: " + out);
  return file;
}

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------
int cmd_gen_data(const SyntheticSpec& spec, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const SyntheticData data = generate(spec);
  write_clicks(fs::path(out_dir) / "clicks.tsv", data.records);
  write_judgments(fs::path(out_dir) / "judgments.tsv", data.judgments);
  write_ground_truth(fs::path(out_dir) / "ground_truth.json", data.truth);

  Provenance prov("gen-data");
  prov.add("out", out_dir);
  prov.add("topics", static_cast<long long>(spec.n_topics));
  prov.add("vocab-per-topic", static_cast<long long>(spec.vocab_per_topic));
  prov.add("filler-vocab", static_cast<long long>(spec.filler_vocab));
  prov.add("records", static_cast<long long>(spec.n_records));
  prov.add("query-len-min", static_cast<long long>(spec.query_len_min));
  prov.add("query-len-max", static_cast<long long>(spec.query_len_max));
  prov.add("doc-len-min", static_cast<long long>(spec.doc_len_min));
  prov.add("doc-len-max", static_cast<long long>(spec.doc_len_max));
  prov.add("keyword-rate", spec.keyword_rate);
  prov.add("judgment-queries", static_cast<long long>(spec.judgment_queries));
  prov.add("docs-per-judged-query",
           static_cast<long long>(spec.docs_per_judged_query));
  prov.add("seed", static_cast<long long>(spec.seed));
  prov.write(fs::path(out_dir) / "provenance.txt");

  log_info("wrote " + std::to_string(data.records.size()) + " records, " +
           std::to_string(data.judgments.size()) + " judgments to " + out_dir);
  return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------
int cmd_train(const std::string& corpus_path, const TrainConfig& cfg,
              const std::string& arch_str, const std::string& variant_str,
              const std::string& out_dir) {
  const auto records = read_clicks(corpus_path);
  const TrainResult result = train(records, cfg);

  fs::create_directories(out_dir);
  const fs::path dict_path = fs::path(out_dir) / "dict.tsv";
  result.dict.save(dict_path);
  save_checkpoint(fs::path(out_dir) / "query.ckpt", result.query_model,
                  Side::kQuery, dict_path.filename().string());
  save_checkpoint(fs::path(out_dir) / "doc.ckpt", result.doc_model,
                  Side::kDocument, dict_path.filename().string());
  write_loss_curve(fs::path(out_dir) / "loss_curve.csv", result.curve);

  Provenance prov("train");
  prov.add("corpus", corpus_path);
  prov.add("out", out_dir);
  prov.add("arch", arch_str);
  prov.add("variant", variant_str);
  prov.add("bidirectional", cfg.bidirectional);
  prov.add("cells", static_cast<long long>(cfg.cells));
  prov.add("negatives", static_cast<long long>(cfg.n_negatives));
  prov.add("gamma", cfg.gamma);
  prov.add("eps", cfg.eps);
  prov.add("clip", cfg.clip_threshold);
  prov.add("epochs", static_cast<long long>(cfg.epochs));
  prov.add("minibatch", static_cast<long long>(cfg.minibatch_size));
  prov.add("bptt-depth", static_cast<long long>(cfg.bptt_depth));
  prov.add("seed", static_cast<long long>(cfg.seed));
  prov.add("deterministic", cfg.deterministic);
  prov.add("threads", static_cast<long long>(cfg.threads));
  prov.add("trigram-dim", static_cast<long long>(result.dict.dim()));
  prov.add("updates", static_cast<long long>(result.updates));
  prov.add("skipped-records", static_cast<long long>(result.skipped_records));
  prov.write(fs::path(out_dir) / "provenance.txt");

  if (!result.curve.empty()) {
    log_info("final mean loss " +
             format_double(result.curve.back().mean_loss));
  }
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck
// ---------------------------------------------------------------------------
int cmd_gradcheck(const GradCheckConfig& cfg, const std::string& out) {
  const GradCheckResult result = run_gradcheck(cfg);
  std::ofstream file;
  std::ostream& os = open_out(file, out);
  os << "group\tmax_rel_err\n";
  for (const auto& g : result.groups) {
    os << g.name << '\t' << format_double(g.max_rel_err) << '\n';
  }
  os << "overall\t" << format_double(result.overall) << '\n';
  if (!out.empty() && out != "-") {
    Provenance prov("gradcheck");
    prov.add("arch", arch_name(cfg.arch));
    prov.add("variant", variant_name(cfg.variant));
    prov.add("bidirectional", cfg.bidirectional);
    prov.add("instances", static_cast<long long>(cfg.instances));
    prov.add("seed", static_cast<long long>(cfg.seed));
    prov.add("h", cfg.h);
    prov.add("tol", cfg.tol);
    prov.add("out", out);
    prov.write(out + ".provenance.txt");
  }
  if (!result.pass) {
    std::fprintf(stderr, "gradcheck FAILED: max relative error %s > %s\n",
                 format_double(result.overall).c_str(),
                 format_double(cfg.tol).c_str());
    return 3;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// embed
// ---------------------------------------------------------------------------
int cmd_embed(const std::string& ckpt, const std::string& dict_path,
              const std::string& input, const std::string& out) {
  const TrigramDict dict = TrigramDict::load(dict_path);
  const LoadedCheckpoint loaded = load_checkpoint(ckpt);
  if (loaded.meta.dim != dict.dim()) {
    throw DataError("checkpoint/dictionary dimension mismatch");
  }
  std::ofstream file;
  std::ostream& os = open_out(file, out);
  for (const auto& line : read_lines(input)) {
    if (tokenize(line).empty()) continue;  // skip blank lines
    const VectorXd e = embed(loaded.model, hash_sentence(line, dict));
    for (Index i = 0; i < e.size(); ++i) {
      if (i) os << '\t';
      os << format_double(e(i));
    }
    os << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// rank
// ---------------------------------------------------------------------------
int cmd_rank(const std::string& ckpt_q, const std::string& ckpt_d,
             const std::string& dict_path, const std::string& query,
             const std::string& candidates, const std::string& out) {
  const TrigramDict dict = TrigramDict::load(dict_path);
  const LoadedSide q = load_side(ckpt_q, dict, Side::kQuery);
  const LoadedSide d = load_side(ckpt_d, dict, Side::kDocument);

  std::vector<std::string> docs;
  for (auto& line : read_lines(candidates)) {
    if (!tokenize(line).empty()) docs.push_back(line);
  }
  if (docs.empty()) throw DataError("no candidate documents");

  const RankedList ranked = rank(query, docs, q.model, d.model, dict);
  std::ofstream file;
  std::ostream& os = open_out(file, out);
  os << "rank\tscore\tdocument\n";
  for (std::size_t i = 0; i < ranked.docs.size(); ++i) {
    const auto& rd = ranked.docs[i];
    os << (i + 1) << '\t'
       << (rd.scorable ? format_double(rd.score) : std::string("unscorable"))
       << '\t' << docs[rd.input_index] << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------
int cmd_eval(const std::string& judgments_path, const std::string& ckpt_q,
             const std::string& ckpt_d, const std::string& dict_path,
             const std::vector<int>& ks, bool per_query,
             const std::string& out) {
  const TrigramDict dict = TrigramDict::load(dict_path);
  const LoadedSide q = load_side(ckpt_q, dict, Side::kQuery);
  const LoadedSide d = load_side(ckpt_d, dict, Side::kDocument);
  const auto judgments = read_judgments(judgments_path);
  if (judgments.empty()) throw DataError("no judgments");

  const NdcgReport report = mean_ndcg(judgments, q.model, d.model, dict, ks);
  std::ofstream file;
  std::ostream& os = open_out(file, out);
  os << "k\tmean_ndcg\n";
  for (std::size_t i = 0; i < report.ks.size(); ++i) {
    os << report.ks[i] << '\t' << format_double(report.mean[i]) << '\n';
  }
  if (per_query) {
    os << "\nquery";
    for (const int k : report.ks) os << "\tndcg@" << k;
    os << '\n';
    for (const auto& qn : report.per_query) {
      os << qn.query;
      for (const double v : qn.at_k) os << '\t' << format_double(v);
      os << '\n';
    }
  }
  for (const auto& skipped : report.skipped) {
    log_info("skipped unembeddable query: " + skipped);
  }
  if (!out.empty() && out != "-") {
    Provenance prov("eval");
    prov.add("judgments", judgments_path);
    prov.add("checkpoint-q", ckpt_q);
    prov.add("checkpoint-d", ckpt_d);
    prov.add("dict", dict_path);
    std::string klist;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (i) klist += ',';
      klist += std::to_string(ks[i]);
    }
    prov.add("k", klist);
    prov.add("out", out);
    prov.write(out + ".provenance.txt");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------
int cmd_analyze(const std::string& ckpt, const std::string& dict_path,
                const std::string& sentence, const std::string& input,
                const std::string& out_dir, int top_k, int top_m,
                double threshold_scale, std::optional<double> abs_threshold,
                bool keywords, bool topics) {
  const TrigramDict dict = TrigramDict::load(dict_path);
  const LoadedCheckpoint loaded = load_checkpoint(ckpt);
  if (loaded.meta.dim != dict.dim()) {
    throw DataError("checkpoint/dictionary dimension mismatch");
  }
  fs::create_directories(out_dir);

  std::vector<std::string> sentences;
  if (!sentence.empty()) sentences.push_back(sentence);
  if (!input.empty()) {
    for (auto& line : read_lines(input)) {
      if (!tokenize(line).empty()) sentences.push_back(line);
    }
  }
  if (sentences.empty()) throw DataError("no sentence to analyze");

  const bool bidi = loaded.meta.bidirectional;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const std::string tag = "sentence" + std::to_string(s);
    const auto fwd_grids =
        dump_activations(sentences[s], loaded.model, dict, Direction::kForward);
    for (const auto& g : fwd_grids) {
      write_grid_csv(fs::path(out_dir) / (tag + "_l2r_" +
                                          grid_kind_name(g.kind) + ".csv"),
                     g);
    }
    write_grids_json(fs::path(out_dir) / (tag + "_l2r.json"), fwd_grids);
    if (bidi) {
      const auto bwd_grids = dump_activations(sentences[s], loaded.model, dict,
                                              Direction::kBackward);
      for (const auto& g : bwd_grids) {
        write_grid_csv(fs::path(out_dir) / (tag + "_r2l_" +
                                            grid_kind_name(g.kind) + ".csv"),
                       g);
      }
      write_grids_json(fs::path(out_dir) / (tag + "_r2l.json"), bwd_grids);
      if (keywords) {
        const KeywordReport rep = keyword_counts(
            sentences[s], loaded.model, dict, top_k, threshold_scale,
            abs_threshold);
        write_keyword_report_json(
            fs::path(out_dir) / (tag + "_keywords.json"), rep);
      }
    } else if (keywords) {
      throw DataError("--keywords requires a bidirectional checkpoint");
    }
  }

  if (topics) {
    if (!bidi) throw DataError("--topics requires a bidirectional checkpoint");
    const TopicCellMap map =
        topic_cells(sentences, loaded.model, dict, top_m, top_k,
                    threshold_scale);
    write_topic_cells_json(fs::path(out_dir) / "topic_cells.json", map);
  }

  Provenance prov("analyze");
  prov.add("checkpoint-q", ckpt);
  prov.add("dict", dict_path);
  prov.add("out", out_dir);
  prov.add("sentences", static_cast<long long>(sentences.size()));
  prov.add("top-k", static_cast<long long>(top_k));
  prov.add("top-m", static_cast<long long>(top_m));
  prov.add("threshold-scale", threshold_scale);
  if (abs_threshold) prov.add("threshold", *abs_threshold);
  prov.add("keywords", keywords);
  prov.add("topics", topics);
  prov.write(fs::path(out_dir) / "provenance.txt");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sentence-embedding rankers over letter-trigram input"};
  app.require_subcommand(1);
  // Repeated scalar options keep the last value (usual getopt behavior).
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  // --- gen-data ---
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic corpus");
  SyntheticSpec spec;
  std::string gen_out;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--records", spec.n_records, "click records");
  gen->add_option("--topics", spec.n_topics, "number of topics");
  gen->add_option("--vocab-per-topic", spec.vocab_per_topic,
                  "keywords per topic");
  gen->add_option("--filler-vocab", spec.filler_vocab, "filler words");
  gen->add_option("--query-len-min", spec.query_len_min, "min query words");
  gen->add_option("--query-len-max", spec.query_len_max, "max query words");
  gen->add_option("--doc-len-min", spec.doc_len_min, "min document words");
  gen->add_option("--doc-len-max", spec.doc_len_max, "max document words");
  gen->add_option("--keyword-rate", spec.keyword_rate,
                  "keyword probability per free slot");
  gen->add_option("--judgment-queries", spec.judgment_queries,
                  "held-out judged queries");
  gen->add_option("--docs-per-judged-query", spec.docs_per_judged_query,
                  "candidates per judged query");
  gen->add_option("--seed", spec.seed, "random seed");

  // --- train ---
  auto* tr = app.add_subcommand("train", "train query/document models");
  TrainConfig tcfg;
  std::string tr_corpus, tr_out, tr_arch = "lstm", tr_variant = "reduced";
  tr->add_option("--corpus", tr_corpus, "click-through TSV")->required();
  tr->add_option("--out", tr_out, "output directory")->required();
  tr->add_option("--arch", tr_arch, "rnn | lstm");
  tr->add_option("--variant", tr_variant, "full | reduced (lstm only)");
  tr->add_flag("--bidirectional", tcfg.bidirectional,
               "concatenate forward and backward readings");
  tr->add_option("--cells", tcfg.cells, "memory cells / hidden units");
  tr->add_option("--negatives", tcfg.n_negatives, "negatives per record");
  tr->add_option("--gamma", tcfg.gamma, "similarity scale");
  tr->add_option("--eps", tcfg.eps, "learning rate");
  tr->add_option("--clip", tcfg.clip_threshold, "gradient-norm threshold");
  tr->add_option("--epochs", tcfg.epochs, "training epochs");
  tr->add_option("--minibatch", tcfg.minibatch_size, "records per minibatch");
  tr->add_option("--bptt-depth", tcfg.bptt_depth, "backprop truncation depth");
  tr->add_option("--seed", tcfg.seed, "random seed");
  tr->add_flag("--deterministic,!--no-deterministic", tcfg.deterministic,
               "byte-identical outputs for a fixed seed (model bits are "
               "always reproducible; off additionally records wall times in "
               "the loss curve)");
  tr->add_option("--threads", tcfg.threads, "worker threads");

  // --- gradcheck ---
  auto* gc = app.add_subcommand("gradcheck", "verify gradients numerically");
  GradCheckConfig gcfg;
  std::string gc_arch = "lstm", gc_variant = "full", gc_out;
  int gc_cells = 0, gc_dim = 0;
  gc->add_option("--arch", gc_arch, "rnn | lstm");
  gc->add_option("--variant", gc_variant, "full | reduced (lstm only)");
  gc->add_flag("--bidirectional", gcfg.bidirectional, "check both directions");
  gc->add_option("--cells", gc_cells, "pin the cell count (default: varied)");
  gc->add_option("--dim", gc_dim, "pin the trigram dim (default: varied)");
  gc->add_option("--seeds", gcfg.instances, "number of random instances");
  gc->add_option("--seed", gcfg.seed, "base random seed");
  gc->add_option("--fd-step", gcfg.h, "finite-difference step");
  gc->add_option("--tol", gcfg.tol, "max relative error accepted");
  gc->add_option("--out", gc_out, "write the TSV here instead of stdout");

  // --- embed ---
  auto* em = app.add_subcommand("embed", "embed sentences");
  std::string em_ckpt_q, em_ckpt_d, em_dict, em_input = "-", em_out;
  em->add_option("--checkpoint-q", em_ckpt_q, "query-side checkpoint");
  em->add_option("--checkpoint-d", em_ckpt_d, "document-side checkpoint");
  em->add_option("--dict", em_dict, "trigram dictionary")->required();
  em->add_option("--input", em_input, "sentences file ('-' = stdin)");
  em->add_option("--out", em_out, "output file ('-' = stdout)");

  // --- rank ---
  auto* rk = app.add_subcommand("rank", "rank candidates for a query");
  std::string rk_q, rk_d, rk_dict, rk_query, rk_cands, rk_out;
  rk->add_option("--checkpoint-q", rk_q, "query-side checkpoint")->required();
  rk->add_option("--checkpoint-d", rk_d, "document-side checkpoint")
      ->required();
  rk->add_option("--dict", rk_dict, "trigram dictionary")->required();
  rk->add_option("--query", rk_query, "query text")->required();
  rk->add_option("--candidates", rk_cands, "candidate titles, one per line")
      ->required();
  rk->add_option("--out", rk_out, "output file ('-' = stdout)");

  // --- eval ---
  auto* ev = app.add_subcommand("eval", "NDCG against judgments");
  std::string ev_j, ev_q, ev_d, ev_dict, ev_out, ev_ks = "1,3,10";
  bool ev_per_query = false;
  ev->add_option("--judgments", ev_j, "judgments TSV")->required();
  ev->add_option("--checkpoint-q", ev_q, "query-side checkpoint")->required();
  ev->add_option("--checkpoint-d", ev_d, "document-side checkpoint")
      ->required();
  ev->add_option("--dict", ev_dict, "trigram dictionary")->required();
  ev->add_option("--k", ev_ks, "comma-separated cutoffs");
  ev->add_flag("--per-query", ev_per_query, "append per-query NDCG rows");
  ev->add_option("--out", ev_out, "output file ('-' = stdout)");

  // --- analyze ---
  auto* an = app.add_subcommand("analyze", "activation and keyword analysis");
  std::string an_ckpt, an_dict, an_sentence, an_input, an_out;
  int an_top_k = 10, an_top_m = 5;
  double an_scale = 0.2;
  double an_abs = -1.0;
  bool an_keywords = false, an_topics = false;
  an->add_option("--checkpoint-q", an_ckpt, "checkpoint to inspect")
      ->required();
  an->add_option("--dict", an_dict, "trigram dictionary")->required();
  an->add_option("--sentence", an_sentence, "one sentence to analyze");
  an->add_option("--input", an_input, "file of sentences ('-' = stdin)");
  an->add_option("--out", an_out, "output directory")->required();
  an->add_option("--top-k", an_top_k, "active cells for keyword counting");
  an->add_option("--top-m", an_top_m, "active cells for topic attribution");
  an->add_option("--threshold-scale", an_scale,
                 "change threshold as a fraction of max |y|");
  an->add_option("--threshold", an_abs,
                 "absolute change threshold (overrides the scale)");
  an->add_flag("--keywords", an_keywords, "emit keyword reports");
  an->add_flag("--topics", an_topics, "emit topic-cell map over all inputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(spec, gen_out);
    if (tr->parsed()) {
      tcfg.arch = parse_arch(tr_arch);
      tcfg.variant = parse_variant(tr_variant);
      return cmd_train(tr_corpus, tcfg, tr_arch, tr_variant, tr_out);
    }
    if (gc->parsed()) {
      gcfg.arch = parse_arch(gc_arch);
      gcfg.variant = parse_variant(gc_variant);
      if (gc_cells > 0) gcfg.cells_min = gcfg.cells_max = gc_cells;
      if (gc_dim > 0) gcfg.dim_min = gcfg.dim_max = gc_dim;
      return cmd_gradcheck(gcfg, gc_out);
    }
    if (em->parsed()) {
      if (em_ckpt_q.empty() == em_ckpt_d.empty()) {
        throw CLI::ValidationError(
            "embed needs exactly one of --checkpoint-q / --checkpoint-d");
      }
      return cmd_embed(em_ckpt_q.empty() ? em_ckpt_d : em_ckpt_q, em_dict,
                       em_input, em_out);
    }
    if (rk->parsed()) {
      return cmd_rank(rk_q, rk_d, rk_dict, rk_query, rk_cands, rk_out);
    }
    if (ev->parsed()) {
      std::vector<int> ks;
      std::stringstream ss(ev_ks);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        ks.push_back(std::stoi(item));
      }
      if (ks.empty()) throw CLI::ValidationError("--k lists no cutoffs");
      return cmd_eval(ev_j, ev_q, ev_d, ev_dict, ks, ev_per_query, ev_out);
    }
    if (an->parsed()) {
      std::optional<double> abs_threshold;
      if (an_abs >= 0.0) abs_threshold = an_abs;
      return cmd_analyze(an_ckpt, an_dict, an_sentence, an_input, an_out,
                         an_top_k, an_top_m, an_scale, abs_threshold,
                         an_keywords, an_topics);
    }
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
