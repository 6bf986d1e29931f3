#pragma once

// End-to-end trainer: builds the trigram dictionary from the click corpus,
// initializes query-side and document-side models, and runs minibatch
// Nesterov training of the ranking objective.
//
// Each epoch resamples n_negatives unclicked documents per record (uniformly
// from the distinct clicked documents of other records, no duplicates within
// a draw). Minibatches are contiguous shards of the record list. For every
// minibatch, gradients of the summed record losses are evaluated at the
// Nesterov lookahead point, clipped per side to the global-norm threshold,
// and applied; the update counter k is shared by both sides and drives the
// momentum schedule with total = minibatches_per_epoch * epochs.
//
// Records whose query or any sampled document embeds to (near-)zero norm are
// skipped and counted. After every epoch the mean loss over the corpus is
// evaluated with a frozen, epoch-independent set of negative draws so curve
// points are comparable across epochs.
//
// All runs are bit-deterministic for a fixed seed, independent of thread
// count: random streams are derived per (purpose, epoch, record), and
// parallel gradient reduction always sums fixed-size record blocks in index
// order.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "seqrank/corpus.hpp"
#include "seqrank/model.hpp"
#include "seqrank/texthash.hpp"

namespace seqrank {

struct TrainConfig {
  Arch arch = Arch::kLstm;
  LstmVariant variant = LstmVariant::kReduced;
  bool bidirectional = false;
  int cells = 16;
  int n_negatives = 4;
  double gamma = 10.0;
  double eps = 0.01;            // learning rate
  double clip_threshold = 10.0; // global-norm gradient clip, per side
  int epochs = 20;
  int minibatch_size = 16;
  int bptt_depth = 20;          // backward truncation, counted from last word
  std::uint64_t seed = 1;
  bool deterministic = true;    // model bits are always reproducible; this
                                // additionally zeroes the wall-time column of
                                // the loss curve so whole outputs are
                                // byte-identical across runs
  int threads = 1;
  double init_scale = 0.1;      // uniform init range [-scale, scale]
};

struct LossCurvePoint {
  int epoch = 0;        // 1-based
  double mean_loss = 0; // mean per-record loss, frozen negatives
  double seconds = 0;   // wall time of this epoch (train + evaluation)
};

struct TrainResult {
  AnyModel query_model;
  AnyModel doc_model;
  TrigramDict dict;
  std::vector<LossCurvePoint> curve;
  std::int64_t updates = 0;          // completed optimizer updates (per side)
  std::int64_t skipped_records = 0;  // zero-norm skips summed over epochs
};

TrainResult train(const std::vector<ClickRecord>& corpus,
                  const TrainConfig& cfg);

// Mean per-record loss of the given models over the corpus, with negative
// draws frozen by cfg.seed (independent of epoch and of minibatch size).
double evaluate_loss(const std::vector<ClickRecord>& corpus,
                     const AnyModel& query_model, const AnyModel& doc_model,
                     const TrigramDict& dict, const TrainConfig& cfg);

// Draws n distinct unclicked documents for the given record, uniformly from
// the distinct clicked documents of other records. Throws CorpusTooSmall
// when fewer than n such documents exist.
std::vector<std::string> sample_negatives(
    std::size_t record_index, const std::vector<ClickRecord>& records, int n,
    Rng& rng);

// CSV with header "epoch,mean_loss,seconds"; loss printed round-trippably.
void write_loss_curve(const std::filesystem::path& path,
                      const std::vector<LossCurvePoint>& curve);
std::vector<LossCurvePoint> read_loss_curve(const std::filesystem::path& path);

}  // namespace seqrank
