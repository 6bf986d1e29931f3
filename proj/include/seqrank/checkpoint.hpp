#pragma once

// Self-describing binary model checkpoints.
//
// Layout (all integers little-endian):
//   bytes 0-7   magic "SEQRNK01"
//   byte  8     arch: 0 = rnn, 1 = lstm
//   byte  9     lstm variant: 0 = full, 1 = reduced (0 for rnn)
//   byte  10    side: 0 = query, 1 = document
//   byte  11    bidirectional: 0 / 1
//   u32   12    cells
//   u32   16    trigram dimension
//   u32   20    dictionary-reference length, followed by that many UTF-8
//               bytes (a path or label identifying the dictionary)
// then, for the forward direction and (if bidirectional) the backward
// direction, every parameter tensor as row-major float64 in this order:
//   rnn:  W_in, W_rec, b
//   lstm: cand.{W_in,W_rec,b}, igate.{...}, fgate.{...}, ogate.{...},
//         peep_i, peep_f, peep_o
// The file must end exactly after the last tensor; all values must be
// finite. Same model bits always produce byte-identical files.

#include <filesystem>
#include <string>

#include "seqrank/model.hpp"

namespace seqrank {

struct CheckpointMeta {
  Arch arch = Arch::kRnn;
  LstmVariant variant = LstmVariant::kFull;
  Side side = Side::kQuery;
  bool bidirectional = false;
  std::int32_t cells = 0;
  std::int32_t dim = 0;
  std::string dict_ref;
};

void save_checkpoint(const std::filesystem::path& path, const AnyModel& model,
                     Side side, const std::string& dict_ref);

struct LoadedCheckpoint {
  AnyModel model;
  CheckpointMeta meta;
};

// Validates magic, shape consistency, exact file length, and finiteness;
// throws CheckpointError on any violation.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace seqrank
