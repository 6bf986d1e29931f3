#pragma once

// Gradient verification on seeded random ranking instances: the analytic
// gradient of the batch loss is compared entry-by-entry against central
// finite differences for every parameter group on both sides.
//
// Comparison rule per entry (a = analytic, f = finite difference):
//   |a - f| <= 1e-8  ->  exact for our purposes (below the FD noise floor)
//   otherwise        ->  relative error |a - f| / max(|a|, |f|)
// and the reported number per group is the maximum over entries, instances
// and sides.

#include <cstdint>
#include <string>
#include <vector>

#include "seqrank/model.hpp"

namespace seqrank {

struct GradCheckConfig {
  Arch arch = Arch::kLstm;
  LstmVariant variant = LstmVariant::kFull;
  bool bidirectional = false;
  int instances = 10;
  std::uint64_t seed = 1;
  double h = 1e-5;     // central-difference step
  double tol = 1e-4;   // pass threshold on the relative error
  // Per-instance shapes are drawn from these ranges.
  int dim_min = 6, dim_max = 20;
  int cells_min = 3, cells_max = 8;
  int seq_len_min = 1, seq_len_max = 4;
  int records = 2;
  int negatives = 2;
};

struct GradCheckGroup {
  std::string name;     // e.g. "query.cand.W_in" or "doc.bwd.b"
  double max_rel_err = 0.0;
};

struct GradCheckResult {
  std::vector<GradCheckGroup> groups;
  double overall = 0.0;
  bool pass = false;
};

GradCheckResult run_gradcheck(const GradCheckConfig& cfg);

}  // namespace seqrank
