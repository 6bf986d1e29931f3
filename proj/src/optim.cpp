#include "seqrank/optim.hpp"

namespace seqrank {

double mu_schedule(std::int64_t k, std::int64_t total_updates, double mu_edge,
                   double mu_mid) {
  if (total_updates <= 0 || k < 1 || k > total_updates) {
    throw DimMismatch("mu_schedule: k out of range");
  }
  // ceil(2% of total), at least 1 update on each edge.
  const std::int64_t edge = (2 * total_updates + 99) / 100;
  if (k <= edge || k > total_updates - edge) return mu_edge;
  return mu_mid;
}

}  // namespace seqrank
