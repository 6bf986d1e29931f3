#include "seqrank/objective.hpp"

#include <algorithm>
#include <cmath>

namespace seqrank {

double cosine(const Eigen::VectorXd& yq, const Eigen::VectorXd& yd) {
  if (yq.size() != yd.size()) {
    throw DimMismatch("cosine: vector sizes differ");
  }
  const double nq = yq.norm();
  const double nd = yd.norm();
  if (nq <= kNormEps || nd <= kNormEps) throw ZeroNorm();
  return std::clamp(yq.dot(yd) / (nq * nd), -1.0, 1.0);
}

// Both loss() and alphas() shift the exponents by the largest one so that
// nothing overflows: with s = max(0, max_j(-gamma*delta_j)),
//   loss  = s + log(exp(-s) + sum_j exp(-gamma*delta_j - s)).
double loss(const SimilaritySet& sims) {
  double shift = 0.0;
  for (const double r : sims.r_neg) {
    shift = std::max(shift, -sims.gamma * (sims.r_pos - r));
  }
  double sum = 0.0;
  for (const double r : sims.r_neg) {
    sum += std::exp(-sims.gamma * (sims.r_pos - r) - shift);
  }
  // log1p keeps full relative precision when every exponent is negative and
  // the sum is tiny (near-perfect separation).
  if (shift == 0.0) return std::log1p(sum);
  return shift + std::log(std::exp(-shift) + sum);
}

std::vector<double> alphas(const SimilaritySet& sims) {
  double shift = 0.0;
  for (const double r : sims.r_neg) {
    shift = std::max(shift, -sims.gamma * (sims.r_pos - r));
  }
  double denom = std::exp(-shift);
  std::vector<double> exps(sims.r_neg.size());
  for (std::size_t j = 0; j < sims.r_neg.size(); ++j) {
    exps[j] = std::exp(-sims.gamma * (sims.r_pos - sims.r_neg[j]) - shift);
    denom += exps[j];
  }
  std::vector<double> out(sims.r_neg.size());
  for (std::size_t j = 0; j < exps.size(); ++j) {
    out[j] = -sims.gamma * exps[j] / denom;
  }
  return out;
}

double batch_loss(const std::vector<SimilaritySet>& records) {
  double acc = 0.0;
  for (const auto& r : records) acc += loss(r);
  return acc;
}

}  // namespace seqrank
