#pragma once

// Click-through ranking objective. For a query with one clicked document and
// n unclicked ones, with cosine similarities r_pos and r_neg[j], the
// per-record loss is
//
//   loss = log(1 + sum_j exp(-gamma * delta_j)),  delta_j = r_pos - r_neg[j]
//
// and the batch loss is the sum over records. alphas() returns the
// derivative of the per-record loss with respect to each delta_j:
//
//   alpha_j = -gamma * exp(-gamma * delta_j) / (1 + sum_k exp(-gamma*delta_k))
//
// which is the only coefficient the backward pass needs.

#include <Eigen/Dense>
#include <vector>

#include "seqrank/common.hpp"

namespace seqrank {

// Cosine similarity; throws ZeroNorm if either norm is <= kNormEps. The
// result is clamped to [-1, 1] to absorb floating-point drift.
double cosine(const Eigen::VectorXd& yq, const Eigen::VectorXd& yd);

struct SimilaritySet {
  double r_pos = 0.0;
  std::vector<double> r_neg;
  double gamma = 10.0;

  std::vector<double> deltas() const {
    std::vector<double> d(r_neg.size());
    for (std::size_t j = 0; j < r_neg.size(); ++j) d[j] = r_pos - r_neg[j];
    return d;
  }
};

// Overflow-safe even for large gamma * |delta|.
double loss(const SimilaritySet& sims);

// d(loss)/d(delta_j); each entry is in (-gamma, 0).
std::vector<double> alphas(const SimilaritySet& sims);

double batch_loss(const std::vector<SimilaritySet>& records);

}  // namespace seqrank
