#pragma once

// Nesterov accelerated gradient with gradient clipping.
//
// Update k (1-based, mu = mu_schedule(k, total)):
//   lookahead = params + mu * velocity
//   grad      = d(loss)/d(params) evaluated at lookahead, then clipped
//   velocity  = mu * velocity - eps * grad
//   params   += velocity
//
// The momentum schedule uses 0.9 for the first and last ceil(2%) of all
// updates and 0.995 in between. Clipping rescales the whole gradient set to
// global L2 norm `threshold` when (strictly) above it.

#include <cmath>
#include <cstdint>

#include "seqrank/model.hpp"

namespace seqrank {

double mu_schedule(std::int64_t k, std::int64_t total_updates,
                   double mu_edge = 0.9, double mu_mid = 0.995);

// Returns the norm the gradient had before any rescaling.
template <class M>
double clip_global_norm(M& grad, double threshold) {
  const double norm = std::sqrt(global_sq_norm(grad));
  if (norm > threshold && norm > 0.0) {
    scale_in_place(grad, threshold / norm);
  }
  return norm;
}

// Per-side optimizer state. The caller materializes the lookahead point
// itself (lookahead_into), evaluates the gradient there, then calls step().
template <class M>
class NesterovOptimizer {
 public:
  NesterovOptimizer(const M& shape, std::int64_t total_updates, double eps,
                    double clip_threshold)
      : velocity_(zeros_like(shape)),
        total_updates_(total_updates),
        eps_(eps),
        clip_threshold_(clip_threshold) {}

  // Momentum that the upcoming update (number k_+1) will use.
  double current_mu() const { return mu_schedule(k_ + 1, total_updates_); }

  // out = params + current_mu * velocity.
  void lookahead_into(const M& params, M& out) const {
    out = params;
    axpy_in_place(out, velocity_, current_mu());
  }

  // Applies one update with grad evaluated at the lookahead point. The grad
  // is clipped in place. Returns the pre-clip gradient norm.
  double step(M& params, M& grad) {
    const double norm = clip_global_norm(grad, clip_threshold_);
    const double mu = current_mu();
    scale_in_place(velocity_, mu);
    axpy_in_place(velocity_, grad, -eps_);
    axpy_in_place(params, velocity_, 1.0);
    ++k_;
    return norm;
  }

  std::int64_t updates_done() const { return k_; }
  std::int64_t total_updates() const { return total_updates_; }
  double eps() const { return eps_; }
  double clip_threshold() const { return clip_threshold_; }

 private:
  M velocity_;
  std::int64_t k_ = 0;
  std::int64_t total_updates_;
  double eps_;
  double clip_threshold_;
};

}  // namespace seqrank
