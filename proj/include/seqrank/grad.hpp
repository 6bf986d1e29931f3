#pragma once

// Analytic gradients of the ranking loss, assembled per click-through record
// from cosine back-signals and truncated backpropagation through time, plus
// a central-finite-difference oracle used to verify them.
//
// Chain rule layout for one record (query Q, clicked doc D+, negatives D-_j):
//   d(loss)/d(delta_j) = alpha_j                      (objective.hpp)
//   d(loss)/dR(Q,D+)   = sum_j alpha_j
//   d(loss)/dR(Q,D-_j) = -alpha_j
//   dR/d(embedding)    = cosine_back()                (below)
// and each embedding gradient is pushed through the recurrence with
// backward_from_seed(). The backward recursion is truncated after
// `bptt_depth` steps counted from the final word.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "seqrank/model.hpp"
#include "seqrank/objective.hpp"

namespace seqrank {

// Gradients of R = cosine(yq, yd) with respect to both embeddings:
//   a = yq.yd, b = 1/|yq|, c = 1/|yd|
//   v_q = dR/dyq = b*c*yd - a*b^3*c*yq
//   v_d = dR/dyd = b*c*yq - a*b*c^3*yd
struct CosineBackSignals {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  Eigen::VectorXd v_q;
  Eigen::VectorXd v_d;
};

CosineBackSignals cosine_back(const Eigen::VectorXd& yq,
                              const Eigen::VectorXd& yd);

// ---------------------------------------------------------------------------
// Truncated reverse-mode BPTT. `seed` is d(loss)/dy(m); gradients accumulate
// into `grad` (same shapes as the parameters). The recursion visits at most
// `bptt_depth` (>= 1) timesteps, starting at the final word.
//
// RNN: with dz(t) = dy(t) .* (1 - y(t)) .* (1 + y(t)),
//   gW_in  += dz(t) l(t)^T    gW_rec += dz(t) y(t-1)^T    gb += dz(t)
//   dy(t-1) = W_rec^T dz(t).
//
// LSTM: reverse of the forward recurrence in model.hpp; tanh/sigmoid
// derivatives are taken from the stored activations ((1-y)(1+y) and s(1-s)),
// the cell-state chain dc(t-1) collects f(t).*dc(t) plus the peephole reads
// of c(t-1) by the input/forget gates, and the output gate's peephole feeds
// dc(t) directly since it reads c(t). Reduced variant: f = 1, no peepholes,
// forget-gate tensors receive no gradient.
// ---------------------------------------------------------------------------
void backward_from_seed(const RnnParams& p, const ForwardTrace& tr,
                        const TrigramSequence& seq, const Eigen::VectorXd& seed,
                        int bptt_depth, RnnParams& grad);
void backward_from_seed(const LstmParams& p, const ForwardTrace& tr,
                        const TrigramSequence& seq, const Eigen::VectorXd& seed,
                        int bptt_depth, LstmParams& grad);

// ---------------------------------------------------------------------------
// Direction-aware wrappers. A SeqPack caches the reversed sequence for
// bidirectional models; a TracePack holds the per-direction forward traces
// and the concatenated embedding.
// ---------------------------------------------------------------------------
struct SeqPack {
  TrigramSequence fwd;
  std::optional<TrigramSequence> rev;

  static SeqPack make(TrigramSequence seq, bool bidirectional) {
    SeqPack s{std::move(seq), std::nullopt};
    if (bidirectional) s.rev = reversed(s.fwd);
    return s;
  }
};

struct TracePack {
  ForwardTrace fwd;
  std::optional<ForwardTrace> bwd;
  Eigen::VectorXd embedding;
};

template <class P>
TracePack trace_forward(const Directed<P>& model, const SeqPack& seq) {
  TracePack t;
  t.fwd = forward(model.fwd, seq.fwd);
  if (model.bwd) {
    if (!seq.rev) throw DimMismatch("bidirectional model, undirected SeqPack");
    t.bwd = forward(*model.bwd, *seq.rev);
    t.embedding.resize(t.fwd.output.rows() + t.bwd->output.rows());
    t.embedding << t.fwd.final_output(), t.bwd->final_output();
  } else {
    t.embedding = t.fwd.final_output();
  }
  return t;
}

// Splits d(loss)/d(embedding) into per-direction seeds and runs BPTT.
template <class P>
void backward_pack(const Directed<P>& model, const TracePack& tr,
                   const SeqPack& seq, const Eigen::VectorXd& embedding_grad,
                   int bptt_depth, Directed<P>& grad) {
  const Index n = model.cells();
  if (embedding_grad.size() != model.embedding_dim()) {
    throw DimMismatch("embedding gradient size mismatch");
  }
  backward_from_seed(model.fwd, tr.fwd, seq.fwd, embedding_grad.head(n),
                     bptt_depth, grad.fwd);
  if (model.bwd) {
    backward_from_seed(*model.bwd, *tr.bwd, *seq.rev, embedding_grad.tail(n),
                       bptt_depth, *grad.bwd);
  }
}

// ---------------------------------------------------------------------------
// Per-record assembly.
// ---------------------------------------------------------------------------

// Forward state for one record: query trace, document traces (clicked doc
// first, then negatives), and the resulting similarity set.
struct RecordWork {
  TracePack query;
  std::vector<TracePack> docs;
  SimilaritySet sims;
};

// Runs all forward passes and cosines. Returns nullopt when any embedding
// has (near-)zero norm, in which case the record must be skipped.
template <class P>
std::optional<RecordWork> record_forward(const Directed<P>& q_model,
                                         const Directed<P>& d_model,
                                         const SeqPack& query,
                                         const std::vector<const SeqPack*>& docs,
                                         double gamma) {
  RecordWork w;
  w.query = trace_forward(q_model, query);
  if (w.query.embedding.norm() <= kNormEps) return std::nullopt;
  w.docs.reserve(docs.size());
  for (const SeqPack* d : docs) {
    w.docs.push_back(trace_forward(d_model, *d));
    if (w.docs.back().embedding.norm() <= kNormEps) return std::nullopt;
  }
  w.sims.gamma = gamma;
  w.sims.r_pos = cosine(w.query.embedding, w.docs[0].embedding);
  w.sims.r_neg.resize(docs.size() - 1);
  for (std::size_t j = 1; j < w.docs.size(); ++j) {
    w.sims.r_neg[j - 1] = cosine(w.query.embedding, w.docs[j].embedding);
  }
  return w;
}

// Accumulates d(batch loss)/d(params) for one record into q_grad / d_grad.
// The query-side seeds from all document pairs are summed before a single
// backward pass (BPTT is linear in the seed); each document runs its own.
template <class P>
void record_backward(const Directed<P>& q_model, const Directed<P>& d_model,
                     const SeqPack& query,
                     const std::vector<const SeqPack*>& docs,
                     const RecordWork& w, int bptt_depth, Directed<P>& q_grad,
                     Directed<P>& d_grad) {
  const std::vector<double> a = alphas(w.sims);
  double w_pos = 0.0;
  for (const double aj : a) w_pos += aj;  // d(loss)/dR(Q, D+)

  Eigen::VectorXd q_seed = Eigen::VectorXd::Zero(w.query.embedding.size());
  for (std::size_t d = 0; d < w.docs.size(); ++d) {
    const double weight = (d == 0) ? w_pos : -a[d - 1];
    if (weight == 0.0) continue;
    const CosineBackSignals cb =
        cosine_back(w.query.embedding, w.docs[d].embedding);
    q_seed.noalias() += weight * cb.v_q;
    backward_pack(d_model, w.docs[d], *docs[d], weight * cb.v_d, bptt_depth,
                  d_grad);
  }
  backward_pack(q_model, w.query, query, q_seed, bptt_depth, q_grad);
}

// ---------------------------------------------------------------------------
// Finite-difference oracle: central differences over every parameter entry.
// Independent of the analytic path — it only re-runs the supplied loss
// functional at perturbed parameters.
// ---------------------------------------------------------------------------
template <class M>
M fd_gradient(const std::function<double(const M&)>& loss_fn, const M& params,
              double h = 1e-5) {
  M work = params;
  M grad = zeros_like(params);
  auto wv = work.tensors();
  auto gv = grad.tensors();
  for (std::size_t k = 0; k < wv.size(); ++k) {
    for (Index i = 0; i < wv[k].size; ++i) {
      const double saved = wv[k].data[i];
      wv[k].data[i] = saved + h;
      const double up = loss_fn(work);
      wv[k].data[i] = saved - h;
      const double down = loss_fn(work);
      wv[k].data[i] = saved;
      gv[k].data[i] = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

}  // namespace seqrank
