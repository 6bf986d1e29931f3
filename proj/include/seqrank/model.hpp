#pragma once

// Recurrent sentence-embedding models: a plain tanh RNN and an LSTM with
// peephole connections (full variant) or without forget gate and peepholes
// (reduced variant). A sentence embedding is the hidden output at the last
// word; bidirectional models concatenate the forward-read and reverse-read
// embeddings.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "seqrank/common.hpp"
#include "seqrank/texthash.hpp"

namespace seqrank {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Arch { kRnn, kLstm };
enum class LstmVariant { kFull, kReduced };
enum class Side { kQuery, kDocument };

// Named view over one parameter tensor's storage; lets optimizer, clipping,
// serialization, and finite differences iterate any model generically.
struct TensorView {
  std::string name;
  double* data;
  Index size;
};
struct ConstTensorView {
  std::string name;
  const double* data;
  Index size;
};

// ---------------------------------------------------------------------------
// Plain RNN:  y(t) = tanh(W_in l(t) + W_rec y(t-1) + b),  y(0) = 0.
// The same struct doubles as gradient / velocity storage (same shapes).
// ---------------------------------------------------------------------------
struct RnnParams {
  MatrixXd W_in;   // cells x trigram dim
  MatrixXd W_rec;  // cells x cells
  VectorXd b;      // cells

  Index cells() const { return W_in.rows(); }
  Index input_dim() const { return W_in.cols(); }
  std::vector<TensorView> tensors();
  std::vector<ConstTensorView> tensors() const;
};

// ---------------------------------------------------------------------------
// LSTM. Gate order in the recurrence:
//   cand  g(t) = tanh(Wg l + Ug y(t-1) + bg)
//   input i(t) = sigmoid(Wi l + Ui y(t-1) + pi.*c(t-1) + bi)
//   forget f(t) = sigmoid(Wf l + Uf y(t-1) + pf.*c(t-1) + bf)   [full only]
//   cell   c(t) = f(t).*c(t-1) + i(t).*g(t)
//   output o(t) = sigmoid(Wo l + Uo y(t-1) + po.*c(t) + bo)
//   out    y(t) = o(t).*tanh(c(t)),   c(0) = y(0) = 0.
// The peephole weights are diagonal (stored as vectors). The reduced
// variant fixes f(t) = 1 and removes all peepholes and the forget-gate
// block; those tensors stay allocated (zeroed) so both variants share one
// storage layout, but the reduced forward/backward never read them.
// ---------------------------------------------------------------------------
struct LstmGateBlock {
  MatrixXd W_in;   // cells x trigram dim
  MatrixXd W_rec;  // cells x cells
  VectorXd b;      // cells
};

struct LstmParams {
  LstmGateBlock cand;    // candidate g
  LstmGateBlock igate;   // input gate i
  LstmGateBlock fgate;   // forget gate f
  LstmGateBlock ogate;   // output gate o
  VectorXd peep_i;       // diagonal peephole into i (reads c(t-1))
  VectorXd peep_f;       // diagonal peephole into f (reads c(t-1))
  VectorXd peep_o;       // diagonal peephole into o (reads c(t))
  LstmVariant variant = LstmVariant::kFull;

  Index cells() const { return cand.W_in.rows(); }
  Index input_dim() const { return cand.W_in.cols(); }
  std::vector<TensorView> tensors();
  std::vector<ConstTensorView> tensors() const;
};

// Per-word activations recorded during a forward pass; backward passes and
// activation analysis read from here. Column t-1 holds step t (t = 1..m).
// For the RNN only `output` is populated. For the reduced LSTM `gate_f`
// holds literal ones.
struct ForwardTrace {
  Arch arch = Arch::kRnn;
  MatrixXd output;     // y
  MatrixXd cell;       // c
  MatrixXd gate_i;     // i
  MatrixXd gate_f;     // f
  MatrixXd gate_o;     // o
  MatrixXd candidate;  // g

  Index steps() const { return output.cols(); }
  VectorXd final_output() const { return output.col(output.cols() - 1); }
};

ForwardTrace rnn_forward(const RnnParams& p, const TrigramSequence& seq);
ForwardTrace lstm_forward(const LstmParams& p, const TrigramSequence& seq);

inline ForwardTrace forward(const RnnParams& p, const TrigramSequence& s) {
  return rnn_forward(p, s);
}
inline ForwardTrace forward(const LstmParams& p, const TrigramSequence& s) {
  return lstm_forward(p, s);
}

// ---------------------------------------------------------------------------
// Direction wrapper: unidirectional (fwd only) or bidirectional (bwd reads
// the reversed sentence; embeddings concatenate [fwd; bwd]).
// ---------------------------------------------------------------------------
template <class P>
struct Directed {
  P fwd;
  std::optional<P> bwd;

  bool bidirectional() const { return bwd.has_value(); }
  Index cells() const { return fwd.cells(); }
  Index input_dim() const { return fwd.input_dim(); }
  Index embedding_dim() const {
    return fwd.cells() * (bidirectional() ? 2 : 1);
  }

  std::vector<TensorView> tensors() {
    auto views = fwd.tensors();
    if (bwd) {
      for (auto& v : bwd->tensors()) {
        v.name = "bwd." + v.name;
        views.push_back(std::move(v));
      }
    }
    return views;
  }
  std::vector<ConstTensorView> tensors() const {
    auto views = fwd.tensors();
    if (bwd) {
      for (auto& v : bwd->tensors()) {
        v.name = "bwd." + v.name;
        views.push_back(std::move(v));
      }
    }
    return views;
  }
};

using RnnModel = Directed<RnnParams>;
using LstmModel = Directed<LstmParams>;
using AnyModel = std::variant<RnnModel, LstmModel>;

// Embedding of a sentence: y(m), or [y_fwd(m); y_bwd(m)] for bidirectional.
template <class P>
VectorXd embed(const Directed<P>& model, const TrigramSequence& seq) {
  if (static_cast<Index>(seq.dim) != model.input_dim()) {
    throw DimMismatch("sequence dim " + std::to_string(seq.dim) +
                      " != model input dim " +
                      std::to_string(model.input_dim()));
  }
  const VectorXd e_fwd = forward(model.fwd, seq).final_output();
  if (!model.bwd) return e_fwd;
  const VectorXd e_bwd = forward(*model.bwd, reversed(seq)).final_output();
  VectorXd out(e_fwd.size() + e_bwd.size());
  out << e_fwd, e_bwd;
  return out;
}

VectorXd embed(const AnyModel& model, const TrigramSequence& seq);

// Convenience for explicitly paired directions.
template <class P>
VectorXd embed_bidirectional(const P& fwd, const P& bwd,
                             const TrigramSequence& seq) {
  Directed<P> m{fwd, bwd};
  return embed(m, seq);
}

// ---------------------------------------------------------------------------
// Initialization and shape utilities.
// ---------------------------------------------------------------------------

// Entries i.i.d. uniform in [-scale, scale] from the given stream.
RnnParams init_rnn(Index cells, Index dim, Rng& rng, double scale = 0.1);
// Reduced-variant tensors that the recurrence never reads are zeroed.
LstmParams init_lstm(Index cells, Index dim, LstmVariant variant, Rng& rng,
                     double scale = 0.1);

RnnParams zeros_like(const RnnParams& p);
LstmParams zeros_like(const LstmParams& p);
template <class P>
Directed<P> zeros_like(const Directed<P>& m) {
  Directed<P> z{zeros_like(m.fwd), std::nullopt};
  if (m.bwd) z.bwd = zeros_like(*m.bwd);
  return z;
}

// Number of learnable parameters (reduced LSTM excludes forget-gate block
// and peepholes even though they are allocated).
long param_count(const RnnParams& p);
long param_count(const LstmParams& p);

// Hidden size h for which a plain RNN has the parameter count closest to a
// reduced LSTM with `lstm_cells` cells at trigram dimension `dim`.
int matched_rnn_hidden(int lstm_cells, int dim);

// Generic elementwise helpers over tensors() views.
template <class M>
double global_sq_norm(const M& m) {
  double acc = 0.0;
  for (const auto& v : m.tensors()) {
    for (Index i = 0; i < v.size; ++i) acc += v.data[i] * v.data[i];
  }
  return acc;
}

template <class M>
void scale_in_place(M& m, double s) {
  for (auto& v : m.tensors()) {
    for (Index i = 0; i < v.size; ++i) v.data[i] *= s;
  }
}

// dst += s * src (shapes must match).
template <class M>
void axpy_in_place(M& dst, const M& src, double s) {
  auto dv = dst.tensors();
  auto sv = src.tensors();
  if (dv.size() != sv.size()) throw DimMismatch("tensor list size mismatch");
  for (std::size_t k = 0; k < dv.size(); ++k) {
    if (dv[k].size != sv[k].size) throw DimMismatch("tensor size mismatch");
    for (Index i = 0; i < dv[k].size; ++i) dv[k].data[i] += s * sv[k].data[i];
  }
}

const char* arch_name(Arch a);
const char* variant_name(LstmVariant v);

}  // namespace seqrank
