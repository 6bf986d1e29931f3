#include "seqrank/grad.hpp"

#include <cmath>

namespace seqrank {

namespace {

// grad.col(idx) += cnt * dz for each nonzero of l: the sparse counterpart of
// the outer product dz * l^T.
void add_sparse_outer(MatrixXd& grad, const Eigen::VectorXd& dz,
                      const SparseVec& l) {
  for (const auto& [idx, cnt] : l.items) {
    grad.col(idx).noalias() += static_cast<double>(cnt) * dz;
  }
}

}  // namespace

CosineBackSignals cosine_back(const Eigen::VectorXd& yq,
                              const Eigen::VectorXd& yd) {
  if (yq.size() != yd.size()) {
    throw DimMismatch("cosine_back: vector sizes differ");
  }
  const double nq = yq.norm();
  const double nd = yd.norm();
  if (nq <= kNormEps || nd <= kNormEps) throw ZeroNorm();

  CosineBackSignals s;
  s.a = yq.dot(yd);
  s.b = 1.0 / nq;
  s.c = 1.0 / nd;
  s.v_q = s.b * s.c * yd - (s.a * s.b * s.b * s.b * s.c) * yq;
  s.v_d = s.b * s.c * yq - (s.a * s.b * s.c * s.c * s.c) * yd;
  return s;
}

void backward_from_seed(const RnnParams& p, const ForwardTrace& tr,
                        const TrigramSequence& seq, const Eigen::VectorXd& seed,
                        int bptt_depth, RnnParams& grad) {
  if (bptt_depth < 1) throw DimMismatch("bptt_depth must be >= 1");
  if (tr.steps() != seq.length()) {
    throw DimMismatch("trace/sequence length mismatch");
  }
  const Index m = tr.steps();
  const Index last = m - 1;
  const Index stop = std::max<Index>(0, m - bptt_depth);

  VectorXd dy = seed;
  for (Index t = last; t >= stop; --t) {
    const Eigen::ArrayXd y = tr.output.col(t).array();
    const VectorXd dz = dy.array() * (1.0 - y) * (1.0 + y);
    add_sparse_outer(grad.W_in, dz, seq.steps[t]);
    if (t > 0) grad.W_rec.noalias() += dz * tr.output.col(t - 1).transpose();
    grad.b.noalias() += dz;
    if (t > stop) dy.noalias() = p.W_rec.transpose() * dz;
  }
}

void backward_from_seed(const LstmParams& p, const ForwardTrace& tr,
                        const TrigramSequence& seq, const Eigen::VectorXd& seed,
                        int bptt_depth, LstmParams& grad) {
  if (bptt_depth < 1) throw DimMismatch("bptt_depth must be >= 1");
  if (tr.steps() != seq.length()) {
    throw DimMismatch("trace/sequence length mismatch");
  }
  const bool full = p.variant == LstmVariant::kFull;
  const Index n = p.cells();
  const Index m = tr.steps();
  const Index last = m - 1;
  const Index stop = std::max<Index>(0, m - bptt_depth);

  VectorXd dy = seed;                  // d(loss)/dy(t), from the future
  VectorXd dc = VectorXd::Zero(n);     // d(loss)/dc(t) via step t+1's paths
  for (Index t = last; t >= stop; --t) {
    const Eigen::ArrayXd i = tr.gate_i.col(t).array();
    const Eigen::ArrayXd f = tr.gate_f.col(t).array();
    const Eigen::ArrayXd o = tr.gate_o.col(t).array();
    const Eigen::ArrayXd g = tr.candidate.col(t).array();
    const Eigen::ArrayXd hc = tr.cell.col(t).array().tanh();
    const Eigen::ArrayXd c_prev =
        (t > 0) ? Eigen::ArrayXd(tr.cell.col(t - 1).array())
                : Eigen::ArrayXd(Eigen::ArrayXd::Zero(n));

    // y(t) = o(t) .* tanh(c(t))
    const VectorXd dzo = (dy.array() * hc) * o * (1.0 - o);
    dc.array() += dy.array() * o * (1.0 - hc) * (1.0 + hc);
    if (full) dc.array() += dzo.array() * p.peep_o.array();  // o reads c(t)

    // c(t) = f(t) .* c(t-1) + i(t) .* g(t)
    const VectorXd dzi = (dc.array() * g) * i * (1.0 - i);
    const VectorXd dzg = (dc.array() * i) * (1.0 - g) * (1.0 + g);
    VectorXd dzf;
    if (full) dzf = (dc.array() * c_prev) * f * (1.0 - f);

    const VectorXd y_prev =
        (t > 0) ? VectorXd(tr.output.col(t - 1)) : VectorXd(VectorXd::Zero(n));
    const SparseVec& l = seq.steps[t];

    add_sparse_outer(grad.ogate.W_in, dzo, l);
    grad.ogate.W_rec.noalias() += dzo * y_prev.transpose();
    grad.ogate.b.noalias() += dzo;

    add_sparse_outer(grad.igate.W_in, dzi, l);
    grad.igate.W_rec.noalias() += dzi * y_prev.transpose();
    grad.igate.b.noalias() += dzi;

    add_sparse_outer(grad.cand.W_in, dzg, l);
    grad.cand.W_rec.noalias() += dzg * y_prev.transpose();
    grad.cand.b.noalias() += dzg;

    if (full) {
      add_sparse_outer(grad.fgate.W_in, dzf, l);
      grad.fgate.W_rec.noalias() += dzf * y_prev.transpose();
      grad.fgate.b.noalias() += dzf;
      grad.peep_o.array() += dzo.array() * tr.cell.col(t).array();
      grad.peep_i.array() += dzi.array() * c_prev;
      grad.peep_f.array() += dzf.array() * c_prev;
    }

    if (t > stop) {
      // Into the previous step: the cell chain keeps f(t) plus the peephole
      // reads of c(t-1); the output chain collects all gate recurrences.
      VectorXd dc_prev = (dc.array() * f).matrix();
      if (full) {
        dc_prev.array() += dzi.array() * p.peep_i.array();
        dc_prev.array() += dzf.array() * p.peep_f.array();
      }
      VectorXd dy_prev = p.ogate.W_rec.transpose() * dzo;
      dy_prev.noalias() += p.igate.W_rec.transpose() * dzi;
      dy_prev.noalias() += p.cand.W_rec.transpose() * dzg;
      if (full) dy_prev.noalias() += p.fgate.W_rec.transpose() * dzf;

      dc = std::move(dc_prev);
      dy = std::move(dy_prev);
    }
  }
}

}  // namespace seqrank
