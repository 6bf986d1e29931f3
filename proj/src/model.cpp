#include "seqrank/model.hpp"

#include <cmath>
#include <cstdlib>

namespace seqrank {

namespace {

// out += W * l for a sparse trigram-count vector l: only the columns of W at
// nonzero positions are touched.
void add_sparse_product(const MatrixXd& W, const SparseVec& l, VectorXd& out) {
  for (const auto& [idx, cnt] : l.items) {
    out.noalias() += static_cast<double>(cnt) * W.col(idx);
  }
}

VectorXd sigmoid(const VectorXd& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

void check_dims(Index model_dim, const TrigramSequence& seq) {
  if (static_cast<Index>(seq.dim) != model_dim) {
    throw DimMismatch("sequence dim " + std::to_string(seq.dim) +
                      " != model input dim " + std::to_string(model_dim));
  }
  if (seq.steps.empty()) throw EmptySentence();
}

void fill_uniform(double* data, Index n, Rng& rng, double scale) {
  for (Index i = 0; i < n; ++i) data[i] = rng.uniform(-scale, scale);
}

}  // namespace

std::vector<TensorView> RnnParams::tensors() {
  return {{"W_in", W_in.data(), W_in.size()},
          {"W_rec", W_rec.data(), W_rec.size()},
          {"b", b.data(), b.size()}};
}

std::vector<ConstTensorView> RnnParams::tensors() const {
  return {{"W_in", W_in.data(), W_in.size()},
          {"W_rec", W_rec.data(), W_rec.size()},
          {"b", b.data(), b.size()}};
}

std::vector<TensorView> LstmParams::tensors() {
  std::vector<TensorView> v;
  auto block = [&v](const char* prefix, LstmGateBlock& g) {
    v.push_back({std::string(prefix) + ".W_in", g.W_in.data(), g.W_in.size()});
    v.push_back(
        {std::string(prefix) + ".W_rec", g.W_rec.data(), g.W_rec.size()});
    v.push_back({std::string(prefix) + ".b", g.b.data(), g.b.size()});
  };
  block("cand", cand);
  block("igate", igate);
  block("fgate", fgate);
  block("ogate", ogate);
  v.push_back({"peep_i", peep_i.data(), peep_i.size()});
  v.push_back({"peep_f", peep_f.data(), peep_f.size()});
  v.push_back({"peep_o", peep_o.data(), peep_o.size()});
  return v;
}

std::vector<ConstTensorView> LstmParams::tensors() const {
  std::vector<ConstTensorView> v;
  auto block = [&v](const char* prefix, const LstmGateBlock& g) {
    v.push_back({std::string(prefix) + ".W_in", g.W_in.data(), g.W_in.size()});
    v.push_back(
        {std::string(prefix) + ".W_rec", g.W_rec.data(), g.W_rec.size()});
    v.push_back({std::string(prefix) + ".b", g.b.data(), g.b.size()});
  };
  block("cand", cand);
  block("igate", igate);
  block("fgate", fgate);
  block("ogate", ogate);
  v.push_back({"peep_i", peep_i.data(), peep_i.size()});
  v.push_back({"peep_f", peep_f.data(), peep_f.size()});
  v.push_back({"peep_o", peep_o.data(), peep_o.size()});
  return v;
}

ForwardTrace rnn_forward(const RnnParams& p, const TrigramSequence& seq) {
  check_dims(p.input_dim(), seq);
  const Index n = p.cells();
  const Index m = seq.length();

  ForwardTrace tr;
  tr.arch = Arch::kRnn;
  tr.output.resize(n, m);

  VectorXd y_prev = VectorXd::Zero(n);
  for (Index t = 0; t < m; ++t) {
    VectorXd z = p.b;
    z.noalias() += p.W_rec * y_prev;
    add_sparse_product(p.W_in, seq.steps[t], z);
    tr.output.col(t) = z.array().tanh();
    y_prev = tr.output.col(t);
  }
  return tr;
}

ForwardTrace lstm_forward(const LstmParams& p, const TrigramSequence& seq) {
  check_dims(p.input_dim(), seq);
  const bool full = p.variant == LstmVariant::kFull;
  const Index n = p.cells();
  const Index m = seq.length();

  ForwardTrace tr;
  tr.arch = Arch::kLstm;
  tr.output.resize(n, m);
  tr.cell.resize(n, m);
  tr.gate_i.resize(n, m);
  tr.gate_f.resize(n, m);
  tr.gate_o.resize(n, m);
  tr.candidate.resize(n, m);

  VectorXd y_prev = VectorXd::Zero(n);
  VectorXd c_prev = VectorXd::Zero(n);
  for (Index t = 0; t < m; ++t) {
    const SparseVec& l = seq.steps[t];

    VectorXd zg = p.cand.b;
    zg.noalias() += p.cand.W_rec * y_prev;
    add_sparse_product(p.cand.W_in, l, zg);
    const VectorXd g = zg.array().tanh();

    VectorXd zi = p.igate.b;
    zi.noalias() += p.igate.W_rec * y_prev;
    add_sparse_product(p.igate.W_in, l, zi);
    if (full) zi.array() += p.peep_i.array() * c_prev.array();
    const VectorXd i = sigmoid(zi);

    VectorXd f;
    if (full) {
      VectorXd zf = p.fgate.b;
      zf.noalias() += p.fgate.W_rec * y_prev;
      add_sparse_product(p.fgate.W_in, l, zf);
      zf.array() += p.peep_f.array() * c_prev.array();
      f = sigmoid(zf);
    } else {
      f = VectorXd::Ones(n);
    }

    const VectorXd c = (f.array() * c_prev.array() + i.array() * g.array());

    VectorXd zo = p.ogate.b;
    zo.noalias() += p.ogate.W_rec * y_prev;
    add_sparse_product(p.ogate.W_in, l, zo);
    if (full) zo.array() += p.peep_o.array() * c.array();
    const VectorXd o = sigmoid(zo);

    const VectorXd y = o.array() * c.array().tanh();

    tr.candidate.col(t) = g;
    tr.gate_i.col(t) = i;
    tr.gate_f.col(t) = f;
    tr.cell.col(t) = c;
    tr.gate_o.col(t) = o;
    tr.output.col(t) = y;

    y_prev = y;
    c_prev = c;
  }
  return tr;
}

VectorXd embed(const AnyModel& model, const TrigramSequence& seq) {
  return std::visit([&](const auto& m) { return embed(m, seq); }, model);
}

RnnParams init_rnn(Index cells, Index dim, Rng& rng, double scale) {
  RnnParams p;
  p.W_in.resize(cells, dim);
  p.W_rec.resize(cells, cells);
  p.b.resize(cells);
  for (auto& v : p.tensors()) fill_uniform(v.data, v.size, rng, scale);
  return p;
}

LstmParams init_lstm(Index cells, Index dim, LstmVariant variant, Rng& rng,
                     double scale) {
  LstmParams p;
  p.variant = variant;
  for (LstmGateBlock* g : {&p.cand, &p.igate, &p.fgate, &p.ogate}) {
    g->W_in.resize(cells, dim);
    g->W_rec.resize(cells, cells);
    g->b.resize(cells);
  }
  p.peep_i.resize(cells);
  p.peep_f.resize(cells);
  p.peep_o.resize(cells);
  for (auto& v : p.tensors()) fill_uniform(v.data, v.size, rng, scale);
  if (variant == LstmVariant::kReduced) {
    // The recurrence never reads these; keep them at zero so checkpoints and
    // norms are well defined.
    p.fgate.W_in.setZero();
    p.fgate.W_rec.setZero();
    p.fgate.b.setZero();
    p.peep_i.setZero();
    p.peep_f.setZero();
    p.peep_o.setZero();
  }
  return p;
}

RnnParams zeros_like(const RnnParams& p) {
  RnnParams z;
  z.W_in = MatrixXd::Zero(p.W_in.rows(), p.W_in.cols());
  z.W_rec = MatrixXd::Zero(p.W_rec.rows(), p.W_rec.cols());
  z.b = VectorXd::Zero(p.b.size());
  return z;
}

LstmParams zeros_like(const LstmParams& p) {
  LstmParams z;
  z.variant = p.variant;
  auto zero_block = [](const LstmGateBlock& src, LstmGateBlock& dst) {
    dst.W_in = MatrixXd::Zero(src.W_in.rows(), src.W_in.cols());
    dst.W_rec = MatrixXd::Zero(src.W_rec.rows(), src.W_rec.cols());
    dst.b = VectorXd::Zero(src.b.size());
  };
  zero_block(p.cand, z.cand);
  zero_block(p.igate, z.igate);
  zero_block(p.fgate, z.fgate);
  zero_block(p.ogate, z.ogate);
  z.peep_i = VectorXd::Zero(p.peep_i.size());
  z.peep_f = VectorXd::Zero(p.peep_f.size());
  z.peep_o = VectorXd::Zero(p.peep_o.size());
  return z;
}

long param_count(const RnnParams& p) {
  return static_cast<long>(p.W_in.size() + p.W_rec.size() + p.b.size());
}

long param_count(const LstmParams& p) {
  const long block = static_cast<long>(p.cand.W_in.size() +
                                       p.cand.W_rec.size() + p.cand.b.size());
  if (p.variant == LstmVariant::kReduced) {
    return 3 * block;  // cand, igate, ogate
  }
  return 4 * block +
         static_cast<long>(p.peep_i.size() + p.peep_f.size() +
                           p.peep_o.size());
}

int matched_rnn_hidden(int lstm_cells, int dim) {
  const long target =
      3L * (static_cast<long>(lstm_cells) * dim +
            static_cast<long>(lstm_cells) * lstm_cells + lstm_cells);
  // RNN parameter count h*(dim + h + 1) is increasing in h; find the h whose
  // count is closest to the target.
  auto count = [dim](long h) { return h * (dim + h + 1); };
  long h = 1;
  while (count(h + 1) <= target) ++h;
  if (std::labs(count(h + 1) - target) < std::labs(count(h) - target)) ++h;
  return static_cast<int>(h);
}

const char* arch_name(Arch a) { return a == Arch::kRnn ? "rnn" : "lstm"; }

const char* variant_name(LstmVariant v) {
  return v == LstmVariant::kFull ? "full" : "reduced";
}

}  // namespace seqrank
