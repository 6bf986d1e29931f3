#include "seqrank/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "seqrank/grad.hpp"
#include "seqrank/objective.hpp"

namespace seqrank {

namespace {

// One random batch: `records` click tuples, each with a query, a clicked
// document, and `negatives` unclicked documents.
struct Instance {
  std::vector<SeqPack> queries;
  std::vector<std::vector<SeqPack>> docs;  // [record][0]=clicked, rest negative
  double gamma = 10.0;
  int bptt_depth = 16;  // deeper than any sequence: untruncated gradients
};

TrigramSequence random_sequence(int dim, int len, Rng& rng) {
  TrigramSequence seq;
  seq.dim = dim;
  for (int t = 0; t < len; ++t) {
    SparseVec v;
    v.dim = dim;
    const int nnz = rng.range(1, std::min(3, dim));
    std::vector<int> idx;
    while (static_cast<int>(idx.size()) < nnz) {
      const int cand = static_cast<int>(rng.below(dim));
      if (std::find(idx.begin(), idx.end(), cand) == idx.end()) {
        idx.push_back(cand);
      }
    }
    std::sort(idx.begin(), idx.end());
    for (const int i : idx) v.items.emplace_back(i, rng.range(1, 2));
    seq.steps.push_back(std::move(v));
  }
  return seq;
}

Instance random_instance(const GradCheckConfig& cfg, int dim, Rng& rng,
                         double gamma, bool bidirectional) {
  Instance inst;
  inst.gamma = gamma;
  for (int r = 0; r < cfg.records; ++r) {
    inst.queries.push_back(SeqPack::make(
        random_sequence(dim, rng.range(cfg.seq_len_min, cfg.seq_len_max), rng),
        bidirectional));
    std::vector<SeqPack> docs;
    for (int d = 0; d < cfg.negatives + 1; ++d) {
      docs.push_back(SeqPack::make(
          random_sequence(dim, rng.range(cfg.seq_len_min, cfg.seq_len_max),
                          rng),
          bidirectional));
    }
    inst.docs.push_back(std::move(docs));
  }
  return inst;
}

template <class P>
double instance_loss(const Directed<P>& q_model, const Directed<P>& d_model,
                     const Instance& inst) {
  double acc = 0.0;
  for (std::size_t r = 0; r < inst.queries.size(); ++r) {
    std::vector<const SeqPack*> docs;
    for (const auto& d : inst.docs[r]) docs.push_back(&d);
    const auto work = record_forward(q_model, d_model, inst.queries[r], docs,
                                     inst.gamma);
    if (!work) throw ZeroNorm();
    acc += loss(work->sims);
  }
  return acc;
}

template <class P>
void instance_backward(const Directed<P>& q_model, const Directed<P>& d_model,
                       const Instance& inst, Directed<P>& q_grad,
                       Directed<P>& d_grad) {
  for (std::size_t r = 0; r < inst.queries.size(); ++r) {
    std::vector<const SeqPack*> docs;
    for (const auto& d : inst.docs[r]) docs.push_back(&d);
    const auto work = record_forward(q_model, d_model, inst.queries[r], docs,
                                     inst.gamma);
    if (!work) throw ZeroNorm();
    record_backward(q_model, d_model, inst.queries[r], docs, *work,
                    inst.bptt_depth, q_grad, d_grad);
  }
}

// Max comparison error per tensor group, merged into `worst`.
template <class M>
void compare_grads(const std::string& side, const M& analytic, const M& fd,
                   std::map<std::string, double>& worst) {
  const auto av = analytic.tensors();
  const auto fv = fd.tensors();
  for (std::size_t k = 0; k < av.size(); ++k) {
    double err = 0.0;
    for (Index i = 0; i < av[k].size; ++i) {
      const double a = av[k].data[i];
      const double f = fv[k].data[i];
      // Central differences at h=1e-5 carry an absolute noise floor of
      // roughly eps * |loss| / (2h) ~ 1e-11; differences at or below 1e-8
      // are unresolvable and count as exact. Above it, a vanishing FD value
      // against a real analytic one still fails (ratio ~ 1).
      const double diff = std::abs(a - f);
      if (diff <= 1e-8) continue;
      err = std::max(err, diff / std::max(std::abs(a), std::abs(f)));
    }
    auto [it, inserted] = worst.emplace(side + "." + av[k].name, err);
    if (!inserted) it->second = std::max(it->second, err);
  }
}

template <class P>
P make_random_params(const GradCheckConfig& cfg, int cells, int dim, Rng& rng);

template <>
RnnParams make_random_params<RnnParams>(const GradCheckConfig&, int cells,
                                        int dim, Rng& rng) {
  return init_rnn(cells, dim, rng, 0.3);
}

template <>
LstmParams make_random_params<LstmParams>(const GradCheckConfig& cfg,
                                          int cells, int dim, Rng& rng) {
  return init_lstm(cells, dim, cfg.variant, rng, 0.3);
}

template <class P>
void check_arch(const GradCheckConfig& cfg,
                std::map<std::string, double>& worst) {
  for (int k = 0; k < cfg.instances; ++k) {
    Rng rng(derive_seed(cfg.seed, 40, static_cast<std::uint64_t>(k)));
    const int dim = rng.range(cfg.dim_min, cfg.dim_max);
    const int cells = rng.range(cfg.cells_min, cfg.cells_max);
    const double gamma = (k % 2 == 0) ? 10.0 : 1.0;

    Directed<P> q_model{make_random_params<P>(cfg, cells, dim, rng),
                        std::nullopt};
    Directed<P> d_model{make_random_params<P>(cfg, cells, dim, rng),
                        std::nullopt};
    if (cfg.bidirectional) {
      q_model.bwd = make_random_params<P>(cfg, cells, dim, rng);
      d_model.bwd = make_random_params<P>(cfg, cells, dim, rng);
    }
    const Instance inst =
        random_instance(cfg, dim, rng, gamma, cfg.bidirectional);

    Directed<P> q_grad = zeros_like(q_model);
    Directed<P> d_grad = zeros_like(d_model);
    instance_backward(q_model, d_model, inst, q_grad, d_grad);

    const auto q_fd = fd_gradient<Directed<P>>(
        [&](const Directed<P>& p) { return instance_loss(p, d_model, inst); },
        q_model, cfg.h);
    const auto d_fd = fd_gradient<Directed<P>>(
        [&](const Directed<P>& p) { return instance_loss(q_model, p, inst); },
        d_model, cfg.h);

    compare_grads("query", q_grad, q_fd, worst);
    compare_grads("doc", d_grad, d_fd, worst);
  }
}

}  // namespace

GradCheckResult run_gradcheck(const GradCheckConfig& cfg) {
  std::map<std::string, double> worst;
  if (cfg.arch == Arch::kRnn) {
    check_arch<RnnParams>(cfg, worst);
  } else {
    check_arch<LstmParams>(cfg, worst);
  }
  GradCheckResult result;
  for (const auto& [name, err] : worst) {
    result.groups.push_back({name, err});
    result.overall = std::max(result.overall, err);
  }
  result.pass = result.overall <= cfg.tol;
  return result;
}

}  // namespace seqrank
