#include "seqrank/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "seqrank/objective.hpp"

namespace seqrank {

RankedList rank(const std::string& query, const std::vector<std::string>& docs,
                const AnyModel& q_model, const AnyModel& d_model,
                const TrigramDict& dict) {
  const VectorXd q_emb = embed(q_model, hash_sentence(query, dict));
  if (q_emb.norm() <= kNormEps) throw ZeroNorm();

  RankedList out;
  out.query = query;
  out.docs.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    RankedDoc rd;
    rd.input_index = i;
    try {
      const VectorXd d_emb = embed(d_model, hash_sentence(docs[i], dict));
      rd.score = cosine(q_emb, d_emb);
    } catch (const EmptySentence&) {
      rd.scorable = false;
    } catch (const ZeroNorm&) {
      rd.scorable = false;
    }
    if (!rd.scorable) rd.score = -std::numeric_limits<double>::infinity();
    out.docs.push_back(rd);
  }
  std::stable_sort(out.docs.begin(), out.docs.end(),
                   [](const RankedDoc& a, const RankedDoc& b) {
                     return a.score > b.score;
                   });
  return out;
}

double ndcg_at_k(const std::vector<int>& ranked_grades, int k) {
  if (k < 1) throw DataError("ndcg_at_k: k must be >= 1");
  for (const int g : ranked_grades) {
    if (g < 0 || g > 3) throw DataError("grade out of range 0..3");
  }
  const std::size_t depth =
      std::min<std::size_t>(ranked_grades.size(), static_cast<std::size_t>(k));
  auto gain = [](int g) { return std::exp2(g) - 1.0; };
  double dcg = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    dcg += gain(ranked_grades[i]) / std::log2(static_cast<double>(i) + 2.0);
  }
  std::vector<int> ideal = ranked_grades;
  std::sort(ideal.begin(), ideal.end(), std::greater<int>());
  double idcg = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    idcg += gain(ideal[i]) / std::log2(static_cast<double>(i) + 2.0);
  }
  if (idcg == 0.0) return 0.0;
  return dcg / idcg;
}

NdcgReport mean_ndcg(const std::vector<Judgment>& judgments,
                     const AnyModel& q_model, const AnyModel& d_model,
                     const TrigramDict& dict, const std::vector<int>& ks) {
  if (ks.empty()) throw DataError("mean_ndcg: no cutoffs given");

  // Group judgments per query in first-occurrence order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<const Judgment*>> groups;
  for (const auto& j : judgments) {
    auto [it, inserted] = groups.emplace(j.query,
                                         std::vector<const Judgment*>{});
    if (inserted) order.push_back(j.query);
    it->second.push_back(&j);
  }

  NdcgReport report;
  report.ks = ks;
  std::vector<double> sums(ks.size(), 0.0);
  for (const auto& query : order) {
    const auto& group = groups[query];
    std::vector<std::string> docs;
    docs.reserve(group.size());
    for (const Judgment* j : group) docs.push_back(j->doc);

    RankedList ranked;
    try {
      ranked = rank(query, docs, q_model, d_model, dict);
    } catch (const EmptySentence&) {
      report.skipped.push_back(query);
      continue;
    } catch (const ZeroNorm&) {
      report.skipped.push_back(query);
      continue;
    }

    std::vector<int> grades;
    grades.reserve(ranked.docs.size());
    for (const auto& rd : ranked.docs) {
      grades.push_back(group[rd.input_index]->grade);
    }
    QueryNdcg qn;
    qn.query = query;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      qn.at_k.push_back(ndcg_at_k(grades, ks[i]));
      sums[i] += qn.at_k.back();
    }
    report.per_query.push_back(std::move(qn));
  }

  if (report.per_query.empty()) {
    throw NumericError("no judged query could be evaluated");
  }
  for (const double s : sums) {
    report.mean.push_back(s / static_cast<double>(report.per_query.size()));
  }
  return report;
}

}  // namespace seqrank
