#pragma once

// Ranking and NDCG evaluation against human relevance judgments.

#include <string>
#include <vector>

#include "seqrank/corpus.hpp"
#include "seqrank/model.hpp"

namespace seqrank {

struct RankedDoc {
  std::size_t input_index = 0;  // position in the candidate list
  double score = 0.0;           // cosine; -inf when unscorable
  bool scorable = true;         // false: empty/out-of-vocabulary/zero-norm
};

// Candidates sorted by score descending; ties and unscorable documents keep
// their input order (stable). Unscorable documents always sort last.
struct RankedList {
  std::string query;
  std::vector<RankedDoc> docs;
};

// Embeds the query (throws EmptySentence / ZeroNorm when impossible) and all
// candidates; candidates that cannot be embedded become unscorable.
RankedList rank(const std::string& query,
                const std::vector<std::string>& docs, const AnyModel& q_model,
                const AnyModel& d_model, const TrigramDict& dict);

// NDCG@k over grades listed in ranked order:
//   DCG  = sum_{i=1..min(k,m)} (2^grade_i - 1) / log2(i + 1)
//   IDCG = the same over the grades sorted descending
// Returns 0 when IDCG is 0 (all grades zero). Grades must lie in 0..3.
double ndcg_at_k(const std::vector<int>& ranked_grades, int k);

struct QueryNdcg {
  std::string query;
  std::vector<double> at_k;  // parallel to NdcgReport::ks
};

struct NdcgReport {
  std::vector<int> ks;
  std::vector<QueryNdcg> per_query;      // first-occurrence query order
  std::vector<double> mean;              // parallel to ks
  std::vector<std::string> skipped;      // queries that could not be embedded
};

// Groups judgments by query (first-occurrence order), ranks each query's
// judged documents with the models, and averages NDCG@k over queries.
NdcgReport mean_ndcg(const std::vector<Judgment>& judgments,
                     const AnyModel& q_model, const AnyModel& d_model,
                     const TrigramDict& dict, const std::vector<int>& ks);

}  // namespace seqrank
