#pragma once

// Click-through and judgment data: TSV readers/writers and a seeded
// synthetic corpus generator with known topic structure, used for
// end-to-end training and analysis checks.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "seqrank/common.hpp"

namespace seqrank {

// One click-through pair: a query and the clicked document's title.
struct ClickRecord {
  std::string query;
  std::string doc;
};

// Human relevance label for (query, doc): 0=bad, 1=fair, 2=good, 3=excellent.
struct Judgment {
  std::string query;
  std::string doc;
  int grade = 0;
};

// ---------------------------------------------------------------------------
// Synthetic corpus. Each topic owns a disjoint set of pronounceable keyword
// words; a shared filler vocabulary is mixed into every sentence. Every
// record draws a topic, plants 1+ topic keywords in the query, and builds a
// clicked document that shares at least one planted keyword.
//
// Judged queries are held out (generated fresh, not part of the click
// records). Their candidate documents are graded by the rubric
//   3: same topic and shares a planted query keyword
//   2: same topic, no planted keyword shared
//   1: different topic but shares at least one word with the query
//   0: shares nothing with the query
// with grades computed from the realized word overlap, not from intent.
// ---------------------------------------------------------------------------
struct SyntheticSpec {
  int n_topics = 2;
  int vocab_per_topic = 12;
  int filler_vocab = 176;
  int n_records = 500;
  int query_len_min = 2;
  int query_len_max = 4;
  int doc_len_min = 4;
  int doc_len_max = 7;
  double keyword_rate = 0.55;  // chance a non-planted slot is a topic keyword
  int judgment_queries = 40;
  int docs_per_judged_query = 8;
  std::uint64_t seed = 1;
};

struct JudgedQueryTruth {
  std::string query;
  int topic = 0;
  std::vector<std::string> planted;  // topic keywords present in the query
};

struct GroundTruth {
  std::vector<std::vector<std::string>> topic_keywords;  // per topic
  std::vector<int> record_topics;                        // per click record
  std::vector<JudgedQueryTruth> judged;
};

struct SyntheticData {
  std::vector<ClickRecord> records;
  std::vector<Judgment> judgments;
  GroundTruth truth;
};

// Deterministic in spec.seed. Throws SpecInvalid on inconsistent settings.
SyntheticData generate(const SyntheticSpec& spec);

// ---------------------------------------------------------------------------
// File formats (UTF-8, '\n' line ends):
//   clicks:     query<TAB>document_title
//   judgments:  query<TAB>document_title<TAB>grade
// Parse failures throw ParseError with the 1-based line number.
// ---------------------------------------------------------------------------
std::vector<ClickRecord> read_clicks(const std::filesystem::path& path);
void write_clicks(const std::filesystem::path& path,
                  const std::vector<ClickRecord>& records);

std::vector<Judgment> read_judgments(const std::filesystem::path& path);
void write_judgments(const std::filesystem::path& path,
                     const std::vector<Judgment>& judgments);

// Ground truth as JSON (topic -> keywords, record topics, judged queries).
void write_ground_truth(const std::filesystem::path& path,
                        const GroundTruth& truth);
GroundTruth read_ground_truth(const std::filesystem::path& path);

}  // namespace seqrank
