#include "seqrank/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "seqrank/texthash.hpp"

namespace seqrank {

namespace {

using nlohmann::json;

// All CVCV words over these alphabets (8100 combinations), pronounceable and
// ASCII-only by construction.
std::vector<std::string> cvcv_vocabulary() {
  static const std::string consonants = "bcdfghjklmnprstvwz";
  static const std::string vowels = "aeiou";
  std::vector<std::string> words;
  words.reserve(consonants.size() * vowels.size() * consonants.size() *
                vowels.size());
  for (char c1 : consonants)
    for (char v1 : vowels)
      for (char c2 : consonants)
        for (char v2 : vowels) words.push_back({c1, v1, c2, v2});
  return words;
}

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

const std::string& pick(const std::vector<std::string>& pool, Rng& rng) {
  return pool[rng.below(pool.size())];
}

// n distinct samples from pool (n <= pool size).
std::vector<std::string> sample_distinct(const std::vector<std::string>& pool,
                                         std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.below(idx.size() - i);
    std::swap(idx[i], idx[j]);
    out.push_back(pool[idx[i]]);
  }
  return out;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

struct Generator {
  const SyntheticSpec& spec;
  std::vector<std::vector<std::string>> topics;  // keyword words per topic
  std::vector<std::string> fillers;

  // A sentence with `planted` keyword words from `topic` guaranteed present;
  // remaining slots are topic keywords with probability keyword_rate, else
  // fillers.
  std::vector<std::string> sentence(int topic,
                                    const std::vector<std::string>& planted,
                                    int length, Rng& rng) const {
    std::vector<std::string> words = planted;
    while (static_cast<int>(words.size()) < length) {
      if (rng.uniform() < spec.keyword_rate) {
        words.push_back(pick(topics[topic], rng));
      } else {
        words.push_back(pick(fillers, rng));
      }
    }
    shuffle(words, rng);
    return words;
  }

  struct Query {
    std::string text;
    int topic;
    std::vector<std::string> planted;
    std::vector<std::string> words;
  };

  Query make_query(Rng& rng) const {
    Query q;
    q.topic = static_cast<int>(rng.below(spec.n_topics));
    const int len = rng.range(spec.query_len_min, spec.query_len_max);
    // Plant one or two keywords but always leave at least one filler slot.
    const int max_planted = std::min(2, len - 1);
    const int n_planted = 1 + static_cast<int>(rng.below(max_planted));
    q.planted = sample_distinct(topics[q.topic], n_planted, rng);
    q.words = q.planted;
    while (static_cast<int>(q.words.size()) < len) {
      q.words.push_back(pick(fillers, rng));
    }
    shuffle(q.words, rng);
    q.text = join_words(q.words);
    return q;
  }

  // Rubric applied to the realized words.
  int grade_of(const Query& q, int doc_topic,
               const std::vector<std::string>& doc_words) const {
    const std::unordered_set<std::string> qwords(q.words.begin(),
                                                 q.words.end());
    const std::unordered_set<std::string> planted(q.planted.begin(),
                                                  q.planted.end());
    bool shares_planted = false;
    bool shares_any = false;
    for (const auto& w : doc_words) {
      if (planted.count(w)) shares_planted = true;
      if (qwords.count(w)) shares_any = true;
    }
    if (doc_topic == q.topic) return shares_planted ? 3 : 2;
    return shares_any ? 1 : 0;
  }
};

std::vector<std::string> split_tsv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace

SyntheticData generate(const SyntheticSpec& spec) {
  if (spec.n_topics < 1) throw SpecInvalid("need at least one topic");
  if (spec.vocab_per_topic < 4) {
    throw SpecInvalid("need at least 4 keywords per topic");
  }
  if (spec.filler_vocab < 4) throw SpecInvalid("need at least 4 filler words");
  if (spec.n_records < 1) throw SpecInvalid("need at least one record");
  if (spec.query_len_min < 2 || spec.query_len_min > spec.query_len_max) {
    throw SpecInvalid("query length range invalid (min >= 2 required)");
  }
  if (spec.doc_len_min < 2 || spec.doc_len_min > spec.doc_len_max) {
    throw SpecInvalid("document length range invalid (min >= 2 required)");
  }
  if (spec.keyword_rate < 0.0 || spec.keyword_rate > 1.0) {
    throw SpecInvalid("keyword_rate must lie in [0, 1]");
  }
  if (spec.judgment_queries < 0 || spec.docs_per_judged_query < 1) {
    throw SpecInvalid("judgment settings invalid");
  }
  const long needed = static_cast<long>(spec.n_topics) * spec.vocab_per_topic +
                      spec.filler_vocab;
  std::vector<std::string> all_words = cvcv_vocabulary();
  if (needed > static_cast<long>(all_words.size())) {
    throw SpecInvalid("vocabulary request exceeds available distinct words");
  }

  // Partition a seeded shuffle of the word pool into disjoint topic
  // vocabularies and the filler vocabulary.
  Generator gen{spec, {}, {}};
  {
    Rng r(derive_seed(spec.seed, 1));
    shuffle(all_words, r);
    std::size_t cursor = 0;
    gen.topics.resize(spec.n_topics);
    for (int t = 0; t < spec.n_topics; ++t) {
      gen.topics[t].assign(all_words.begin() + cursor,
                           all_words.begin() + cursor + spec.vocab_per_topic);
      cursor += spec.vocab_per_topic;
    }
    gen.fillers.assign(all_words.begin() + cursor,
                       all_words.begin() + cursor + spec.filler_vocab);
  }

  SyntheticData data;
  data.truth.topic_keywords = gen.topics;

  // Per-topic document pool. Click records draw a pool document and build a
  // query around it, so every document collects clicks from several distinct
  // queries — the bipartite shape of real click logs. A query shares all its
  // planted keywords and at least one filler with its clicked document.
  struct PoolDoc {
    std::string text;
    std::vector<std::string> keywords;  // distinct topic keywords present
    std::vector<std::string> fillers;   // filler words present
  };
  const int docs_per_topic =
      std::max(4, spec.n_records / (spec.n_topics * 4));
  std::vector<std::vector<PoolDoc>> pool(
      static_cast<std::size_t>(spec.n_topics));
  {
    Rng rng(derive_seed(spec.seed, 4));
    for (int t = 0; t < spec.n_topics; ++t) {
      for (int d = 0; d < docs_per_topic; ++d) {
        const int dlen = rng.range(spec.doc_len_min, spec.doc_len_max);
        const int max_kw = std::min({3, dlen - 1, spec.vocab_per_topic});
        const int n_kw = 1 + static_cast<int>(rng.below(max_kw));
        PoolDoc doc;
        doc.keywords = sample_distinct(gen.topics[t], n_kw, rng);
        std::vector<std::string> words = doc.keywords;
        while (static_cast<int>(words.size()) < dlen) {
          words.push_back(pick(gen.fillers, rng));
        }
        doc.fillers.assign(words.begin() + n_kw, words.end());
        shuffle(words, rng);
        doc.text = join_words(words);
        pool[static_cast<std::size_t>(t)].push_back(std::move(doc));
      }
    }
  }

  for (int r = 0; r < spec.n_records; ++r) {
    Rng rng(derive_seed(spec.seed, 2, static_cast<std::uint64_t>(r)));
    const int topic = static_cast<int>(rng.below(spec.n_topics));
    const auto& doc =
        pool[static_cast<std::size_t>(topic)][rng.below(docs_per_topic)];
    const int qlen = rng.range(spec.query_len_min, spec.query_len_max);
    const int max_planted = std::min(
        {2, qlen - 1, static_cast<int>(doc.keywords.size())});
    const int n_planted = 1 + static_cast<int>(rng.below(max_planted));
    std::vector<std::string> words = sample_distinct(doc.keywords, n_planted,
                                                     rng);
    while (static_cast<int>(words.size()) < qlen) {
      words.push_back(doc.fillers[rng.below(doc.fillers.size())]);
    }
    shuffle(words, rng);
    data.records.push_back({join_words(words), doc.text});
    data.truth.record_topics.push_back(topic);
  }

  // Held-out judged queries with graded candidate documents.
  for (int jq = 0; jq < spec.judgment_queries; ++jq) {
    Rng rng(derive_seed(spec.seed, 3, static_cast<std::uint64_t>(jq)));
    const auto q = gen.make_query(rng);
    data.truth.judged.push_back({q.text, q.topic, q.planted});

    std::vector<std::string> query_fillers;
    for (const auto& w : q.words) {
      if (std::find(q.planted.begin(), q.planted.end(), w) == q.planted.end()) {
        query_fillers.push_back(w);
      }
    }

    std::vector<std::pair<std::string, int>> candidates;
    const int per_grade = (spec.docs_per_judged_query + 3) / 4;
    for (int copy = 0; copy < per_grade; ++copy) {
      const int dlen = rng.range(spec.doc_len_min, spec.doc_len_max);

      // Aim for grade 3: same topic, contains a planted keyword.
      {
        std::vector<std::string> shared{q.planted[rng.below(q.planted.size())]};
        const auto words = gen.sentence(q.topic, shared, dlen, rng);
        candidates.emplace_back(join_words(words), gen.grade_of(q, q.topic, words));
      }
      // Aim for grade 2: same topic, keywords drawn from the non-planted
      // remainder, fillers disjoint from the query's words.
      {
        std::vector<std::string> words;
        for (int i = 0; i < dlen; ++i) {
          if (rng.uniform() < 0.5) {
            std::string w;
            do {
              w = pick(gen.topics[q.topic], rng);
            } while (std::find(q.planted.begin(), q.planted.end(), w) !=
                     q.planted.end());
            words.push_back(w);
          } else {
            std::string w;
            do {
              w = pick(gen.fillers, rng);
            } while (std::find(q.words.begin(), q.words.end(), w) !=
                     q.words.end());
            words.push_back(w);
          }
        }
        shuffle(words, rng);
        candidates.emplace_back(join_words(words), gen.grade_of(q, q.topic, words));
      }
      if (spec.n_topics > 1) {
        const int other =
            (q.topic + 1 + static_cast<int>(rng.below(spec.n_topics - 1))) %
            spec.n_topics;
        // Aim for grade 1: other topic plus one filler shared with the query.
        if (!query_fillers.empty()) {
          std::vector<std::string> shared{pick(query_fillers, rng)};
          auto words = gen.sentence(other, shared, dlen, rng);
          candidates.emplace_back(join_words(words),
                                  gen.grade_of(q, other, words));
        }
        // Aim for grade 0: other topic, no word overlap with the query.
        {
          std::vector<std::string> words;
          for (int i = 0; i < dlen; ++i) {
            std::string w;
            do {
              w = rng.uniform() < 0.5 ? pick(gen.topics[other], rng)
                                      : pick(gen.fillers, rng);
            } while (std::find(q.words.begin(), q.words.end(), w) !=
                     q.words.end());
            words.push_back(w);
          }
          candidates.emplace_back(join_words(words),
                                  gen.grade_of(q, other, words));
        }
      }
    }
    shuffle(candidates, rng);
    if (static_cast<int>(candidates.size()) > spec.docs_per_judged_query) {
      candidates.resize(spec.docs_per_judged_query);
    }
    for (auto& [doc, grade] : candidates) {
      data.judgments.push_back({q.text, std::move(doc), grade});
    }
  }
  return data;
}

std::vector<ClickRecord> read_clicks(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open clicks file: " + path.string());
  std::vector<ClickRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_tsv(line);
    if (fields.size() != 2) {
      throw ParseError(lineno, "expected 'query<TAB>document_title'");
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw ParseError(lineno, "empty query or document");
    }
    records.push_back({fields[0], fields[1]});
  }
  return records;
}

void write_clicks(const std::filesystem::path& path,
                  const std::vector<ClickRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  for (const auto& r : records) out << r.query << '\t' << r.doc << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<Judgment> read_judgments(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open judgments file: " + path.string());
  std::vector<Judgment> judgments;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_tsv(line);
    if (fields.size() != 3) {
      throw ParseError(lineno, "expected 'query<TAB>doc<TAB>grade'");
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw ParseError(lineno, "empty query or document");
    }
    if (fields[2].size() != 1 || fields[2][0] < '0' || fields[2][0] > '3') {
      throw ParseError(lineno, "grade must be an integer in 0..3");
    }
    judgments.push_back({fields[0], fields[1], fields[2][0] - '0'});
  }
  return judgments;
}

void write_judgments(const std::filesystem::path& path,
                     const std::vector<Judgment>& judgments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  for (const auto& j : judgments) {
    out << j.query << '\t' << j.doc << '\t' << j.grade << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

void write_ground_truth(const std::filesystem::path& path,
                        const GroundTruth& truth) {
  json j;
  j["topic_keywords"] = truth.topic_keywords;
  j["record_topics"] = truth.record_topics;
  j["judged"] = json::array();
  for (const auto& q : truth.judged) {
    j["judged"].push_back(
        {{"query", q.query}, {"topic", q.topic}, {"planted", q.planted}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open ground truth: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("malformed ground truth JSON: " + std::string(e.what()));
  }
  GroundTruth truth;
  try {
    truth.topic_keywords =
        j.at("topic_keywords").get<std::vector<std::vector<std::string>>>();
    truth.record_topics = j.at("record_topics").get<std::vector<int>>();
    for (const auto& q : j.at("judged")) {
      truth.judged.push_back({q.at("query").get<std::string>(),
                              q.at("topic").get<int>(),
                              q.at("planted").get<std::vector<std::string>>()});
    }
  } catch (const json::exception& e) {
    throw DataError("ground truth JSON missing fields: " +
                    std::string(e.what()));
  }
  return truth;
}

}  // namespace seqrank
