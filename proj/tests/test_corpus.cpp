#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "seqrank/corpus.hpp"

using namespace seqrank;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  const fs::path dir = fs::current_path() / "tmp_corpus";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> words_of(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

SyntheticSpec small_spec() {
  SyntheticSpec spec;
  spec.n_records = 50;
  spec.judgment_queries = 12;
  spec.seed = 7;
  return spec;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("generator is deterministic in the seed") {
  const SyntheticSpec spec = small_spec();
  const SyntheticData a = generate(spec);
  const SyntheticData b = generate(spec);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].query == b.records[i].query);
    CHECK(a.records[i].doc == b.records[i].doc);
  }
  REQUIRE(a.judgments.size() == b.judgments.size());
  for (std::size_t i = 0; i < a.judgments.size(); ++i) {
    CHECK(a.judgments[i].doc == b.judgments[i].doc);
    CHECK(a.judgments[i].grade == b.judgments[i].grade);
  }
  CHECK(a.truth.topic_keywords == b.truth.topic_keywords);

  SyntheticSpec other = spec;
  other.seed = 8;
  const SyntheticData c = generate(other);
  CHECK(a.records[0].query != c.records[0].query);
}

TEST_CASE("corpus structure matches the advertised construction") {
  const SyntheticSpec spec = small_spec();
  const SyntheticData data = generate(spec);

  CHECK(static_cast<int>(data.records.size()) == spec.n_records);
  CHECK(data.truth.record_topics.size() == data.records.size());
  REQUIRE(static_cast<int>(data.truth.topic_keywords.size()) == spec.n_topics);
  CHECK(static_cast<int>(data.truth.judged.size()) == spec.judgment_queries);
  CHECK(static_cast<int>(data.judgments.size()) ==
        spec.judgment_queries * spec.docs_per_judged_query);

  // Topic vocabularies are disjoint sets of CVCV words.
  std::set<std::string> seen;
  for (const auto& topic : data.truth.topic_keywords) {
    CHECK(static_cast<int>(topic.size()) == spec.vocab_per_topic);
    for (const auto& w : topic) {
      CHECK(w.size() == 4);
      CHECK(seen.insert(w).second);
    }
  }

  for (std::size_t r = 0; r < data.records.size(); ++r) {
    const int topic = data.truth.record_topics[r];
    REQUIRE(topic >= 0);
    REQUIRE(topic < spec.n_topics);
    const std::unordered_set<std::string> kws(
        data.truth.topic_keywords[topic].begin(),
        data.truth.topic_keywords[topic].end());
    const auto qwords = words_of(data.records[r].query);
    const auto dwords = words_of(data.records[r].doc);
    CHECK(static_cast<int>(qwords.size()) >= spec.query_len_min);
    CHECK(static_cast<int>(qwords.size()) <= spec.query_len_max);
    CHECK(static_cast<int>(dwords.size()) >= spec.doc_len_min);
    CHECK(static_cast<int>(dwords.size()) <= spec.doc_len_max);

    // The query plants topic keywords but keeps at least one filler.
    bool has_kw = false, has_filler = false, doc_shares_planted = false;
    for (const auto& w : qwords) {
      if (kws.count(w)) has_kw = true;
      else has_filler = true;
    }
    for (const auto& w : dwords) {
      if (kws.count(w) &&
          std::find(qwords.begin(), qwords.end(), w) != qwords.end()) {
        doc_shares_planted = true;
      }
    }
    CHECK(has_kw);
    CHECK(has_filler);
    CHECK(doc_shares_planted);
  }
}

TEST_CASE("judgment grades obey the rubric against ground truth") {
  const SyntheticSpec spec = small_spec();
  const SyntheticData data = generate(spec);

  std::size_t cursor = 0;
  for (const auto& jq : data.truth.judged) {
    const auto qwords = words_of(jq.query);
    const std::unordered_set<std::string> qset(qwords.begin(), qwords.end());
    const std::unordered_set<std::string> planted(jq.planted.begin(),
                                                  jq.planted.end());
    REQUIRE(!jq.planted.empty());
    for (const auto& p : jq.planted) CHECK(qset.count(p));
    // Planted words really are keywords of the query's topic.
    const auto& tk = data.truth.topic_keywords[jq.topic];
    for (const auto& p : jq.planted) {
      CHECK(std::find(tk.begin(), tk.end(), p) != tk.end());
    }

    int per_grade_count[4] = {0, 0, 0, 0};
    for (int d = 0; d < spec.docs_per_judged_query; ++d) {
      REQUIRE(cursor < data.judgments.size());
      const Judgment& j = data.judgments[cursor++];
      REQUIRE(j.query == jq.query);
      REQUIRE(j.grade >= 0);
      REQUIRE(j.grade <= 3);
      ++per_grade_count[j.grade];

      bool shares_planted = false, shares_any = false;
      for (const auto& w : words_of(j.doc)) {
        if (planted.count(w)) shares_planted = true;
        if (qset.count(w)) shares_any = true;
      }
      switch (j.grade) {
        case 3: CHECK(shares_planted); break;
        case 2: CHECK_FALSE(shares_planted); break;
        case 1:
          CHECK(shares_any);
          CHECK_FALSE(shares_planted);
          break;
        case 0: CHECK_FALSE(shares_any); break;
      }
    }
    // Default settings realize exactly two documents of every grade.
    for (int g = 0; g < 4; ++g) CHECK(per_grade_count[g] == 2);
  }
  CHECK(cursor == data.judgments.size());

  // Judged queries are held out of the click-through set.
  std::unordered_set<std::string> click_queries;
  for (const auto& r : data.records) click_queries.insert(r.query);
  for (const auto& jq : data.truth.judged) {
    CHECK(click_queries.count(jq.query) == 0);
  }
}

TEST_CASE("single-topic corpora only produce grades 2 and 3") {
  SyntheticSpec spec = small_spec();
  spec.n_topics = 1;
  spec.judgment_queries = 6;
  const SyntheticData data = generate(spec);
  // Two aims per per-grade copy, ceil(8/4)=2 copies -> 4 docs per query.
  CHECK(data.judgments.size() == 6u * 4u);
  for (const auto& j : data.judgments) {
    CHECK((j.grade == 2 || j.grade == 3));
  }
}

TEST_CASE("generate validates its settings") {
  const auto expect_invalid = [](auto mutate) {
    SyntheticSpec spec;
    mutate(spec);
    CHECK_THROWS_AS(generate(spec), SpecInvalid);
  };
  expect_invalid([](SyntheticSpec& s) { s.n_topics = 0; });
  expect_invalid([](SyntheticSpec& s) { s.vocab_per_topic = 3; });
  expect_invalid([](SyntheticSpec& s) { s.filler_vocab = 3; });
  expect_invalid([](SyntheticSpec& s) { s.n_records = 0; });
  expect_invalid([](SyntheticSpec& s) { s.query_len_min = 1; });
  expect_invalid([](SyntheticSpec& s) {
    s.query_len_min = 6;
    s.query_len_max = 5;
  });
  expect_invalid([](SyntheticSpec& s) { s.doc_len_min = 1; });
  expect_invalid([](SyntheticSpec& s) { s.keyword_rate = 1.5; });
  expect_invalid([](SyntheticSpec& s) { s.keyword_rate = -0.1; });
  expect_invalid([](SyntheticSpec& s) { s.docs_per_judged_query = 0; });
  expect_invalid([](SyntheticSpec& s) { s.judgment_queries = -1; });
  // 200 * 40 + 176 > 8100 available CVCV words.
  expect_invalid([](SyntheticSpec& s) {
    s.n_topics = 200;
    s.vocab_per_topic = 40;
  });
}

TEST_CASE("clicks files round-trip") {
  const fs::path dir = work_dir();
  const std::vector<ClickRecord> records = {
      {"best cheap flights", "cheap flight deals"},
      {"tomato soup recipe", "grandma's tomato soup"},
  };
  write_clicks(dir / "c.tsv", records);
  const auto back = read_clicks(dir / "c.tsv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].query == records[0].query);
  CHECK(back[1].doc == records[1].doc);
}

TEST_CASE("clicks reader rejects malformed lines") {
  const fs::path dir = work_dir();
  write_text(dir / "onefield.tsv", "no tab here\n");
  CHECK_THROWS_AS(read_clicks(dir / "onefield.tsv"), ParseError);
  write_text(dir / "threefields.tsv", "a\tb\tc\n");
  CHECK_THROWS_AS(read_clicks(dir / "threefields.tsv"), ParseError);
  write_text(dir / "emptyq.tsv", "\tdoc\n");
  CHECK_THROWS_AS(read_clicks(dir / "emptyq.tsv"), ParseError);
  write_text(dir / "emptyd.tsv", "query\t\n");
  CHECK_THROWS_AS(read_clicks(dir / "emptyd.tsv"), ParseError);
  CHECK_THROWS_AS(read_clicks(dir / "missing.tsv"), DataError);

  // Blank lines are skipped; the error message carries the line number.
  write_text(dir / "blank.tsv", "a\tb\n\nc\td\n");
  CHECK(read_clicks(dir / "blank.tsv").size() == 2);
  write_text(dir / "late.tsv", "a\tb\n\nbroken\n");
  try {
    read_clicks(dir / "late.tsv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("judgments files round-trip and validate grades") {
  const fs::path dir = work_dir();
  const std::vector<Judgment> judgments = {
      {"q one", "doc a", 3},
      {"q one", "doc b", 0},
      {"q two", "doc c", 2},
  };
  write_judgments(dir / "j.tsv", judgments);
  const auto back = read_judgments(dir / "j.tsv");
  REQUIRE(back.size() == 3);
  CHECK(back[0].grade == 3);
  CHECK(back[1].grade == 0);
  CHECK(back[2].query == "q two");

  write_text(dir / "twofields.tsv", "a\tb\n");
  CHECK_THROWS_AS(read_judgments(dir / "twofields.tsv"), ParseError);
  write_text(dir / "grade4.tsv", "a\tb\t4\n");
  CHECK_THROWS_AS(read_judgments(dir / "grade4.tsv"), ParseError);
  write_text(dir / "grade12.tsv", "a\tb\t12\n");
  CHECK_THROWS_AS(read_judgments(dir / "grade12.tsv"), ParseError);
  write_text(dir / "gradex.tsv", "a\tb\tx\n");
  CHECK_THROWS_AS(read_judgments(dir / "gradex.tsv"), ParseError);
  write_text(dir / "negative.tsv", "a\tb\t-1\n");
  CHECK_THROWS_AS(read_judgments(dir / "negative.tsv"), ParseError);
}

TEST_CASE("ground truth JSON round-trips") {
  const fs::path dir = work_dir();
  const SyntheticData data = generate(small_spec());
  write_ground_truth(dir / "gt.json", data.truth);
  const GroundTruth back = read_ground_truth(dir / "gt.json");
  CHECK(back.topic_keywords == data.truth.topic_keywords);
  CHECK(back.record_topics == data.truth.record_topics);
  REQUIRE(back.judged.size() == data.truth.judged.size());
  for (std::size_t i = 0; i < back.judged.size(); ++i) {
    CHECK(back.judged[i].query == data.truth.judged[i].query);
    CHECK(back.judged[i].topic == data.truth.judged[i].topic);
    CHECK(back.judged[i].planted == data.truth.judged[i].planted);
  }

  write_text(dir / "broken.json", "{not json");
  CHECK_THROWS_AS(read_ground_truth(dir / "broken.json"), DataError);
  write_text(dir / "missing.json", "{\"topic_keywords\": []}");
  CHECK_THROWS_AS(read_ground_truth(dir / "missing.json"), DataError);
  CHECK_THROWS_AS(read_ground_truth(dir / "nofile.json"), DataError);
}
