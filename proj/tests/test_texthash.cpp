#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "seqrank/texthash.hpp"

using namespace seqrank;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  const fs::path dir = "tmp_texthash";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("tokenize splits on whitespace and lowercases ASCII") {
  CHECK(tokenize("The CAT  sat\n") == std::vector<Token>{"the", "cat", "sat"});
  CHECK(tokenize("") == std::vector<Token>{});
  CHECK(tokenize(" \t\r\n ") == std::vector<Token>{});
  CHECK(tokenize("a-b c.d") == std::vector<Token>{"a-b", "c.d"});
  CHECK(tokenize("A1B2") == std::vector<Token>{"a1b2"});
}

TEST_CASE("tokenize handles Unicode whitespace and non-ASCII bytes") {
  // U+00A0 no-break space and U+2003 em space both separate tokens.
  CHECK(tokenize("a\xc2\xa0para") == std::vector<Token>{"a", "para"});
  CHECK(tokenize("x\xe2\x80\x83y") == std::vector<Token>{"x", "y"});
  // Non-ASCII letters pass through byte-for-byte; only A-Z is lowercased.
  CHECK(tokenize("\xc3\x89"
                 "A") == std::vector<Token>{"\xc3\x89"
                                            "a"});
  // A lone continuation byte is not whitespace and stays inside the token.
  CHECK(tokenize("a\x80"
                 "b") == std::vector<Token>{"a\x80"
                                            "b"});
}

TEST_CASE("trigrams pad with # and keep multiplicity") {
  CHECK(trigrams("cat") == std::vector<std::string>{"#ca", "cat", "at#"});
  CHECK(trigrams("a") == std::vector<std::string>{"#a#"});
  CHECK(trigrams("ab") == std::vector<std::string>{"#ab", "ab#"});
  CHECK(trigrams("aaaa") ==
        std::vector<std::string>{"#aa", "aaa", "aaa", "aa#"});
  CHECK(trigrams("").empty());
}

TEST_CASE("dictionary assigns indices in byte-lexicographic order") {
  const TrigramDict dict = TrigramDict::build({"cat"});
  // '#' (0x23) sorts before letters.
  REQUIRE(dict.dim() == 3);
  CHECK(dict.entries() == std::vector<std::string>{"#ca", "at#", "cat"});
  CHECK(dict.index_of("#ca") == 0);
  CHECK(dict.index_of("at#") == 1);
  CHECK(dict.index_of("cat") == 2);
  CHECK(dict.index_of("dog") == std::nullopt);
}

TEST_CASE("dictionary build requires at least one token") {
  CHECK_THROWS_AS(TrigramDict::build({}), EmptyCorpus);
  CHECK_THROWS_AS(TrigramDict::build({"", "  \t "}), EmptyCorpus);
}

TEST_CASE("from_entries validates strict ordering") {
  CHECK_THROWS_AS(TrigramDict::from_entries({"bbb", "aaa"}), DataError);
  CHECK_THROWS_AS(TrigramDict::from_entries({"aaa", "aaa"}), DataError);
  const TrigramDict d = TrigramDict::from_entries({"aaa", "bbb"});
  CHECK(d.dim() == 2);
}

TEST_CASE("hash_token counts trigram occurrences at sorted indices") {
  const TrigramDict dict = TrigramDict::build({"cat"});
  const SparseVec v = hash_token("cat", dict);
  REQUIRE(v.items.size() == 3);
  CHECK(v.items[0] == std::pair<int, int>{0, 1});
  CHECK(v.items[1] == std::pair<int, int>{1, 1});
  CHECK(v.items[2] == std::pair<int, int>{2, 1});
  CHECK(v.dim == 3);
  CHECK(v.window_count() == 3);

  // Repeated trigrams accumulate counts ("aaa" appears twice in "aaaa").
  const TrigramDict d2 = TrigramDict::build({"aaaa"});
  REQUIRE(d2.entries() == std::vector<std::string>{"#aa", "aa#", "aaa"});
  const SparseVec v2 = hash_token("aaaa", d2);
  REQUIRE(v2.items.size() == 3);
  CHECK(v2.items[0] == std::pair<int, int>{0, 1});
  CHECK(v2.items[1] == std::pair<int, int>{1, 1});
  CHECK(v2.items[2] == std::pair<int, int>{2, 2});
  CHECK(v2.window_count() == 4);
}

TEST_CASE("out-of-vocabulary trigrams are dropped") {
  const TrigramDict dict = TrigramDict::build({"cat"});
  CHECK(hash_token("dog", dict).items.empty());
  // Partial overlap: "at#" of "rat" is in the dict, the rest is not.
  const SparseVec v = hash_token("rat", dict);
  REQUIRE(v.items.size() == 1);
  CHECK(v.items[0] == std::pair<int, int>{1, 1});
}

TEST_CASE("hash_sentence maps words to steps and rejects empty input") {
  const TrigramDict dict = TrigramDict::build({"cat sat"});
  const TrigramSequence seq = hash_sentence("cat cat sat", dict);
  CHECK(seq.length() == 3);
  CHECK(seq.dim == dict.dim());
  CHECK(seq.steps[0].items == seq.steps[1].items);
  CHECK_THROWS_AS(hash_sentence("   ", dict), EmptySentence);
  // A fully out-of-vocabulary word still occupies a (empty) step.
  const TrigramSequence oov = hash_sentence("dog", dict);
  CHECK(oov.length() == 1);
  CHECK(oov.steps[0].items.empty());
}

TEST_CASE("reversed flips the word order only") {
  const TrigramDict dict = TrigramDict::build({"cat sat mat"});
  const TrigramSequence seq = hash_sentence("cat sat mat", dict);
  const TrigramSequence rev = reversed(seq);
  REQUIRE(rev.length() == 3);
  CHECK(rev.dim == seq.dim);
  CHECK(rev.steps[0].items == seq.steps[2].items);
  CHECK(rev.steps[1].items == seq.steps[1].items);
  CHECK(rev.steps[2].items == seq.steps[0].items);
}

TEST_CASE("dictionary save/load round-trips and validates") {
  const fs::path dir = work_dir();
  const TrigramDict dict = TrigramDict::build({"cat sat on the mat"});
  const fs::path path = dir / "dict.tsv";
  dict.save(path);
  const TrigramDict loaded = TrigramDict::load(path);
  CHECK(loaded.entries() == dict.entries());

  {
    std::ofstream bad(dir / "gap.tsv");
    bad << "aaa\t0\nbbb\t2\n";
  }
  CHECK_THROWS_AS(TrigramDict::load(dir / "gap.tsv"), ParseError);
  {
    std::ofstream bad(dir / "nofield.tsv");
    bad << "aaa\n";
  }
  CHECK_THROWS_AS(TrigramDict::load(dir / "nofield.tsv"), ParseError);
  {
    std::ofstream bad(dir / "unsorted.tsv");
    bad << "bbb\t0\naaa\t1\n";
  }
  CHECK_THROWS_AS(TrigramDict::load(dir / "unsorted.tsv"), DataError);
  CHECK_THROWS_AS(TrigramDict::load(dir / "missing.tsv"), DataError);
}
