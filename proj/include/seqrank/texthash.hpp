#pragma once

// Letter-trigram word hashing: tokenization, trigram extraction, dictionary
// construction, and conversion of sentences into sparse trigram-count
// sequences (one sparse vector per word).

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "seqrank/common.hpp"

namespace seqrank {

// A token is a lowercased, whitespace-free word as produced by tokenize().
using Token = std::string;

// Splits on Unicode whitespace, lowercases ASCII A-Z, keeps digits and
// punctuation as part of tokens. Non-ASCII bytes pass through untouched.
std::vector<Token> tokenize(std::string_view text);

// All consecutive 3-character windows of "#" + token + "#", in order, with
// multiplicity. A token of length n yields n trigrams ("a" -> {"#a#"}).
std::vector<std::string> trigrams(const Token& token);

// Fixed trigram vocabulary with dense indices assigned in lexicographic
// (byte) order, 0-based and contiguous — so a given corpus always produces
// the same indexing regardless of platform or hash-map iteration order.
class TrigramDict {
 public:
  // Builds from raw corpus lines (tokenized internally). Throws EmptyCorpus
  // if no line yields a token.
  static TrigramDict build(const std::vector<std::string>& corpus);

  // Constructs from a pre-sorted entry list (used by load()); validates
  // sortedness and uniqueness.
  static TrigramDict from_entries(std::vector<std::string> entries);

  int dim() const { return static_cast<int>(entries_.size()); }
  std::optional<int> index_of(std::string_view trigram) const;
  const std::vector<std::string>& entries() const { return entries_; }

  // Text format, one "trigram<TAB>index" line per entry, sorted by index.
  void save(const std::filesystem::path& path) const;
  static TrigramDict load(const std::filesystem::path& path);

  TrigramDict() = default;  // empty dictionary (dim 0)

 private:
  std::vector<std::string> entries_;             // index -> trigram
  std::unordered_map<std::string, int> index_;   // trigram -> index
};

// Sparse trigram-count vector for one word: (index, count) pairs with
// strictly increasing indices and positive counts. Trigrams missing from the
// dictionary are dropped, so a fully out-of-vocabulary word hashes to an
// empty vector.
struct SparseVec {
  std::vector<std::pair<int, int>> items;
  int dim = 0;

  int window_count() const {
    int n = 0;
    for (const auto& [idx, cnt] : items) n += cnt;
    return n;
  }
};

// One sparse vector per word, in sentence order.
struct TrigramSequence {
  std::vector<SparseVec> steps;
  int dim = 0;

  int length() const { return static_cast<int>(steps.size()); }
};

SparseVec hash_token(const Token& token, const TrigramDict& dict);

// Tokenizes and hashes a sentence. Throws EmptySentence when tokenization
// yields no tokens.
TrigramSequence hash_sentence(std::string_view text, const TrigramDict& dict);

// Word order reversed (for the backward direction of bidirectional models).
TrigramSequence reversed(const TrigramSequence& seq);

}  // namespace seqrank
