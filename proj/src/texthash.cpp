#include "seqrank/texthash.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace seqrank {

namespace {

// Unicode code points with the White_Space property.
bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0a: case 0x0b: case 0x0c: case 0x0d:
    case 0x20: case 0x85: case 0xa0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202f: case 0x205f: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200a;
  }
}

// Decodes one UTF-8 code point starting at text[i]; advances i past it and
// returns the code point. Malformed bytes are consumed singly and returned
// as-is so they are never treated as whitespace.
char32_t next_codepoint(std::string_view text, std::size_t& i) {
  const auto byte = [&](std::size_t k) {
    return static_cast<unsigned char>(text[k]);
  };
  const unsigned char b0 = byte(i);
  std::size_t len = 1;
  char32_t cp = b0;
  if (b0 >= 0xf0) {
    len = 4;
    cp = b0 & 0x07u;
  } else if (b0 >= 0xe0) {
    len = 3;
    cp = b0 & 0x0fu;
  } else if (b0 >= 0xc0) {
    len = 2;
    cp = b0 & 0x1fu;
  }
  if (len == 1 || i + len > text.size()) {
    ++i;
    return b0;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const unsigned char bk = byte(i + k);
    if ((bk & 0xc0u) != 0x80u) {  // not a continuation byte: malformed
      ++i;
      return b0;
    }
    cp = (cp << 6) | (bk & 0x3fu);
  }
  i += len;
  return cp;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  Token current;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    const char32_t cp = next_codepoint(text, i);
    if (is_unicode_space(cp)) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
      continue;
    }
    for (std::size_t k = start; k < i; ++k) {
      char ch = text[k];
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
      current.push_back(ch);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> trigrams(const Token& token) {
  std::vector<std::string> out;
  if (token.empty()) return out;
  const std::string padded = "#" + token + "#";
  out.reserve(padded.size() - 2);
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    out.push_back(padded.substr(i, 3));
  }
  return out;
}

TrigramDict TrigramDict::build(const std::vector<std::string>& corpus) {
  // std::map keeps entries in byte-lexicographic order, which defines the
  // index assignment.
  std::map<std::string, int> seen;
  bool any_token = false;
  for (const auto& line : corpus) {
    for (const auto& token : tokenize(line)) {
      any_token = true;
      for (auto& tri : trigrams(token)) seen.emplace(std::move(tri), 0);
    }
  }
  if (!any_token) throw EmptyCorpus();

  TrigramDict dict;
  dict.entries_.reserve(seen.size());
  for (const auto& [tri, unused] : seen) {
    dict.index_.emplace(tri, static_cast<int>(dict.entries_.size()));
    dict.entries_.push_back(tri);
  }
  return dict;
}

TrigramDict TrigramDict::from_entries(std::vector<std::string> entries) {
  TrigramDict dict;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i > 0 && !(entries[i - 1] < entries[i])) {
      throw DataError("dictionary entries not in strict lexicographic order");
    }
    dict.index_.emplace(entries[i], static_cast<int>(i));
  }
  dict.entries_ = std::move(entries);
  return dict;
}

std::optional<int> TrigramDict::index_of(std::string_view trigram) const {
  auto it = index_.find(std::string(trigram));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void TrigramDict::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    out << entries_[i] << '\t' << i << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

TrigramDict TrigramDict::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dictionary: " + path.string());
  std::vector<std::string> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(lineno, "expected 'trigram<TAB>index'");
    }
    const std::string tri = line.substr(0, tab);
    char* end = nullptr;
    const long idx = std::strtol(line.c_str() + tab + 1, &end, 10);
    if (end == line.c_str() + tab + 1 || *end != '\0') {
      throw ParseError(lineno, "malformed index");
    }
    if (idx != static_cast<long>(entries.size())) {
      throw ParseError(lineno, "indices must be 0-based and consecutive");
    }
    if (tri.empty()) throw ParseError(lineno, "empty trigram");
    entries.push_back(tri);
  }
  if (entries.empty()) throw DataError("empty dictionary: " + path.string());
  try {
    return from_entries(std::move(entries));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

SparseVec hash_token(const Token& token, const TrigramDict& dict) {
  // Counts per index; trigram lists are short, so a sorted map is fine.
  std::map<int, int> counts;
  for (const auto& tri : trigrams(token)) {
    if (auto idx = dict.index_of(tri)) ++counts[*idx];
  }
  SparseVec vec;
  vec.dim = dict.dim();
  vec.items.assign(counts.begin(), counts.end());
  return vec;
}

TrigramSequence hash_sentence(std::string_view text, const TrigramDict& dict) {
  const auto tokens = tokenize(text);
  if (tokens.empty()) throw EmptySentence();
  TrigramSequence seq;
  seq.dim = dict.dim();
  seq.steps.reserve(tokens.size());
  for (const auto& token : tokens) seq.steps.push_back(hash_token(token, dict));
  return seq;
}

TrigramSequence reversed(const TrigramSequence& seq) {
  TrigramSequence rev;
  rev.dim = seq.dim;
  rev.steps.assign(seq.steps.rbegin(), seq.steps.rend());
  return rev;
}

}  // namespace seqrank
