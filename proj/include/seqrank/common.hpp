#pragma once

// Shared infrastructure: error taxonomy, reproducible RNG, logging.

#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

namespace seqrank {

// ---------------------------------------------------------------------------
// Errors.
//
// DataError covers malformed or insufficient inputs (CLI exit code 2);
// NumericError covers failures of numeric contracts (CLI exit code 3).
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Dictionary construction was given a corpus with no tokens at all.
class EmptyCorpus : public DataError {
 public:
  EmptyCorpus() : DataError("corpus contains no tokens") {}
};

// A sentence to be hashed or embedded produced no tokens.
class EmptySentence : public DataError {
 public:
  EmptySentence() : DataError("sentence contains no tokens") {}
};

// Tensor shapes of model, input, or checkpoint do not line up.
class DimMismatch : public DataError {
 public:
  using DataError::DataError;
};

// A TSV/CSV line could not be parsed; carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(int line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Too few distinct clicked documents to draw the requested negatives.
class CorpusTooSmall : public DataError {
 public:
  using DataError::DataError;
};

// A synthetic-corpus specification is internally inconsistent.
class SpecInvalid : public DataError {
 public:
  using DataError::DataError;
};

// A checkpoint file is corrupt or inconsistent with its header.
class CheckpointError : public DataError {
 public:
  using DataError::DataError;
};

// Cosine similarity was asked for a vector with (near-)zero norm.
class ZeroNorm : public NumericError {
 public:
  ZeroNorm() : NumericError("embedding has zero norm; cosine undefined") {}
};

// Norm below which an embedding is treated as zero for cosine purposes.
inline constexpr double kNormEps = 1e-12;

// ---------------------------------------------------------------------------
// RNG.
//
// Wraps std::mt19937_64 (whose raw output sequence is fully specified by the
// standard) but maps to doubles/ranges by hand, because the standard
// distributions are implementation-defined and would break cross-platform
// reproducibility of seeded runs.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives a child seed from (seed, stream ids); used to give every epoch /
// record / side its own independent, order-independent random stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0) {
  return splitmix64(splitmix64(seed ^ 0x5851f42d4c957f2dULL) + splitmix64(a) +
                    0x9e3779b97f4a7c15ULL * b);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n); rejection sampling on the top of the range.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % n;
  }

  int range(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Logging, controlled by the SEQRANK_LOG environment variable
// (quiet | info | debug; default info). Messages go to stderr.
// ---------------------------------------------------------------------------

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

// Shortest round-trippable representation of a double (for text outputs that
// must reproduce values exactly).
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace seqrank
