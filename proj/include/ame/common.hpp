#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ame {

struct SourceSpan {
  int line = 0;
  int col = 0;
  int end_line = 0;
  int end_col = 0;
};

enum class Vuln { Reentrancy, Timestamp, InfiniteLoop };

inline const char* to_string(Vuln v) {
  switch (v) {
    case Vuln::Reentrancy: return "reentrancy";
    case Vuln::Timestamp: return "timestamp";
    case Vuln::InfiniteLoop: return "loop";
  }
  return "?";
}

inline Vuln vuln_from_string(std::string_view s) {
  if (s == "reentrancy") return Vuln::Reentrancy;
  if (s == "timestamp") return Vuln::Timestamp;
  if (s == "loop" || s == "infinite_loop" || s == "infinite-loop") return Vuln::InfiniteLoop;
  throw std::invalid_argument("unknown vulnerability: " + std::string(s));
}

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnterminatedStringError : Error { using Error::Error; };
struct IllegalCharacterError : Error { using Error::Error; };
struct UnbalancedBracesError : Error { using Error::Error; };
struct MalformedHeaderError : Error { using Error::Error; };
struct ShapeMismatchError : Error { using Error::Error; };
struct NotScalarLossError : Error { using Error::Error; };
struct NoCoreNodesError : Error { using Error::Error; };
struct TooFewExamplesError : Error { using Error::Error; };
struct NonFiniteLossError : Error { using Error::Error; };
struct EmptyTestSetError : Error { using Error::Error; };
struct CheckpointMismatchError : Error { using Error::Error; };
struct NoFunctionsFoundError : Error { using Error::Error; };
struct LoadError : Error { using Error::Error; };

/// Deterministic RNG. Draws bits from mt19937_64 and converts to doubles
/// without going through distribution objects, whose output is
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double next_double() {
    return static_cast<double>(eng_() >> 11) * (1.0 / 9007199254740992.0);
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform integer in [0, n). Modulo bias is negligible for n << 2^64.
  std::uint64_t next_below(std::uint64_t n) { return n ? eng_() % n : 0; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

}  // namespace ame
