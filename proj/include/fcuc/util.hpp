#pragma once

// Small shared pieces: seeded RNG streams, hashing, file and number I/O.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fcuc {

// Raised when an artifact's recorded hash or provenance does not match.
class ArtifactMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[nodiscard]] std::uint64_t splitmix64(std::uint64_t& state);

// std::mt19937_64 (its raw sequence is fixed by the standard) with derived
// draws implemented here, so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  // Independent stream number `index` derived from a base seed.
  static Rng substream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next() { return eng_(); }
  double uniform01();  // [0, 1)
  double uniform(double lo, double hi);
  std::uint64_t below(std::uint64_t n);  // uniform in [0, n)
  double normal();
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
  }

 private:
  std::mt19937_64 eng_;
};

[[nodiscard]] std::string sha256_hex(std::string_view data);
[[nodiscard]] std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view data);

// Shortest text that parses back to the same double.
[[nodiscard]] std::string fmt_double(double v);
[[nodiscard]] double parse_double(std::string_view s);

[[nodiscard]] std::vector<std::string> split(std::string_view s, char sep);

}  // namespace fcuc
