#pragma once

#include <cstdint>
#include <string_view>

namespace gle {

/// Counter-based seedable random stream. Substreams are derived by mixing a
/// stream id (or name) into the key, so parallel workers can draw from
/// statistically independent streams that are reproducible from one seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ kKeyTweak)) {}

  /// Independent substream identified by an integer.
  Rng derive(std::uint64_t stream) const {
    Rng child(0);
    child.key_ = mix(key_ ^ mix(stream + kStreamTweak));
    child.counter_ = 0;
    child.has_spare_ = false;
    return child;
  }

  /// Independent substream identified by a name (hashed with FNV-1a).
  Rng derive(std::string_view name) const;

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kCounterStep); }

  /// Uniform on (0,1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller.
  double gaussian();

 private:
  static constexpr std::uint64_t kKeyTweak = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kStreamTweak = 0xbf58476d1ce4e5b9ULL;
  static constexpr std::uint64_t kCounterStep = 0x2545f4914f6cdd1dULL;

  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gle
