#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace bidd {

/// xoshiro256** generator seeded through splitmix64.
///
/// Streams: `Rng::derive(seed, stream)` seeds a child generator from
/// splitmix64(seed ^ splitmix64(stream)), so children of one seed are keyed
/// by an integer stream id and never share state with the parent or with
/// each other. Every consumer in the library takes its randomness through a
/// named stream, which keeps results independent of call order and thread
/// count.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0);

  static Rng derive(std::uint64_t seed, std::uint64_t stream);
  /// Child generator for `stream`, keyed by this generator's seed (not its
  /// current position).
  Rng split(std::uint64_t stream) const { return derive(seed_, stream); }
  Rng split(std::string_view name) const;

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next() noexcept;
  std::uint64_t operator()() noexcept { return next(); }
  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept { return ~std::uint64_t{0}; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, spare value cached).
  double normal() noexcept;
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;
/// FNV-1a over bytes; used for stream names and content hashes.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace bidd
