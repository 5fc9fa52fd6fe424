// Seeded random number streams.
//
// Every chain owns one 64-bit seed. The seed is split into independent
// Mersenne-Twister streams, one per update type, so that a change in how
// many variates one update consumes never perturbs the others. All variate
// generation is done here rather than through <random> distributions, whose
// algorithms are implementation-defined; draws are therefore bit-identical
// across standard libraries given (seed, iteration count).
#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <string>

namespace mrfmix {

/// SplitMix64 finalizer; used only to derive stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives the seed of a child (e.g. chain c of a run seeded with `seed`).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t child) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(child + 0x632BE59BD9B4E019ULL));
}

/// A single uniform bit source. Thin wrapper so samplers take `Rng&`.
class Rng {
 public:
  Rng() : engine_(0x5EEDULL) {}
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

  friend std::ostream& operator<<(std::ostream& os, const Rng& rng) { return os << rng.engine_; }
  friend std::istream& operator>>(std::istream& is, Rng& rng) { return is >> rng.engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Update types that draw randomness inside one MCMC sweep.
enum class Stream : std::size_t {
  kInit = 0,
  kMu0,
  kTheta,
  kSigma,
  kLabels,
  kWeights,  // pi1 (standard mixture) or Phi (MRF)
  kCount
};

/// The per-chain bundle of independent streams derived from one seed.
class StreamSet {
 public:
  StreamSet() : StreamSet(0) {}
  explicit StreamSet(std::uint64_t seed) : seed_(seed) {
    for (std::size_t s = 0; s < streams_.size(); ++s) streams_[s] = Rng(derive_seed(seed, s));
  }

  Rng& operator[](Stream s) { return streams_[static_cast<std::size_t>(s)]; }
  std::uint64_t seed() const { return seed_; }

  bool operator==(const StreamSet& other) const {
    return seed_ == other.seed_ && streams_ == other.streams_;
  }

  friend std::ostream& operator<<(std::ostream& os, const StreamSet& set) {
    os << set.seed_;
    for (const auto& r : set.streams_) os << '\n' << r;
    return os;
  }
  friend std::istream& operator>>(std::istream& is, StreamSet& set) {
    is >> set.seed_;
    for (auto& r : set.streams_) is >> r;
    return is;
  }

 private:
  std::uint64_t seed_;
  std::array<Rng, static_cast<std::size_t>(Stream::kCount)> streams_;
};

}  // namespace mrfmix
