#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace mtia {

// Deterministic PRNG with cheap substream derivation. All randomness in the
// project flows from a single seed through Rng instances, so outputs are
// reproducible run to run regardless of evaluation order or platform RNG
// library details. Core generator is xoshiro256**, seeded via splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  // Derives an independent stream from a seed plus a list of stream ids,
  // e.g. derive(seed, {kRenderStream, sequence_id, replica}).
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ull;
    for (std::uint64_t id : ids) {
      h = splitmix64(h);
      std::uint64_t mixed = id + 0x632be59bd9b4e019ull;
      h ^= splitmix64(mixed);
    }
    return Rng(h);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n >= 1.
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  // Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) { return lo + uniform_int(hi - lo + 1); }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; one draw per call, the pair's second half is cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  std::uint64_t state_[4];
  double cached_ = 0.0;
  bool have_cached_ = false;
};

// Stream ids for Rng::derive, kept in one place so substreams never collide.
namespace stream {
inline constexpr std::uint64_t kWorldBuild = 1;
inline constexpr std::uint64_t kRender = 2;
inline constexpr std::uint64_t kSplit = 3;
inline constexpr std::uint64_t kMotionData = 4;
inline constexpr std::uint64_t kParamInit = 5;
inline constexpr std::uint64_t kTrainOrder = 6;
inline constexpr std::uint64_t kTriggerSample = 7;
inline constexpr std::uint64_t kGradCheck = 8;
}  // namespace stream

}  // namespace mtia
