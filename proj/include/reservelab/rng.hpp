#pragma once

#include <cstdint>
#include <random>

namespace reservelab {

// Splittable seeding: every stream in a run is derived from one 64-bit
// master seed plus a (replication, channel) path, so replications can be
// executed in any order or in parallel without sharing generator state.
enum class StreamChannel : std::uint64_t {
  kMarket = 1,  // contexts and noise draws
  kPolicy = 2,  // isolation coins, isolated-buyer picks, uniform reserves
  kBuyers = 3,  // randomized bidding strategies
  kAux = 4,     // test/tooling helpers
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // 53-bit uniform in [0, 1); avoids std::uniform_real_distribution so the
  // byte stream is identical across standard library implementations.
  double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Uniform index in [0, n). Floor scaling keeps one draw per decision.
  int uniform_index(int n) {
    int k = static_cast<int>(next_unit() * n);
    return k >= n ? n - 1 : k;
  }

 private:
  std::mt19937_64 gen_;
};

inline RngStream derive_stream(std::uint64_t master_seed, std::uint64_t replication,
                               StreamChannel channel) {
  std::uint64_t state = master_seed;
  std::uint64_t a = splitmix64(state);
  state ^= 0x6a09e667f3bcc908ULL + replication;
  std::uint64_t b = splitmix64(state);
  state ^= 0xbb67ae8584caa73bULL + static_cast<std::uint64_t>(channel);
  std::uint64_t c = splitmix64(state);
  return RngStream(a ^ (b * 0x9e3779b97f4a7c15ULL) ^ c);
}

}  // namespace reservelab
