#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dcx {

// splitmix64: deterministic, cheap, and stable across platforms.
struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double unif01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double unif(double lo, double hi) { return lo + (hi - lo) * unif01(); }

  uint64_t below(uint64_t n) { return n ? next() % n : 0; }
};

inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Independent deterministic substream for (seed, label, index).
inline SplitMix64 substream(uint64_t seed, const std::string& label,
                            uint64_t index = 0) {
  uint64_t mix = seed;
  mix ^= fnv1a(label) + 0x9e3779b97f4a7c15ULL + (mix << 6) + (mix >> 2);
  mix ^= (index + 1) * 0xd1342543de82ef95ULL;
  SplitMix64 rng(mix);
  rng.next();
  return rng;
}

// Stratified 1-d sample i of n (deterministic shuffle per stream).
struct StratifiedSampler {
  std::vector<std::vector<uint32_t>> perms;  // one permutation per dimension
  uint32_t n;

  StratifiedSampler(SplitMix64& rng, size_t dims, uint32_t count) : n(count) {
    perms.resize(dims);
    for (auto& p : perms) {
      p.resize(n);
      for (uint32_t i = 0; i < n; ++i) p[i] = i;
      for (uint32_t i = n; i > 1; --i) {
        uint32_t j = static_cast<uint32_t>(rng.below(i));
        std::swap(p[i - 1], p[j]);
      }
    }
  }

  // Coordinate for sample i in dimension d, jittered by rng.
  double coord(SplitMix64& rng, size_t d, uint32_t i, double lo, double hi) {
    double cell = (perms[d][i % n] + rng.unif01()) / n;
    return lo + (hi - lo) * cell;
  }
};

}  // namespace dcx
