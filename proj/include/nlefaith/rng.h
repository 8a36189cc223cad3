//
// Copyright 2026 The nlefaith Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef NLEFAITH_RNG_H_
#define NLEFAITH_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace nlefaith {

// Platform-reproducible random source. std::mt19937_64 output is fixed by
// the standard; the standard distributions are not, so bounded draws are
// done here by rejection sampling.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  uint64_t Below(uint64_t bound) {
    const uint64_t threshold = (0 - bound) % bound;
    while (true) {
      uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

  // `k` distinct indices from [0, n), in draw order (partial Fisher-Yates).
  std::vector<size_t> SampleIndices(size_t n, size_t k) {
    std::vector<size_t> pool(n);
    for (size_t i = 0; i < n; ++i) pool[i] = i;
    if (k > n) k = n;
    for (size_t i = 0; i < k; ++i) {
      size_t j = i + static_cast<size_t>(Below(n - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::mt19937_64 engine_;
};

inline uint64_t Fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for a per-instance stream: depends only on the run seed and a key
// such as the instance id, never on processing order.
inline uint64_t DeriveSeed(uint64_t seed, std::string_view key) {
  return SplitMix64(seed ^ SplitMix64(Fnv1a64(key)));
}

}  // namespace nlefaith

#endif  // NLEFAITH_RNG_H_
