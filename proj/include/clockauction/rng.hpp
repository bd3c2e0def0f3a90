// Copyright 2026 The clockauction Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLOCKAUCTION_RNG_HPP
#define CLOCKAUCTION_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace clockauction {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Independent stream seed for (master, label, index). Adding new labels or
/// indices never changes the seeds of existing ones.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(master ^ fnv1a(label)) ^ splitmix64(index + 0x51ed27ULL));
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// Index drawn from a discrete distribution (probabilities need not be
/// normalized exactly; the last positive entry absorbs rounding).
template <typename Probs>
int sample_index(Rng& rng, const Probs& probs) {
  const double u = uniform01(rng);
  double acc = 0.0;
  int last = 0;
  for (int k = 0; k < static_cast<int>(probs.size()); ++k) {
    if (probs[k] <= 0.0) continue;
    acc += probs[k];
    last = k;
    if (u < acc) return k;
  }
  return last;
}

}  // namespace clockauction

#endif  // CLOCKAUCTION_RNG_HPP
