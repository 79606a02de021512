//------------------------------------------------------------------------------
//
//   Copyright 2026 The ctvae Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace ctvae {

/// Mixes a base seed with stream indices so that (seed, i) pairs give
/// independent, reproducible generators without advancing a shared state.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> streams)
{
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31U);
  };
  std::uint64_t h = mix(seed);
  for (auto s : streams)
  {
    h = mix(h ^ mix(s + 0x632be59bd9b4e019ULL));
  }
  return h;
}

class Rng
{
public:
  explicit Rng(std::uint64_t seed)
    : engine_(seed)
  {}

  double uniform()
  {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  double normal()
  {
    return std::normal_distribution<double>(0.0, 1.0)(engine_);
  }

  std::size_t below(std::size_t n)
  {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  /// Index drawn proportionally to non-negative `weights`.
  std::size_t categorical(std::span<double const> weights)
  {
    double total = 0.0;
    for (double w : weights)
    {
      total += w;
    }
    double u = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i)
    {
      u -= weights[i];
      if (u < 0.0)
      {
        return i;
      }
    }
    // Rounding left u marginally non-negative: return the last positive weight.
    for (std::size_t i = weights.size(); i-- > 0;)
    {
      if (weights[i] > 0.0)
      {
        return i;
      }
    }
    return 0;
  }

  std::mt19937_64 &engine() noexcept
  {
    return engine_;
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace ctvae
