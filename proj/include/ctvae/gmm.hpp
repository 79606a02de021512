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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ctvae {

/// One-dimensional Gaussian mixture with components sorted by mean.
struct GaussianMixture
{
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> stds;

  std::size_t components() const noexcept
  {
    return weights.size();
  }

  double log_density(double x) const;
  double log_likelihood(std::span<double const> values) const;

  /// Posterior probability of each component given x.
  std::vector<double> responsibilities(double x) const;

  bool operator==(GaussianMixture const &) const = default;
};

struct GmmOptions
{
  std::size_t   max_modes      = 10;
  std::size_t   restarts       = 5;
  std::size_t   max_iterations = 300;
  double        tolerance      = 1e-6;  // on mean per-sample log-likelihood
  std::uint64_t seed           = 0;
};

/// Called after every EM iteration with the current parameters.
using EmObserver = std::function<void(GaussianMixture const &)>;

struct EmResult
{
  GaussianMixture mixture;
  double          log_likelihood = 0.0;
  std::size_t     iterations     = 0;
};

/// Scale-aware floor applied to every component standard deviation.
double std_floor(std::span<double const> values);

/// Single EM run with k-means++ seeding for a fixed component count.
EmResult fit_em(std::span<double const> values, std::size_t components, GmmOptions const &options,
                std::uint64_t run_seed, EmObserver const &observer = {});

/// Best of `options.restarts` EM runs for a fixed component count.
EmResult fit_fixed_components(std::span<double const> values, std::size_t components,
                              GmmOptions const &options);

double bic(EmResult const &fit, std::size_t n);

struct MixtureSelection
{
  GaussianMixture     mixture;
  std::vector<double> scores;  // BIC for K = 1..max_modes
};

/// Fits K = 1..max_modes and keeps the minimum-BIC mixture.
MixtureSelection select_gaussian_mixture(std::span<double const> values, GmmOptions const &options);

GaussianMixture fit_gaussian_mixture(std::span<double const> values, GmmOptions const &options);

}  // namespace ctvae
