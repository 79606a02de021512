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

#include "ctvae/gmm.hpp"

#include "ctvae/error.hpp"
#include "ctvae/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace ctvae {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // ln(sqrt(2*pi))

double log_normal(double x, double mean, double sd)
{
  double const u = (x - mean) / sd;
  return -0.5 * u * u - std::log(sd) - kLogSqrt2Pi;
}

double log_sum_exp(std::span<double const> terms)
{
  double m = -std::numeric_limits<double>::infinity();
  for (double t : terms)
  {
    m = std::max(m, t);
  }
  if (!std::isfinite(m))
  {
    return m;
  }
  double s = 0.0;
  for (double t : terms)
  {
    s += std::exp(t - m);
  }
  return m + std::log(s);
}

void sort_by_mean(GaussianMixture &g)
{
  std::vector<std::size_t> order(g.components());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return g.means[a] < g.means[b]; });
  GaussianMixture sorted;
  for (auto i : order)
  {
    sorted.weights.push_back(g.weights[i]);
    sorted.means.push_back(g.means[i]);
    sorted.stds.push_back(g.stds[i]);
  }
  g = std::move(sorted);
}

void normalize_weights(std::vector<double> &w)
{
  double const total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto &x : w)
  {
    x /= total;
  }
}

// k-means++ seeding followed by hard assignment to the nearest center.
GaussianMixture kmeanspp_init(std::span<double const> values, std::size_t k, double floor, Rng &rng)
{
  std::vector<double> centers;
  centers.push_back(values[rng.below(values.size())]);
  std::vector<double> d2(values.size());
  while (centers.size() < k)
  {
    for (std::size_t i = 0; i < values.size(); ++i)
    {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers)
      {
        best = std::min(best, (values[i] - c) * (values[i] - c));
      }
      d2[i] = best;
    }
    if (std::all_of(d2.begin(), d2.end(), [](double d) { return d == 0.0; }))
    {
      break;  // fewer distinct values than requested components
    }
    centers.push_back(values[rng.categorical(d2)]);
  }

  std::vector<double>      sum(centers.size(), 0.0);
  std::vector<double>      sum_sq(centers.size(), 0.0);
  std::vector<std::size_t> count(centers.size(), 0);
  for (double v : values)
  {
    std::size_t best = 0;
    for (std::size_t c = 1; c < centers.size(); ++c)
    {
      if (std::abs(v - centers[c]) < std::abs(v - centers[best]))
      {
        best = c;
      }
    }
    sum[best] += v;
    sum_sq[best] += v * v;
    ++count[best];
  }

  GaussianMixture g;
  for (std::size_t c = 0; c < centers.size(); ++c)
  {
    if (count[c] == 0)
    {
      continue;
    }
    double const n    = static_cast<double>(count[c]);
    double const mean = sum[c] / n;
    double const var  = std::max(0.0, sum_sq[c] / n - mean * mean);
    g.weights.push_back(n / static_cast<double>(values.size()));
    g.means.push_back(mean);
    g.stds.push_back(std::max(std::sqrt(var), floor));
  }
  return g;
}

}  // namespace

double GaussianMixture::log_density(double x) const
{
  std::vector<double> terms(components());
  for (std::size_t k = 0; k < components(); ++k)
  {
    terms[k] = std::log(weights[k]) + log_normal(x, means[k], stds[k]);
  }
  return log_sum_exp(terms);
}

double GaussianMixture::log_likelihood(std::span<double const> values) const
{
  double ll = 0.0;
  for (double v : values)
  {
    ll += log_density(v);
  }
  return ll;
}

std::vector<double> GaussianMixture::responsibilities(double x) const
{
  std::vector<double> terms(components());
  for (std::size_t k = 0; k < components(); ++k)
  {
    terms[k] = std::log(weights[k]) + log_normal(x, means[k], stds[k]);
  }
  double const norm = log_sum_exp(terms);
  for (auto &t : terms)
  {
    t = std::exp(t - norm);
  }
  return terms;
}

double std_floor(std::span<double const> values)
{
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  double const range = *hi - *lo;
  return 1e-4 * (range > 0.0 ? range : 1.0);
}

EmResult fit_em(std::span<double const> values, std::size_t components, GmmOptions const &options,
                std::uint64_t run_seed, EmObserver const &observer)
{
  if (values.empty())
  {
    fail(ErrorKind::argument, "mixture fit: no values");
  }
  if (components == 0)
  {
    fail(ErrorKind::argument, "mixture fit: component count must be positive");
  }
  for (double v : values)
  {
    if (!std::isfinite(v))
    {
      fail(ErrorKind::argument, "mixture fit: non-finite value");
    }
  }

  double const floor = std_floor(values);
  Rng          rng(run_seed);
  auto         g = kmeanspp_init(values, components, floor, rng);

  std::size_t const   n = values.size();
  std::size_t         k = g.components();
  std::vector<double> resp(n * k);
  std::vector<double> terms(k);
  double              prev_mean_ll = -std::numeric_limits<double>::infinity();
  double              mean_ll      = prev_mean_ll;
  std::size_t         iter         = 0;

  for (; iter < options.max_iterations; ++iter)
  {
    // E-step
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
      for (std::size_t c = 0; c < k; ++c)
      {
        terms[c] = std::log(g.weights[c]) + log_normal(values[i], g.means[c], g.stds[c]);
      }
      double const norm = log_sum_exp(terms);
      ll += norm;
      for (std::size_t c = 0; c < k; ++c)
      {
        resp[i * k + c] = std::exp(terms[c] - norm);
      }
    }
    mean_ll = ll / static_cast<double>(n);

    // M-step
    GaussianMixture next;
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < k; ++c)
    {
      double nk = 0.0;
      double s  = 0.0;
      for (std::size_t i = 0; i < n; ++i)
      {
        nk += resp[i * k + c];
        s += resp[i * k + c] * values[i];
      }
      // Components that lost all support are dropped.
      if (nk < 1e-8 * static_cast<double>(n))
      {
        continue;
      }
      double const mean = s / nk;
      double       var  = 0.0;
      for (std::size_t i = 0; i < n; ++i)
      {
        double const d = values[i] - mean;
        var += resp[i * k + c] * d * d;
      }
      var /= nk;
      next.weights.push_back(nk / static_cast<double>(n));
      next.means.push_back(mean);
      next.stds.push_back(std::max(std::sqrt(var), floor));
      keep.push_back(c);
    }
    normalize_weights(next.weights);
    g = std::move(next);
    if (keep.size() != k)
    {
      k = keep.size();
      resp.assign(n * k, 0.0);
      terms.assign(k, 0.0);
    }
    if (observer)
    {
      observer(g);
    }
    if (mean_ll - prev_mean_ll < options.tolerance)
    {
      ++iter;
      break;
    }
    prev_mean_ll = mean_ll;
  }

  sort_by_mean(g);
  EmResult result;
  result.log_likelihood = g.log_likelihood(values);
  result.mixture        = std::move(g);
  result.iterations     = iter;
  return result;
}

EmResult fit_fixed_components(std::span<double const> values, std::size_t components,
                              GmmOptions const &options)
{
  EmResult best;
  best.log_likelihood = -std::numeric_limits<double>::infinity();
  std::size_t const restarts = std::max<std::size_t>(1, options.restarts);
  for (std::size_t r = 0; r < restarts; ++r)
  {
    auto fit = fit_em(values, components, options, derive_seed(options.seed, {components, r}));
    if (fit.log_likelihood > best.log_likelihood)
    {
      best = std::move(fit);
    }
  }
  return best;
}

double bic(EmResult const &fit, std::size_t n)
{
  auto const params = static_cast<double>(3 * fit.mixture.components() - 1);
  return -2.0 * fit.log_likelihood + params * std::log(static_cast<double>(n));
}

MixtureSelection select_gaussian_mixture(std::span<double const> values, GmmOptions const &options)
{
  if (values.empty())
  {
    fail(ErrorKind::argument, "mixture fit: no values");
  }
  MixtureSelection out;
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi)
  {
    out.mixture.weights = {1.0};
    out.mixture.means   = {*lo};
    out.mixture.stds    = {std_floor(values)};
    out.scores.push_back(bic(EmResult{out.mixture, out.mixture.log_likelihood(values), 0},
                             values.size()));
    return out;
  }

  double best_score = std::numeric_limits<double>::infinity();
  std::size_t const max_modes = std::max<std::size_t>(1, options.max_modes);
  for (std::size_t k = 1; k <= max_modes; ++k)
  {
    auto fit   = fit_fixed_components(values, k, options);
    double const score = bic(fit, values.size());
    out.scores.push_back(score);
    if (score < best_score)
    {
      best_score  = score;
      out.mixture = std::move(fit.mixture);
    }
  }
  return out;
}

GaussianMixture fit_gaussian_mixture(std::span<double const> values, GmmOptions const &options)
{
  return select_gaussian_mixture(values, options).mixture;
}

}  // namespace ctvae
