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

#include "ctvae/metrics.hpp"

#include "ctvae/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ctvae {

double ks_complement(std::span<double const> real, std::span<double const> synth)
{
  if (real.empty() || synth.empty())
  {
    fail(ErrorKind::argument, "ks_complement: empty sample");
  }
  std::vector<double> a(real.begin(), real.end());
  std::vector<double> b(synth.begin(), synth.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());

  auto const  na  = static_cast<double>(a.size());
  auto const  nb  = static_cast<double>(b.size());
  std::size_t i   = 0;
  std::size_t j   = 0;
  double      sup = 0.0;
  while (i < a.size() || j < b.size())
  {
    double t = 0.0;
    if (j == b.size() || (i < a.size() && a[i] <= b[j]))
    {
      t = a[i];
    }
    else
    {
      t = b[j];
    }
    // Right-continuous ECDFs: consume every sample equal to t before comparing.
    while (i < a.size() && a[i] == t)
    {
      ++i;
    }
    while (j < b.size() && b[j] == t)
    {
      ++j;
    }
    sup = std::max(sup, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return 1.0 - sup;
}

double tv_complement(std::span<std::string const> real, std::span<std::string const> synth)
{
  if (real.empty() || synth.empty())
  {
    fail(ErrorKind::argument, "tv_complement: empty sample");
  }
  std::map<std::string_view, std::pair<double, double>> counts;
  for (auto const &r : real)
  {
    counts[r].first += 1.0;
  }
  for (auto const &s : synth)
  {
    counts[s].second += 1.0;
  }
  auto const na  = static_cast<double>(real.size());
  auto const nb  = static_cast<double>(synth.size());
  double     sum = 0.0;
  for (auto const &[cat, c] : counts)
  {
    sum += std::abs(c.first / na - c.second / nb);
  }
  return std::clamp(1.0 - 0.5 * sum, 0.0, 1.0);
}

ProductScore mean_complement(Dataset const &real, Dataset const &synth, Schema const &schema,
                             std::string product)
{
  auto const targets = schema.indices(ColumnRole::target);
  if (targets.empty())
  {
    fail(ErrorKind::argument, "mean_complement: schema has no target columns");
  }
  if (real.rows() == 0 || synth.rows() == 0)
  {
    fail(ErrorKind::argument, "mean_complement: empty row set");
  }
  ProductScore out;
  out.product        = std::move(product);
  out.purchase_count = real.rows();
  double total       = 0.0;
  for (auto c : targets)
  {
    auto const &spec = schema.columns[c];
    auto        ri   = real.schema().find(spec.name);
    auto        si   = synth.schema().find(spec.name);
    if (!ri || !si)
    {
      fail(ErrorKind::contract, "mean_complement: column '" + spec.name + "' missing");
    }
    if (real.schema().columns[*ri].kind != spec.kind || synth.schema().columns[*si].kind != spec.kind)
    {
      fail(ErrorKind::contract, "mean_complement: column kind mismatch for '" + spec.name + "'");
    }
    double const score = spec.kind == ColumnKind::continuous
                             ? ks_complement(real.numbers(*ri), synth.numbers(*si))
                             : tv_complement(real.labels(*ri), synth.labels(*si));
    out.columns.push_back({spec.name, spec.kind, score});
    total += score;
  }
  out.mc = total / static_cast<double>(targets.size());
  return out;
}

AggregateScore aggregate(std::span<ProductScore const> scores)
{
  if (scores.empty())
  {
    fail(ErrorKind::argument, "aggregate: no product scores");
  }
  double sum      = 0.0;
  double weighted = 0.0;
  double total    = 0.0;
  for (auto const &s : scores)
  {
    sum += s.mc;
    weighted += static_cast<double>(s.purchase_count) * s.mc;
    total += static_cast<double>(s.purchase_count);
  }
  if (total <= 0.0)
  {
    fail(ErrorKind::argument, "aggregate: total purchase count is zero");
  }
  return {sum / static_cast<double>(scores.size()), weighted / total};
}

nlohmann::json to_json(ProductScore const &score)
{
  nlohmann::json cols = nlohmann::json::array();
  for (auto const &c : score.columns)
  {
    cols.push_back({{"column", c.name}, {"kind", to_string(c.kind)}, {"score", c.score}});
  }
  return {{"product", score.product},
          {"purchase_count", score.purchase_count},
          {"mc", score.mc},
          {"columns", std::move(cols)}};
}

nlohmann::json to_json(AggregateScore const &score)
{
  return {{"average_mc", score.average_mc}, {"weighted_average_mc", score.weighted_average_mc}};
}

}  // namespace ctvae
