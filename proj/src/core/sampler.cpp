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

#include "ctvae/sampler.hpp"

#include "ctvae/csv.hpp"
#include "ctvae/error.hpp"
#include "ctvae/rng.hpp"
#include "ctvae/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ctvae {

CellMap ConditionSpec::merged() const
{
  CellMap out = base;
  for (auto const &[k, v] : overrides)
  {
    out[k] = v;
  }
  return out;
}

Cell coerce_cell(ColumnSpec const &column, Cell const &value)
{
  if (column.kind == ColumnKind::continuous)
  {
    if (auto const *d = std::get_if<double>(&value))
    {
      if (!std::isfinite(*d))
      {
        fail(ErrorKind::encoding, "column '" + column.name + "': value is not finite");
      }
      return *d;
    }
    double parsed = 0.0;
    if (!csv::parse_number(std::get<std::string>(value), parsed))
    {
      fail(ErrorKind::encoding, "column '" + column.name + "': expected a real value, got '" +
                                    std::get<std::string>(value) + "'");
    }
    return parsed;
  }
  if (auto const *d = std::get_if<double>(&value))
  {
    return csv::format_number(*d);
  }
  return value;
}

Cell cell_from_json(ColumnSpec const &column, nlohmann::json const &value)
{
  if (value.is_number())
  {
    return coerce_cell(column, Cell{value.get<double>()});
  }
  if (value.is_string())
  {
    return coerce_cell(column, Cell{value.get<std::string>()});
  }
  if (value.is_boolean())
  {
    return coerce_cell(column, Cell{std::string(value.get<bool>() ? "true" : "false")});
  }
  fail(ErrorKind::encoding, "column '" + column.name + "': value must be a number or a string");
}

nlohmann::json cell_to_json(Cell const &cell)
{
  if (auto const *d = std::get_if<double>(&cell))
  {
    return *d;
  }
  return std::get<std::string>(cell);
}

CompiledCondition build_condition(TransformBundle const &bundle, CellMap const &base,
                                  CellMap const &overrides)
{
  auto const &schema = bundle.schema;
  CompiledCondition out;
  for (auto const &[name, value] : base)
  {
    auto idx = schema.find(name);
    if (!idx)
    {
      fail(ErrorKind::argument, "base: unknown column '" + name + "'");
    }
    if (schema.columns[*idx].role == ColumnRole::condition)
    {
      out.spec.base.emplace(name, coerce_cell(schema.columns[*idx], value));
    }
  }
  for (auto const &[name, value] : overrides)
  {
    auto idx = schema.find(name);
    if (!idx)
    {
      fail(ErrorKind::argument, "overrides: unknown column '" + name + "'");
    }
    if (schema.columns[*idx].role != ColumnRole::condition)
    {
      fail(ErrorKind::argument, "overrides: column '" + name + "' is not a condition column");
    }
    out.spec.overrides.emplace(name, coerce_cell(schema.columns[*idx], value));
  }
  for (auto c : schema.indices(ColumnRole::condition))
  {
    if (out.spec.base.count(schema.columns[c].name) == 0)
    {
      fail(ErrorKind::argument, "base: condition column '" + schema.columns[c].name + "' has no value");
    }
  }
  out.encoded = encode_condition(out.spec.merged(), bundle);
  return out;
}

SyntheticBatch generate(Model const &model, CompiledCondition const &condition, std::size_t n,
                        std::uint64_t seed, SamplingPolicy policy)
{
  SyntheticBatch batch{Dataset(model.bundle.schema.restricted_to(ColumnRole::target)),
                       Provenance{model_id(model), condition.spec, seed, n}};
  auto const     latent = static_cast<Eigen::Index>(model.arch.latent);
  static std::vector<double> const no_condition;
  auto const &r_c = model.conditioning ? condition.encoded : no_condition;
  for (std::size_t i = 0; i < n; ++i)
  {
    Rng             rng(derive_seed(seed, {i}));
    Eigen::VectorXd z(latent);
    for (Eigen::Index j = 0; j < latent; ++j)
    {
      z(j) = rng.normal();
    }
    auto const out = decode(model, z, r_c);
    batch.rows.append(decode_target(out, model.bundle, policy, rng));
  }
  return batch;
}

std::vector<double> bin_frequencies(std::vector<double> const &values, std::vector<double> const &edges)
{
  if (edges.size() < 2)
  {
    fail(ErrorKind::argument, "summarize: need at least one bin");
  }
  for (std::size_t i = 1; i < edges.size(); ++i)
  {
    if (!(edges[i] > edges[i - 1]))
    {
      fail(ErrorKind::argument, "summarize: bin edges must be strictly increasing");
    }
  }
  std::size_t const   bins = edges.size() - 1;
  std::vector<double> counts(bins, 0.0);
  for (double v : values)
  {
    auto it  = std::upper_bound(edges.begin(), edges.end(), v);
    auto idx = static_cast<std::ptrdiff_t>(it - edges.begin()) - 1;
    idx      = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    counts[static_cast<std::size_t>(idx)] += 1.0;
  }
  for (auto &c : counts)
  {
    c /= static_cast<double>(values.size());
  }
  return counts;
}

DistributionSummary summarize(Dataset const &rows, std::string const &column,
                              SummaryOptions const &options)
{
  auto const idx = rows.schema().find(column);
  if (!idx)
  {
    fail(ErrorKind::argument, "summarize: unknown column '" + column + "'");
  }
  if (rows.rows() == 0)
  {
    fail(ErrorKind::argument, "summarize: no rows");
  }
  DistributionSummary s;
  s.column = column;
  s.kind   = rows.schema().columns[*idx].kind;
  if (s.kind == ColumnKind::discrete)
  {
    auto const &labels = rows.labels(*idx);
    if (options.categories)
    {
      s.labels = *options.categories;
    }
    else
    {
      std::set<std::string> cats(labels.begin(), labels.end());
      s.labels.assign(cats.begin(), cats.end());
    }
    std::map<std::string, double> counts;
    for (auto const &l : labels)
    {
      counts[l] += 1.0;
    }
    for (auto const &[label, count] : counts)
    {
      if (std::find(s.labels.begin(), s.labels.end(), label) == s.labels.end())
      {
        fail(ErrorKind::argument, "summarize: category '" + label + "' of column '" + column +
                                      "' is outside the summary categories");
      }
    }
    for (auto const &l : s.labels)
    {
      auto it = counts.find(l);
      s.frequencies.push_back(it == counts.end() ? 0.0 : it->second / static_cast<double>(rows.rows()));
    }
    return s;
  }

  s.values = rows.numbers(*idx);
  if (options.bins == 0)
  {
    fail(ErrorKind::argument, "summarize: bins must be >= 1");
  }
  double lo = 0.0;
  double hi = 0.0;
  if (options.range)
  {
    std::tie(lo, hi) = *options.range;
  }
  else
  {
    auto [mn, mx] = std::minmax_element(s.values.begin(), s.values.end());
    lo            = *mn;
    hi            = *mx;
  }
  if (!(hi > lo))
  {
    hi = lo + 1.0;
  }
  for (std::size_t b = 0; b <= options.bins; ++b)
  {
    s.edges.push_back(b == options.bins ? hi
                                        : lo + (hi - lo) * static_cast<double>(b) /
                                                   static_cast<double>(options.bins));
  }
  s.frequencies = bin_frequencies(s.values, s.edges);
  for (std::size_t b = 0; b < options.bins; ++b)
  {
    s.labels.push_back("[" + csv::format_number(s.edges[b]) + "," + csv::format_number(s.edges[b + 1]) +
                       (b + 1 == options.bins ? "]" : ")"));
  }
  return s;
}

SummaryOptions summary_options_for(TransformBundle const &bundle, std::string const &column,
                                   std::size_t bins)
{
  auto const     idx = bundle.schema.index_of(column);
  SummaryOptions opts;
  opts.bins = bins;
  if (auto const *ct = std::get_if<ContinuousTransform>(&bundle.transforms[idx]))
  {
    opts.range = std::make_pair(ct->min, ct->max);
  }
  else
  {
    opts.categories = std::get<DiscreteTransform>(bundle.transforms[idx]).vocabulary;
  }
  return opts;
}

SummaryDelta compare(DistributionSummary const &a, DistributionSummary const &b)
{
  if (a.column != b.column)
  {
    fail(ErrorKind::argument, "compare: column '" + a.column + "' vs '" + b.column + "'");
  }
  if (a.labels != b.labels || a.frequencies.size() != b.frequencies.size())
  {
    fail(ErrorKind::argument, "compare: category or bin sets differ for column '" + a.column + "'");
  }
  SummaryDelta d{a.column, a.labels, {}};
  for (std::size_t i = 0; i < a.frequencies.size(); ++i)
  {
    d.deltas.push_back(b.frequencies[i] - a.frequencies[i]);
  }
  return d;
}

nlohmann::json to_json(DistributionSummary const &s, bool include_values)
{
  nlohmann::json j = {{"column", s.column},
                      {"kind", to_string(s.kind)},
                      {"labels", s.labels},
                      {"frequencies", s.frequencies}};
  if (s.kind == ColumnKind::continuous)
  {
    j["edges"] = s.edges;
    if (include_values)
    {
      j["values"] = s.values;
    }
  }
  return j;
}

nlohmann::json to_json(SummaryDelta const &d)
{
  return {{"column", d.column}, {"labels", d.labels}, {"deltas", d.deltas}};
}

}  // namespace ctvae
