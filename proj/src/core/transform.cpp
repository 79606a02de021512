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

#include "ctvae/transform.hpp"

#include "ctvae/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ctvae {

std::optional<std::size_t> DiscreteTransform::find(std::string const &value) const
{
  auto it = std::find(vocabulary.begin(), vocabulary.end(), value);
  if (it == vocabulary.end())
  {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - vocabulary.begin());
}

std::size_t encoded_width(ColumnTransform const &t)
{
  return std::visit([](auto const &x) { return x.encoded_width(); }, t);
}

ContinuousTransform const &TransformBundle::continuous(std::size_t column) const
{
  auto const *t = std::get_if<ContinuousTransform>(&transforms.at(column));
  if (t == nullptr)
  {
    fail(ErrorKind::contract, "column '" + schema.columns[column].name + "' is not continuous");
  }
  return *t;
}

DiscreteTransform const &TransformBundle::discrete(std::size_t column) const
{
  auto const *t = std::get_if<DiscreteTransform>(&transforms.at(column));
  if (t == nullptr)
  {
    fail(ErrorKind::contract, "column '" + schema.columns[column].name + "' is not discrete");
  }
  return *t;
}

TransformBundle make_bundle(Schema schema, std::vector<ColumnTransform> transforms)
{
  if (schema.columns.size() != transforms.size())
  {
    fail(ErrorKind::contract, "bundle: transform count does not match schema");
  }
  TransformBundle b;
  for (std::size_t c = 0; c < schema.columns.size(); ++c)
  {
    auto const &spec   = schema.columns[c];
    bool const  is_cont = std::holds_alternative<ContinuousTransform>(transforms[c]);
    if (is_cont != (spec.kind == ColumnKind::continuous))
    {
      fail(ErrorKind::contract, "bundle: transform kind mismatch for '" + spec.name + "'");
    }
    if (!is_cont)
    {
      auto const &d = std::get<DiscreteTransform>(transforms[c]);
      if (d.vocabulary.empty())
      {
        fail(ErrorKind::validation, "bundle: empty vocabulary for '" + spec.name + "'");
      }
      schema.columns[c].vocabulary = d.vocabulary;
    }
    std::size_t const width = encoded_width(transforms[c]);
    if (spec.role == ColumnRole::target)
    {
      b.target_layout.push_back({c, b.target_width, width});
      b.target_width += width;
    }
    else
    {
      b.condition_layout.push_back({c, b.condition_width, width});
      b.condition_width += width;
    }
  }
  b.schema     = std::move(schema);
  b.transforms = std::move(transforms);
  return b;
}

TransformBundle fit_bundle(Dataset const &data, BundleOptions const &options)
{
  if (data.rows() == 0)
  {
    fail(ErrorKind::argument, "fit_bundle: dataset is empty");
  }
  auto const                  &schema = data.schema();
  std::vector<ColumnTransform> transforms;
  for (std::size_t c = 0; c < schema.columns.size(); ++c)
  {
    auto const &spec = schema.columns[c];
    if (spec.kind == ColumnKind::continuous)
    {
      auto const &values = data.numbers(c);
      GmmOptions  gmm;
      gmm.max_modes = options.max_modes;
      gmm.seed      = derive_seed(options.seed, {c});
      ContinuousTransform t;
      t.mixture            = fit_gaussian_mixture(values, gmm);
      auto [lo, hi]        = std::minmax_element(values.begin(), values.end());
      t.min                = *lo;
      t.max                = *hi;
      transforms.emplace_back(std::move(t));
    }
    else
    {
      DiscreteTransform t;
      auto const       &labels = data.labels(c);
      if (!spec.vocabulary.empty())
      {
        t.vocabulary = spec.vocabulary;
        for (auto const &l : labels)
        {
          if (!t.find(l))
          {
            fail(ErrorKind::encoding, "column '" + spec.name + "': value '" + l +
                                          "' is not in the declared vocabulary");
          }
        }
      }
      else
      {
        std::set<std::string> cats(labels.begin(), labels.end());
        t.vocabulary.assign(cats.begin(), cats.end());
      }
      transforms.emplace_back(std::move(t));
    }
  }
  Schema fitted    = schema;
  fitted.group_key = schema.group_key;
  return make_bundle(std::move(fitted), std::move(transforms));
}

double continuous_alpha(double value, double mean, double sd)
{
  return std::clamp((value - mean) / (4.0 * sd), -1.0, 1.0);
}

std::size_t argmax(std::span<double const> values)
{
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

std::vector<double> softmax(std::span<double const> logits)
{
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty())
  {
    return p;
  }
  double const m = *std::max_element(p.begin(), p.end());
  double       s = 0.0;
  for (auto &x : p)
  {
    x = std::exp(x - m);
    s += x;
  }
  for (auto &x : p)
  {
    x /= s;
  }
  return p;
}

std::vector<double> encode_continuous(double value, ContinuousTransform const &t,
                                      ModeSelection selection, Rng *rng)
{
  if (!std::isfinite(value))
  {
    fail(ErrorKind::argument, "encode_continuous: value is not finite");
  }
  auto const  resp = t.mixture.responsibilities(value);
  std::size_t mode = 0;
  if (selection == ModeSelection::sample)
  {
    if (rng == nullptr)
    {
      fail(ErrorKind::contract, "encode_continuous: sampled mode selection needs a generator");
    }
    mode = rng->categorical(resp);
  }
  else
  {
    mode = argmax(resp);
  }
  std::vector<double> out(t.encoded_width(), 0.0);
  out[0]        = continuous_alpha(value, t.mixture.means[mode], t.mixture.stds[mode]);
  out[1 + mode] = 1.0;
  return out;
}

double decode_continuous(double alpha, std::span<double const> mode_selector,
                         ContinuousTransform const &t)
{
  if (mode_selector.size() != t.mixture.components())
  {
    fail(ErrorKind::contract, "decode_continuous: mode selector width mismatch");
  }
  auto const k = argmax(mode_selector);
  return alpha * 4.0 * t.mixture.stds[k] + t.mixture.means[k];
}

std::vector<double> encode_discrete(std::string const &value, DiscreteTransform const &t,
                                    std::string const &column)
{
  auto idx = t.find(value);
  if (!idx)
  {
    fail(ErrorKind::encoding, "column '" + column + "': unseen category '" + value + "'");
  }
  std::vector<double> out(t.encoded_width(), 0.0);
  out[*idx] = 1.0;
  return out;
}

namespace {

void encode_into(Cell const &cell, std::size_t column, TransformBundle const &bundle,
                 ModeSelection selection, Rng *rng, double *dst)
{
  auto const &spec = bundle.schema.columns[column];
  std::vector<double> code;
  if (spec.kind == ColumnKind::continuous)
  {
    auto const *v = std::get_if<double>(&cell);
    if (v == nullptr)
    {
      fail(ErrorKind::encoding, "column '" + spec.name + "': expected a real value");
    }
    code = encode_continuous(*v, bundle.continuous(column), selection, rng);
  }
  else
  {
    auto const *v = std::get_if<std::string>(&cell);
    if (v == nullptr)
    {
      fail(ErrorKind::encoding, "column '" + spec.name + "': expected a category label");
    }
    code = encode_discrete(*v, bundle.discrete(column), spec.name);
  }
  std::copy(code.begin(), code.end(), dst);
}

}  // namespace

EncodedRow encode_row(Dataset const &data, std::size_t row, TransformBundle const &bundle, Rng &rng)
{
  auto const &schema = data.schema();
  EncodedRow  out{std::vector<double>(bundle.target_width), std::vector<double>(bundle.condition_width)};
  for (auto const &slot : bundle.target_layout)
  {
    auto const &name = bundle.schema.columns[slot.column].name;
    encode_into(data.cell(row, schema.index_of(name)), slot.column, bundle, ModeSelection::sample,
                &rng, out.target.data() + slot.offset);
  }
  for (auto const &slot : bundle.condition_layout)
  {
    auto const &name = bundle.schema.columns[slot.column].name;
    encode_into(data.cell(row, schema.index_of(name)), slot.column, bundle,
                ModeSelection::most_likely, nullptr, out.condition.data() + slot.offset);
  }
  return out;
}

std::vector<double> encode_condition(std::map<std::string, Cell> const &values,
                                     TransformBundle const &bundle)
{
  std::vector<double> out(bundle.condition_width);
  for (auto const &slot : bundle.condition_layout)
  {
    auto const &name = bundle.schema.columns[slot.column].name;
    auto        it   = values.find(name);
    if (it == values.end())
    {
      fail(ErrorKind::argument, "condition column '" + name + "' has no value");
    }
    encode_into(it->second, slot.column, bundle, ModeSelection::most_likely, nullptr,
                out.data() + slot.offset);
  }
  return out;
}

EncodedTable encode_table(Dataset const &data, TransformBundle const &bundle, std::uint64_t seed)
{
  auto const   n = static_cast<Eigen::Index>(data.rows());
  EncodedTable out{Eigen::MatrixXd(n, static_cast<Eigen::Index>(bundle.target_width)),
                   Eigen::MatrixXd(n, static_cast<Eigen::Index>(bundle.condition_width))};
  for (Eigen::Index r = 0; r < n; ++r)
  {
    Rng  rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    auto row = encode_row(data, static_cast<std::size_t>(r), bundle, rng);
    for (std::size_t j = 0; j < row.target.size(); ++j)
    {
      out.target(r, static_cast<Eigen::Index>(j)) = row.target[j];
    }
    for (std::size_t j = 0; j < row.condition.size(); ++j)
    {
      out.condition(r, static_cast<Eigen::Index>(j)) = row.condition[j];
    }
  }
  return out;
}

std::vector<Cell> decode_target(DecoderOutput const &output, TransformBundle const &bundle,
                                SamplingPolicy policy, Rng &rng)
{
  if (output.values.size() != bundle.target_width)
  {
    fail(ErrorKind::contract, "decode_target: output width " + std::to_string(output.values.size()) +
                                  " does not match target layout width " +
                                  std::to_string(bundle.target_width));
  }
  std::size_t continuous_count = 0;
  for (auto const &slot : bundle.target_layout)
  {
    continuous_count += std::holds_alternative<ContinuousTransform>(bundle.transforms[slot.column]);
  }
  if (output.spreads.size() != continuous_count)
  {
    fail(ErrorKind::contract, "decode_target: expected " + std::to_string(continuous_count) +
                                  " spreads, got " + std::to_string(output.spreads.size()));
  }

  std::vector<Cell> row;
  std::size_t       spread_idx = 0;
  for (auto const &slot : bundle.target_layout)
  {
    std::span<double const> block(output.values.data() + slot.offset, slot.width);
    auto const             &t = bundle.transforms[slot.column];
    if (auto const *ct = std::get_if<ContinuousTransform>(&t))
    {
      double alpha  = block[0];
      auto   logits = block.subspan(1);
      double spread = output.spreads[spread_idx++];
      std::size_t mode = 0;
      if (policy == SamplingPolicy::stochastic)
      {
        alpha += spread * rng.normal();
        auto p = softmax(logits);
        mode   = rng.categorical(p);
      }
      else
      {
        mode = argmax(logits);
      }
      alpha = std::clamp(alpha, -1.0, 1.0);
      row.emplace_back(alpha * 4.0 * ct->mixture.stds[mode] + ct->mixture.means[mode]);
    }
    else
    {
      auto const &dt  = std::get<DiscreteTransform>(t);
      std::size_t idx = policy == SamplingPolicy::stochastic ? rng.categorical(softmax(block))
                                                             : argmax(block);
      row.emplace_back(dt.vocabulary[idx]);
    }
  }
  return row;
}

}  // namespace ctvae
