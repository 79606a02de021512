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

#include "ctvae/gmm.hpp"
#include "ctvae/rng.hpp"
#include "ctvae/schema.hpp"

#include <Eigen/Dense>

#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ctvae {

// Mode-specific normalization: a continuous value v is written as the offset
// alpha = (v - mu_k) / (4 sigma_k), clamped to [-1, 1], plus a one-hot mode k.
struct ContinuousTransform
{
  GaussianMixture mixture;
  double          min = 0.0;  // observed training range
  double          max = 0.0;

  std::size_t encoded_width() const noexcept
  {
    return 1 + mixture.components();
  }

  bool operator==(ContinuousTransform const &) const = default;
};

struct DiscreteTransform
{
  std::vector<std::string> vocabulary;

  std::size_t encoded_width() const noexcept
  {
    return vocabulary.size();
  }
  std::optional<std::size_t> find(std::string const &value) const;

  bool operator==(DiscreteTransform const &) const = default;
};

using ColumnTransform = std::variant<ContinuousTransform, DiscreteTransform>;

std::size_t encoded_width(ColumnTransform const &t);

struct LayoutSlot
{
  std::size_t column = 0;  // schema index
  std::size_t offset = 0;
  std::size_t width  = 0;

  bool operator==(LayoutSlot const &) const = default;
};

struct TransformBundle
{
  Schema                       schema;      // vocabularies filled in
  std::vector<ColumnTransform> transforms;  // schema order
  std::vector<LayoutSlot>      target_layout;
  std::vector<LayoutSlot>      condition_layout;
  std::size_t                  target_width    = 0;
  std::size_t                  condition_width = 0;

  ContinuousTransform const &continuous(std::size_t column) const;
  DiscreteTransform const   &discrete(std::size_t column) const;

  bool operator==(TransformBundle const &) const = default;
};

/// Builds layouts from per-column transforms; used after fitting and loading.
TransformBundle make_bundle(Schema schema, std::vector<ColumnTransform> transforms);

struct BundleOptions
{
  std::size_t   max_modes = 10;
  std::uint64_t seed      = 0;
};

TransformBundle fit_bundle(Dataset const &data, BundleOptions const &options = {});

enum class ModeSelection
{
  sample,       // responsibility-proportional draw
  most_likely,  // argmax responsibility
};

double continuous_alpha(double value, double mean, double sd);

std::vector<double> encode_continuous(double value, ContinuousTransform const &t,
                                      ModeSelection selection, Rng *rng = nullptr);

/// Inverse transform using the argmax of `mode_selector` (one-hot or probabilities).
double decode_continuous(double alpha, std::span<double const> mode_selector,
                         ContinuousTransform const &t);

std::vector<double> encode_discrete(std::string const &value, DiscreteTransform const &t,
                                    std::string const &column = {});

struct EncodedRow
{
  std::vector<double> target;     // r_s
  std::vector<double> condition;  // r_c
};

/// Targets use responsibility sampling; conditions always use the most
/// likely mode so a given condition maps to one fixed r_c.
EncodedRow encode_row(Dataset const &data, std::size_t row, TransformBundle const &bundle, Rng &rng);

/// r_c for a complete mapping of condition column name to value.
std::vector<double> encode_condition(std::map<std::string, Cell> const &values,
                                     TransformBundle const &bundle);

struct EncodedTable
{
  Eigen::MatrixXd target;
  Eigen::MatrixXd condition;
};

/// Encodes every row; row i draws its modes from stream (seed, i).
EncodedTable encode_table(Dataset const &data, TransformBundle const &bundle, std::uint64_t seed);

enum class SamplingPolicy
{
  stochastic,
  deterministic,
};

/// Decoder parameters laid out like r_s: a continuous slot holds the alpha
/// mean followed by mode logits, a discrete slot holds category logits.
/// `spreads` has one entry per continuous target column, in layout order.
struct DecoderOutput
{
  std::vector<double> values;
  std::vector<double> spreads;
};

/// Realizes one target row (schema order of target columns).
std::vector<Cell> decode_target(DecoderOutput const &output, TransformBundle const &bundle,
                                SamplingPolicy policy, Rng &rng);

std::size_t argmax(std::span<double const> values);
std::vector<double> softmax(std::span<double const> logits);

}  // namespace ctvae
