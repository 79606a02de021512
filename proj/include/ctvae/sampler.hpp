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

#include "ctvae/model.hpp"
#include "ctvae/schema.hpp"
#include "ctvae/transform.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ctvae {

using CellMap = std::map<std::string, Cell>;

/// A base product's condition values with some of them replaced. Everything
/// not overridden keeps the base value ("others as in the base product").
struct ConditionSpec
{
  CellMap base;
  CellMap overrides;

  CellMap merged() const;
};

struct CompiledCondition
{
  ConditionSpec       spec;
  std::vector<double> encoded;  // r_c
};

/// Coerces a value to the representation required by `column`: reals for
/// continuous columns (numeric strings accepted), labels for discrete ones.
Cell coerce_cell(ColumnSpec const &column, Cell const &value);
Cell cell_from_json(ColumnSpec const &column, nlohmann::json const &value);
nlohmann::json cell_to_json(Cell const &cell);

/// Target columns named in `base` are ignored; unknown columns and overrides
/// of non-condition columns are argument errors; unseen categories are
/// encoding errors.
CompiledCondition build_condition(TransformBundle const &bundle, CellMap const &base,
                                  CellMap const &overrides = {});

struct Provenance
{
  std::string   model_id;
  ConditionSpec condition;
  std::uint64_t seed = 0;
  std::size_t   n    = 0;
};

struct SyntheticBatch
{
  Dataset    rows;  // target columns only
  Provenance provenance;
};

/// Draws n target rows from the decoder under a fixed condition. Row i uses
/// the generator stream (seed, i), so a larger n extends a smaller one.
SyntheticBatch generate(Model const &model, CompiledCondition const &condition, std::size_t n,
                        std::uint64_t seed, SamplingPolicy policy = SamplingPolicy::stochastic);

struct DistributionSummary
{
  std::string              column;
  ColumnKind               kind = ColumnKind::discrete;
  std::vector<std::string> labels;       // categories, or "[lo,hi)" bin labels
  std::vector<double>      frequencies;  // same length as labels
  std::vector<double>      edges;        // continuous only: bins + 1 entries
  std::vector<double>      values;       // continuous only: raw values

  bool operator==(DistributionSummary const &) const = default;
};

struct SummaryOptions
{
  std::size_t                             bins = 10;
  std::optional<std::pair<double, double>> range;       // default: observed range
  std::optional<std::vector<std::string>> categories;  // default: observed, sorted
};

DistributionSummary summarize(Dataset const &rows, std::string const &column,
                              SummaryOptions const &options = {});

/// Uses the model's vocabulary and training range so that summaries of
/// different batches share categories and bins.
SummaryOptions summary_options_for(TransformBundle const &bundle, std::string const &column,
                                   std::size_t bins = 10);

/// Summaries restricted to explicit edges: values outside clamp into the
/// first or last bin; the last bin is closed.
std::vector<double> bin_frequencies(std::vector<double> const &values, std::vector<double> const &edges);

struct SummaryDelta
{
  std::string              column;
  std::vector<std::string> labels;
  std::vector<double>      deltas;  // b - a
};

SummaryDelta compare(DistributionSummary const &a, DistributionSummary const &b);

nlohmann::json to_json(DistributionSummary const &s, bool include_values = false);
nlohmann::json to_json(SummaryDelta const &d);

}  // namespace ctvae
