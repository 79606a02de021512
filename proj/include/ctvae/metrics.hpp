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

#include "ctvae/schema.hpp"

#include "json.hpp"

#include <span>
#include <string>
#include <vector>

namespace ctvae {

/// 1 - sup_t |F_real(t) - F_synth(t)| over right-continuous empirical CDFs,
/// evaluated exactly at every sample point.
double ks_complement(std::span<double const> real, std::span<double const> synth);

/// 1 - total variation distance between normalized histograms over the union
/// of observed categories.
double tv_complement(std::span<std::string const> real, std::span<std::string const> synth);

struct ColumnScore
{
  std::string name;
  ColumnKind  kind  = ColumnKind::discrete;
  double      score = 0.0;

  bool operator==(ColumnScore const &) const = default;
};

struct ProductScore
{
  std::string              product;
  std::vector<ColumnScore> columns;
  double                   mc             = 0.0;
  std::size_t              purchase_count = 0;

  bool operator==(ProductScore const &) const = default;
};

/// Mean of per-target-column KS/TV complements. Columns are matched by name;
/// both tables must carry every target column of `schema` with the same kind.
ProductScore mean_complement(Dataset const &real, Dataset const &synth, Schema const &schema,
                             std::string product = {});

struct AggregateScore
{
  double average_mc          = 0.0;
  double weighted_average_mc = 0.0;

  bool operator==(AggregateScore const &) const = default;
};

/// Unweighted mean of MC_p and the purchase-count-weighted mean across products.
AggregateScore aggregate(std::span<ProductScore const> scores);

nlohmann::json to_json(ProductScore const &score);
nlohmann::json to_json(AggregateScore const &score);

}  // namespace ctvae
