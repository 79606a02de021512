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

#include "ctvae/metrics.hpp"
#include "ctvae/sampler.hpp"
#include "ctvae/schema.hpp"
#include "ctvae/train.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ctvae {

/// Product-level holdout protocol: split by product, fit on training
/// products, generate for every held-out product under its own condition
/// values and score against that product's purchase rows.
struct ExperimentConfig
{
  std::string      data_path;
  std::string      schema_path;
  std::string      output_dir;
  std::size_t      test_groups         = 3;
  std::size_t      samples_per_product = 2000;
  std::vector<int> presets             = {64};
  bool             baseline            = true;  // also run the unconditional model
  std::uint64_t    split_seed          = 1;
  std::uint64_t    train_seed          = 2;
  std::uint64_t    sample_seed         = 3;
  std::size_t      summary_bins        = 10;
  TrainConfig      train;  // arch and conditioning are set per run
};

void             validate(ExperimentConfig const &cfg);
nlohmann::json   to_json(ExperimentConfig const &cfg);
/// Relative paths in `doc` resolve against `base_dir`.
ExperimentConfig experiment_config_from_json(nlohmann::json const &doc, std::string const &base_dir = {});
ExperimentConfig load_experiment_config(std::string const &path);

struct HistogramPair
{
  std::string         column;
  DistributionSummary observed;
  DistributionSummary synthetic;

  bool operator==(HistogramPair const &) const = default;
};

struct ProductRun
{
  ProductScore               score;
  std::vector<HistogramPair> histograms;

  bool operator==(ProductRun const &) const = default;
};

struct RunEntry
{
  std::string             model;  // "ctvae" or "tvae"
  int                     preset = 0;
  AggregateScore          aggregate;
  std::vector<ProductRun> products;
  TrainHistory            history;

  bool operator==(RunEntry const &) const = default;
};

struct ExperimentReport
{
  nlohmann::json           config;
  std::string              code_version;
  std::vector<std::string> train_products;
  std::vector<std::string> test_products;
  std::vector<RunEntry>    runs;  // ordered by (preset, model)

  RunEntry const *find(std::string const &model, int preset) const;
};

nlohmann::json to_json(ExperimentReport const &report);

using StageCallback = std::function<void(std::string const &stage)>;

ExperimentReport run_holdout(ExperimentConfig const &cfg, Dataset const &data,
                             StageCallback const &on_stage = {});
ExperimentReport run_holdout(ExperimentConfig const &cfg, StageCallback const &on_stage = {});

struct SweepRow
{
  int                           preset = 0;
  AggregateScore                ctvae;
  std::optional<AggregateScore> tvae;
};

struct SweepResult
{
  ExperimentReport      report;
  std::vector<SweepRow> table;
};

std::vector<SweepRow> sweep_table(ExperimentReport const &report);

SweepResult dimension_sweep(ExperimentConfig cfg, std::vector<int> const &presets, Dataset const &data,
                            StageCallback const &on_stage = {});
SweepResult dimension_sweep(ExperimentConfig cfg, std::vector<int> const &presets,
                            StageCallback const &on_stage = {});

/// Writes report.json, aggregate.csv, aggregate.json, product_scores.csv and
/// histograms/<model>-<preset>-<product>.json. Returns the written paths.
std::vector<std::string> emit_report(ExperimentReport const &report, std::string const &dir);

}  // namespace ctvae
