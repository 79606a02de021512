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

#include "ctvae/sampler.hpp"
#include "ctvae/schema.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ctvae {

// Ground-truth generator for synthetic purchase corpora. Each product gets one
// value per condition column; each target column is drawn independently given
// at most one discrete "driver" condition, so every conditional distribution
// is known in closed form.

struct ConditionGenerator
{
  std::string         name;
  ColumnKind          kind = ColumnKind::discrete;
  std::vector<Cell>   values;  // assigned to products in balanced random order
};

struct MixtureComponent
{
  double mean = 0.0;
  double std  = 1.0;
};

struct TargetGenerator
{
  std::string                   name;
  ColumnKind                    kind = ColumnKind::discrete;
  std::string                   driver;  // empty: unconditional, keyed by "*"
  std::vector<std::string>      categories;  // discrete
  std::vector<MixtureComponent> components;  // continuous
  // driver value -> category probabilities (discrete) or component weights.
  std::map<std::string, std::vector<double>> probabilities;

  std::vector<double> const &distribution(CellMap const &conditions) const;
};

struct CorpusSpec
{
  std::string                     group_key        = "product_id";
  std::size_t                     products         = 30;
  std::size_t                     rows_per_product = 200;
  std::vector<ConditionGenerator> conditions;
  std::vector<TargetGenerator>    targets;
};

CorpusSpec     corpus_spec_from_json(nlohmann::json const &doc);
nlohmann::json to_json(CorpusSpec const &spec);
void           validate(CorpusSpec const &spec);

Schema corpus_schema(CorpusSpec const &spec);

struct Corpus
{
  Schema               schema;
  Dataset              data;
  std::vector<Product> products;
};

Corpus make_corpus(CorpusSpec const &spec, std::uint64_t seed);

/// Writes data.csv, schema.json, products.csv and truth.json into `dir`.
void make_synthetic_corpus(CorpusSpec const &spec, std::uint64_t seed, std::string const &dir);

/// Exact draws of the target columns under fixed condition values.
Dataset sample_truth(CorpusSpec const &spec, CellMap const &conditions, std::size_t n,
                     std::uint64_t seed);

/// A small flip-oracle spec: condition "g" flips a binary target between
/// 0.8/0.2 and 0.2/0.8 and shifts the mode weights of a bimodal target.
CorpusSpec flip_oracle_spec();

}  // namespace ctvae
