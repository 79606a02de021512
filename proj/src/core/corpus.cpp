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

#include "ctvae/corpus.hpp"

#include "ctvae/csv.hpp"
#include "ctvae/error.hpp"
#include "ctvae/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

namespace ctvae {

namespace {

std::string key_of(Cell const &c)
{
  return cell_to_string(c);
}

ColumnKind parse_kind(std::string const &s, std::string const &where)
{
  if (s == "continuous")
  {
    return ColumnKind::continuous;
  }
  if (s == "discrete")
  {
    return ColumnKind::discrete;
  }
  fail(ErrorKind::validation, where + ": kind must be \"continuous\" or \"discrete\"");
}

}  // namespace

std::vector<double> const &TargetGenerator::distribution(CellMap const &conditions) const
{
  std::string key = "*";
  if (!driver.empty())
  {
    auto it = conditions.find(driver);
    if (it == conditions.end())
    {
      fail(ErrorKind::argument, "truth: driver '" + driver + "' has no value");
    }
    key = key_of(it->second);
  }
  auto it = probabilities.find(key);
  if (it == probabilities.end())
  {
    fail(ErrorKind::argument, "truth: target '" + name + "' has no distribution for '" + key + "'");
  }
  return it->second;
}

CorpusSpec corpus_spec_from_json(nlohmann::json const &doc)
{
  CorpusSpec spec;
  try
  {
    spec.group_key        = doc.value("group_key", spec.group_key);
    spec.products         = doc.at("products").get<std::size_t>();
    spec.rows_per_product = doc.at("rows_per_product").get<std::size_t>();
    for (auto const &c : doc.at("conditions"))
    {
      ConditionGenerator g;
      g.name = c.at("name").get<std::string>();
      g.kind = parse_kind(c.at("kind").get<std::string>(), "condition '" + g.name + "'");
      for (auto const &v : c.at("values"))
      {
        if (g.kind == ColumnKind::continuous)
        {
          g.values.emplace_back(v.get<double>());
        }
        else
        {
          g.values.emplace_back(v.is_string() ? v.get<std::string>() : v.dump());
        }
      }
      spec.conditions.push_back(std::move(g));
    }
    for (auto const &t : doc.at("targets"))
    {
      TargetGenerator g;
      g.name   = t.at("name").get<std::string>();
      g.kind   = parse_kind(t.at("kind").get<std::string>(), "target '" + g.name + "'");
      g.driver = t.value("driver", std::string{});
      if (g.kind == ColumnKind::discrete)
      {
        g.categories    = t.at("categories").get<std::vector<std::string>>();
        g.probabilities = t.at("probabilities").get<std::map<std::string, std::vector<double>>>();
      }
      else
      {
        for (auto const &comp : t.at("components"))
        {
          g.components.push_back({comp.at("mean").get<double>(), comp.at("std").get<double>()});
        }
        g.probabilities = t.at("weights").get<std::map<std::string, std::vector<double>>>();
      }
      spec.targets.push_back(std::move(g));
    }
  }
  catch (nlohmann::json::exception const &e)
  {
    fail(ErrorKind::validation, std::string("corpus spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

nlohmann::json to_json(CorpusSpec const &spec)
{
  nlohmann::json conds = nlohmann::json::array();
  for (auto const &c : spec.conditions)
  {
    nlohmann::json values = nlohmann::json::array();
    for (auto const &v : c.values)
    {
      values.push_back(cell_to_json(v));
    }
    conds.push_back({{"name", c.name}, {"kind", to_string(c.kind)}, {"values", std::move(values)}});
  }
  nlohmann::json targets = nlohmann::json::array();
  for (auto const &t : spec.targets)
  {
    nlohmann::json j = {{"name", t.name}, {"kind", to_string(t.kind)}};
    if (!t.driver.empty())
    {
      j["driver"] = t.driver;
    }
    if (t.kind == ColumnKind::discrete)
    {
      j["categories"]    = t.categories;
      j["probabilities"] = t.probabilities;
    }
    else
    {
      nlohmann::json comps = nlohmann::json::array();
      for (auto const &c : t.components)
      {
        comps.push_back({{"mean", c.mean}, {"std", c.std}});
      }
      j["components"] = std::move(comps);
      j["weights"]    = t.probabilities;
    }
    targets.push_back(std::move(j));
  }
  return {{"group_key", spec.group_key},
          {"products", spec.products},
          {"rows_per_product", spec.rows_per_product},
          {"conditions", std::move(conds)},
          {"targets", std::move(targets)}};
}

void validate(CorpusSpec const &spec)
{
  if (spec.products == 0 || spec.rows_per_product == 0)
  {
    fail(ErrorKind::validation, "corpus spec: products and rows_per_product must be positive");
  }
  if (spec.targets.empty())
  {
    fail(ErrorKind::validation, "corpus spec: no target columns");
  }
  std::set<std::string> names{spec.group_key};
  for (auto const &c : spec.conditions)
  {
    if (!names.insert(c.name).second)
    {
      fail(ErrorKind::validation, "corpus spec: duplicate column '" + c.name + "'");
    }
    if (c.values.empty())
    {
      fail(ErrorKind::validation, "corpus spec: condition '" + c.name + "' has no values");
    }
  }
  for (auto const &t : spec.targets)
  {
    if (!names.insert(t.name).second)
    {
      fail(ErrorKind::validation, "corpus spec: duplicate column '" + t.name + "'");
    }
    std::size_t const width = t.kind == ColumnKind::discrete ? t.categories.size() : t.components.size();
    if (width == 0)
    {
      fail(ErrorKind::validation, "corpus spec: target '" + t.name + "' has no categories/components");
    }
    for (auto const &c : t.components)
    {
      if (!(c.std > 0.0))
      {
        fail(ErrorKind::validation, "corpus spec: target '" + t.name + "' has a non-positive std");
      }
    }
    std::set<std::string> required{"*"};
    if (!t.driver.empty())
    {
      auto it = std::find_if(spec.conditions.begin(), spec.conditions.end(),
                             [&](ConditionGenerator const &c) { return c.name == t.driver; });
      if (it == spec.conditions.end() || it->kind != ColumnKind::discrete)
      {
        fail(ErrorKind::validation,
             "corpus spec: driver '" + t.driver + "' of '" + t.name + "' is not a discrete condition");
      }
      required.clear();
      for (auto const &v : it->values)
      {
        required.insert(key_of(v));
      }
    }
    for (auto const &key : required)
    {
      auto p = t.probabilities.find(key);
      if (p == t.probabilities.end())
      {
        fail(ErrorKind::validation, "corpus spec: target '" + t.name + "' lacks a distribution for '" + key + "'");
      }
      if (p->second.size() != width)
      {
        fail(ErrorKind::validation, "corpus spec: target '" + t.name + "' distribution for '" + key +
                                        "' has the wrong length");
      }
      double sum = 0.0;
      for (double x : p->second)
      {
        if (x < 0.0)
        {
          fail(ErrorKind::validation, "corpus spec: negative probability in '" + t.name + "'");
        }
        sum += x;
      }
      if (std::abs(sum - 1.0) > 1e-9)
      {
        fail(ErrorKind::validation, "corpus spec: probabilities of '" + t.name + "' for '" + key +
                                        "' do not sum to 1");
      }
    }
  }
}

Schema corpus_schema(CorpusSpec const &spec)
{
  Schema schema;
  schema.group_key = spec.group_key;
  for (auto const &c : spec.conditions)
  {
    schema.columns.push_back({c.name, c.kind, ColumnRole::condition, {}});
  }
  for (auto const &t : spec.targets)
  {
    schema.columns.push_back({t.name, t.kind, ColumnRole::target, {}});
  }
  return schema;
}

namespace {

Cell draw_target(TargetGenerator const &t, CellMap const &conditions, Rng &rng)
{
  auto const &dist = t.distribution(conditions);
  auto const  k    = rng.categorical(dist);
  if (t.kind == ColumnKind::discrete)
  {
    return t.categories[k];
  }
  return t.components[k].mean + t.components[k].std * rng.normal();
}

}  // namespace

Corpus make_corpus(CorpusSpec const &spec, std::uint64_t seed)
{
  validate(spec);
  Corpus out;
  out.schema = corpus_schema(spec);
  out.data   = Dataset(out.schema);

  int const digits = static_cast<int>(std::to_string(spec.products).size());
  for (std::size_t p = 0; p < spec.products; ++p)
  {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "P%0*zu", digits, p + 1);
    out.products.push_back(Product{buf, {}});
  }
  // Balanced assignment: cycle through the values, then shuffle.
  for (std::size_t c = 0; c < spec.conditions.size(); ++c)
  {
    auto const &gen = spec.conditions[c];
    std::vector<std::size_t> pick(spec.products);
    for (std::size_t p = 0; p < spec.products; ++p)
    {
      pick[p] = p % gen.values.size();
    }
    Rng rng(derive_seed(seed, {0xc0, c}));
    std::shuffle(pick.begin(), pick.end(), rng.engine());
    for (std::size_t p = 0; p < spec.products; ++p)
    {
      out.products[p].conditions.emplace(gen.name, gen.values[pick[p]]);
    }
  }

  std::vector<Cell> cells(out.schema.columns.size());
  for (std::size_t p = 0; p < spec.products; ++p)
  {
    auto const &prod = out.products[p];
    Rng         rng(derive_seed(seed, {0xda, p}));
    for (std::size_t r = 0; r < spec.rows_per_product; ++r)
    {
      std::size_t col = 0;
      for (auto const &c : spec.conditions)
      {
        cells[col++] = prod.conditions.at(c.name);
      }
      for (auto const &t : spec.targets)
      {
        cells[col++] = draw_target(t, prod.conditions, rng);
      }
      out.data.append(cells, prod.id);
    }
  }
  return out;
}

Dataset sample_truth(CorpusSpec const &spec, CellMap const &conditions, std::size_t n,
                     std::uint64_t seed)
{
  Dataset           out(corpus_schema(spec).restricted_to(ColumnRole::target));
  Rng               rng(seed);
  std::vector<Cell> cells(spec.targets.size());
  for (std::size_t i = 0; i < n; ++i)
  {
    for (std::size_t t = 0; t < spec.targets.size(); ++t)
    {
      cells[t] = draw_target(spec.targets[t], conditions, rng);
    }
    out.append(cells);
  }
  return out;
}

void make_synthetic_corpus(CorpusSpec const &spec, std::uint64_t seed, std::string const &dir)
{
  auto corpus = make_corpus(spec, seed);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
  {
    fail(ErrorKind::io, "cannot create directory '" + dir + "': " + ec.message());
  }
  auto const base = std::filesystem::path(dir);

  write_table(corpus.data, (base / "data.csv").string());
  csv::write_text_file((base / "schema.json").string(), to_json(corpus.schema).dump(2) + "\n");

  std::ostringstream       products;
  std::vector<std::string> fields{spec.group_key};
  for (auto const &c : spec.conditions)
  {
    fields.push_back(c.name);
  }
  csv::write_record(products, fields);
  nlohmann::json truth_products = nlohmann::json::array();
  for (auto const &p : corpus.products)
  {
    fields.assign(1, p.id);
    nlohmann::json conds = nlohmann::json::object();
    for (auto const &c : spec.conditions)
    {
      fields.push_back(cell_to_string(p.conditions.at(c.name)));
      conds[c.name] = cell_to_json(p.conditions.at(c.name));
    }
    csv::write_record(products, fields);
    truth_products.push_back({{"id", p.id}, {"conditions", std::move(conds)}});
  }
  csv::write_text_file((base / "products.csv").string(), products.str());

  nlohmann::json truth = {{"seed", seed}, {"spec", to_json(spec)}, {"products", std::move(truth_products)}};
  csv::write_text_file((base / "truth.json").string(), truth.dump(2) + "\n");
}

CorpusSpec flip_oracle_spec()
{
  CorpusSpec spec;
  spec.group_key        = "product_id";
  spec.products         = 30;
  spec.rows_per_product = 200;
  spec.conditions = {
      {"g", ColumnKind::discrete, {Cell{"0"}, Cell{"1"}}},
      {"container", ColumnKind::discrete, {Cell{"can"}, Cell{"plastic_bottle"}, Cell{"pouch"}}},
      {"volume", ColumnKind::continuous, {Cell{350.0}, Cell{500.0}}},
  };
  TargetGenerator children;
  children.name          = "children";
  children.kind          = ColumnKind::discrete;
  children.driver        = "g";
  children.categories    = {"with", "without"};
  children.probabilities = {{"0", {0.8, 0.2}}, {"1", {0.2, 0.8}}};

  TargetGenerator age;
  age.name          = "age";
  age.kind          = ColumnKind::continuous;
  age.driver        = "g";
  age.components    = {{30.0, 4.0}, {62.0, 5.0}};
  age.probabilities = {{"0", {0.75, 0.25}}, {"1", {0.25, 0.75}}};

  TargetGenerator season;
  season.name          = "season";
  season.kind          = ColumnKind::discrete;
  season.categories    = {"spring", "summer", "fall", "winter"};
  season.probabilities = {{"*", {0.2, 0.4, 0.25, 0.15}}};

  TargetGenerator purpose;
  purpose.name          = "purpose";
  purpose.kind          = ColumnKind::discrete;
  purpose.driver        = "container";
  purpose.categories    = {"self", "family"};
  purpose.probabilities = {{"can", {0.7, 0.3}}, {"plastic_bottle", {0.5, 0.5}}, {"pouch", {0.35, 0.65}}};

  spec.targets = {children, age, season, purpose};
  return spec;
}

}  // namespace ctvae
