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

#include "doctest.h"
#include "fixtures.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

using namespace ctvae;
using namespace ctvae::testing;

namespace {

ErrorKind error_kind(auto &&fn)
{
  try
  {
    fn();
  }
  catch (Error const &e)
  {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::argument;
}

}  // namespace

TEST_CASE("spec validation")
{
  auto spec = flip_oracle_spec();
  CHECK_NOTHROW(validate(spec));

  auto zero             = spec;
  zero.rows_per_product = 0;
  CHECK(error_kind([&] { make_corpus(zero, 1); }) == ErrorKind::validation);

  auto no_targets = spec;
  no_targets.targets.clear();
  CHECK(error_kind([&] { validate(no_targets); }) == ErrorKind::validation);

  auto dup                  = spec;
  dup.targets.front().name  = "g";
  CHECK(error_kind([&] { validate(dup); }) == ErrorKind::validation);

  auto bad_probs = spec;
  bad_probs.targets.front().probabilities["0"] = {0.9, 0.3};
  CHECK(error_kind([&] { validate(bad_probs); }) == ErrorKind::validation);

  auto missing_driver_value = spec;
  missing_driver_value.targets.front().probabilities.erase("1");
  CHECK(error_kind([&] { validate(missing_driver_value); }) == ErrorKind::validation);

  CHECK(error_kind([] { corpus_spec_from_json(nlohmann::json{{"products", "many"}}); }) ==
        ErrorKind::validation);
}

TEST_CASE("spec json round trip")
{
  auto const spec = flip_oracle_spec();
  auto const back = corpus_spec_from_json(to_json(spec));
  CHECK(to_json(back) == to_json(spec));
}

TEST_CASE("corpus shape and determinism")
{
  auto const spec = flip_oracle_spec();
  auto const a    = make_corpus(spec, 7);
  auto const b    = make_corpus(spec, 7);
  auto const c    = make_corpus(spec, 8);
  CHECK(a.data.rows() == spec.products * spec.rows_per_product);
  CHECK(a.products.size() == spec.products);
  CHECK(a.data.distinct_groups().size() == spec.products);
  CHECK(format_table(a.data) == format_table(b.data));
  CHECK(format_table(a.data) != format_table(c.data));
  CHECK(a.schema.count(ColumnRole::target) == spec.targets.size());
  CHECK(a.schema.group_key == "product_id");

  // Balanced assignment of condition values.
  std::map<std::string, std::size_t> g_counts;
  for (auto const &p : a.products)
  {
    g_counts[cell_to_string(p.conditions.at("g"))]++;
  }
  CHECK(g_counts["0"] == spec.products / 2);
  CHECK(g_counts["1"] == spec.products / 2);

  // Every row of a product carries that product's conditions.
  for (auto const &p : a.products)
  {
    for (auto r : a.data.rows_of(p.id))
    {
      for (auto const &[name, value] : p.conditions)
      {
        CHECK(a.data.cell(r, name) == value);
      }
    }
  }
}

TEST_CASE("ground-truth draws follow the spec")
{
  auto const  spec = flip_oracle_spec();
  CellMap     cond{{"g", Cell{"0"}}, {"container", Cell{"can"}}, {"volume", Cell{350.0}}};
  auto const  rows = sample_truth(spec, cond, 40000, 3);
  auto const &kids = rows.labels(*rows.schema().find("children"));
  double      with = 0;
  for (auto const &k : kids)
  {
    with += k == "with" ? 1 : 0;
  }
  // Binomial SE at n = 40000 is 0.002.
  CHECK(std::abs(with / 40000.0 - 0.8) < 0.01);

  auto const &age = rows.numbers(*rows.schema().find("age"));
  double      mean = 0;
  for (double v : age)
  {
    mean += v;
  }
  mean /= static_cast<double>(age.size());
  CHECK(std::abs(mean - (0.75 * 30 + 0.25 * 62)) < 0.3);

  cond["g"]         = Cell{"1"};
  auto const flip   = sample_truth(spec, cond, 40000, 3);
  auto const &fkids = flip.labels(*flip.schema().find("children"));
  CHECK(std::abs(std::count(fkids.begin(), fkids.end(), "with") / 40000.0 - 0.2) < 0.01);

  CHECK_THROWS_AS(sample_truth(spec, CellMap{}, 1, 1), Error);
}

TEST_CASE("corpus files")
{
  auto const dir  = scratch_dir("corpus");
  auto const spec = tiny_flip_spec(6, 10);
  make_synthetic_corpus(spec, 4, (dir / "out").string());
  for (auto const *f : {"data.csv", "schema.json", "products.csv", "truth.json"})
  {
    CHECK(std::filesystem::exists(dir / "out" / f));
  }
  auto const schema = load_schema((dir / "out" / "schema.json").string());
  auto const data   = ingest_table((dir / "out" / "data.csv").string(), schema);
  auto const direct = make_corpus(spec, 4);
  CHECK(format_table(data) == format_table(direct.data));

  std::ifstream  in(dir / "out" / "truth.json");
  nlohmann::json truth = nlohmann::json::parse(in);
  CHECK(truth["seed"] == 4);
  CHECK(truth["products"].size() == 6);
  CHECK(corpus_spec_from_json(truth["spec"]).products == 6);

  auto const products = csv::read_file((dir / "out" / "products.csv").string());
  CHECK(products.header.front() == "product_id");
  CHECK(products.records.size() == 6);
}
