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

#include "ctvae/schema.hpp"

#include "ctvae/csv.hpp"
#include "ctvae/error.hpp"
#include "ctvae/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace ctvae {

char const *to_string(ColumnKind kind) noexcept
{
  return kind == ColumnKind::continuous ? "continuous" : "discrete";
}

char const *to_string(ColumnRole role) noexcept
{
  return role == ColumnRole::target ? "target" : "condition";
}

std::optional<std::size_t> Schema::find(std::string const &name) const
{
  for (std::size_t i = 0; i < columns.size(); ++i)
  {
    if (columns[i].name == name)
    {
      return i;
    }
  }
  return std::nullopt;
}

std::size_t Schema::index_of(std::string const &name) const
{
  auto idx = find(name);
  if (!idx)
  {
    fail(ErrorKind::argument, "unknown column '" + name + "'");
  }
  return *idx;
}

std::vector<std::size_t> Schema::indices(ColumnRole role) const
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < columns.size(); ++i)
  {
    if (columns[i].role == role)
    {
      out.push_back(i);
    }
  }
  return out;
}

std::size_t Schema::count(ColumnRole role) const
{
  return static_cast<std::size_t>(std::count_if(
      columns.begin(), columns.end(), [role](ColumnSpec const &c) { return c.role == role; }));
}

Schema Schema::restricted_to(ColumnRole role) const
{
  Schema out;
  for (auto const &c : columns)
  {
    if (c.role == role)
    {
      out.columns.push_back(c);
    }
  }
  return out;
}

void validate(Schema const &schema)
{
  if (schema.columns.empty())
  {
    fail(ErrorKind::validation, "schema: column list is empty");
  }
  std::set<std::string> seen;
  for (auto const &c : schema.columns)
  {
    if (c.name.empty())
    {
      fail(ErrorKind::validation, "schema: column with empty name");
    }
    if (!seen.insert(c.name).second)
    {
      fail(ErrorKind::validation, "schema: duplicate column name '" + c.name + "'");
    }
    if (c.kind == ColumnKind::continuous && !c.vocabulary.empty())
    {
      fail(ErrorKind::validation, "schema: continuous column '" + c.name + "' has a vocabulary");
    }
    std::set<std::string> vocab(c.vocabulary.begin(), c.vocabulary.end());
    if (vocab.size() != c.vocabulary.size())
    {
      fail(ErrorKind::validation, "schema: vocabulary of '" + c.name + "' has duplicates");
    }
  }
  if (!schema.group_key.empty() && seen.count(schema.group_key) != 0)
  {
    fail(ErrorKind::validation,
         "schema: group_key '" + schema.group_key + "' must not also be a modelled column");
  }
}

namespace {

std::string require_string(nlohmann::json const &obj, char const *field, std::string const &where)
{
  auto it = obj.find(field);
  if (it == obj.end())
  {
    fail(ErrorKind::parse, where + ": missing field '" + field + "'");
  }
  if (!it->is_string())
  {
    fail(ErrorKind::parse, where + ": field '" + field + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

Schema schema_from_json(nlohmann::json const &doc)
{
  if (!doc.is_object())
  {
    fail(ErrorKind::parse, "schema: top level must be an object");
  }
  Schema schema;
  if (auto gk = doc.find("group_key"); gk != doc.end())
  {
    if (!gk->is_string())
    {
      fail(ErrorKind::parse, "schema: field 'group_key' must be a string");
    }
    schema.group_key = gk->get<std::string>();
  }
  auto cols = doc.find("columns");
  if (cols == doc.end() || !cols->is_array())
  {
    fail(ErrorKind::parse, "schema: field 'columns' must be an array");
  }
  std::size_t i = 0;
  for (auto const &entry : *cols)
  {
    std::string const where = "schema: columns[" + std::to_string(i++) + "]";
    if (!entry.is_object())
    {
      fail(ErrorKind::parse, where + ": entry must be an object");
    }
    ColumnSpec spec;
    spec.name        = require_string(entry, "name", where);
    auto const kind  = require_string(entry, "kind", where);
    auto const role  = require_string(entry, "role", where);
    if (kind == "continuous")
    {
      spec.kind = ColumnKind::continuous;
    }
    else if (kind == "discrete")
    {
      spec.kind = ColumnKind::discrete;
    }
    else
    {
      fail(ErrorKind::parse, where + ": field 'kind' must be \"continuous\" or \"discrete\"");
    }
    if (role == "target")
    {
      spec.role = ColumnRole::target;
    }
    else if (role == "condition")
    {
      spec.role = ColumnRole::condition;
    }
    else
    {
      fail(ErrorKind::parse, where + ": field 'role' must be \"target\" or \"condition\"");
    }
    if (auto v = entry.find("vocabulary"); v != entry.end())
    {
      if (!v->is_array())
      {
        fail(ErrorKind::parse, where + ": field 'vocabulary' must be an array");
      }
      for (auto const &cat : *v)
      {
        spec.vocabulary.push_back(cat.is_string() ? cat.get<std::string>() : cat.dump());
      }
    }
    schema.columns.push_back(std::move(spec));
  }
  validate(schema);
  return schema;
}

nlohmann::json to_json(Schema const &schema)
{
  nlohmann::json cols = nlohmann::json::array();
  for (auto const &c : schema.columns)
  {
    nlohmann::json entry = {{"name", c.name}, {"kind", to_string(c.kind)}, {"role", to_string(c.role)}};
    if (!c.vocabulary.empty())
    {
      entry["vocabulary"] = c.vocabulary;
    }
    cols.push_back(std::move(entry));
  }
  nlohmann::json doc = {{"columns", std::move(cols)}};
  if (!schema.group_key.empty())
  {
    doc["group_key"] = schema.group_key;
  }
  return doc;
}

Schema load_schema(std::string const &path)
{
  auto const text = csv::read_text_file(path);
  nlohmann::json doc;
  try
  {
    doc = nlohmann::json::parse(text);
  }
  catch (nlohmann::json::parse_error const &e)
  {
    fail(ErrorKind::parse, "schema '" + path + "': " + e.what());
  }
  return schema_from_json(doc);
}

std::string cell_to_string(Cell const &cell)
{
  if (auto const *d = std::get_if<double>(&cell))
  {
    return csv::format_number(*d);
  }
  return std::get<std::string>(cell);
}

Dataset::Dataset(Schema schema)
  : schema_(std::move(schema))
  , data_(schema_.columns.size())
{}

std::vector<double> const &Dataset::numbers(std::size_t column) const
{
  if (schema_.columns.at(column).kind != ColumnKind::continuous)
  {
    fail(ErrorKind::contract, "column '" + schema_.columns[column].name + "' is not continuous");
  }
  return data_[column].numbers;
}

std::vector<std::string> const &Dataset::labels(std::size_t column) const
{
  if (schema_.columns.at(column).kind != ColumnKind::discrete)
  {
    fail(ErrorKind::contract, "column '" + schema_.columns[column].name + "' is not discrete");
  }
  return data_[column].labels;
}

Cell Dataset::cell(std::size_t row, std::size_t column) const
{
  if (schema_.columns.at(column).kind == ColumnKind::continuous)
  {
    return data_[column].numbers.at(row);
  }
  return data_[column].labels.at(row);
}

Cell Dataset::cell(std::size_t row, std::string const &column) const
{
  return cell(row, schema_.index_of(column));
}

void Dataset::append(std::vector<Cell> const &cells, std::string group)
{
  if (cells.size() != schema_.columns.size())
  {
    fail(ErrorKind::contract, "row has " + std::to_string(cells.size()) + " cells, schema has " +
                                  std::to_string(schema_.columns.size()) + " columns");
  }
  for (std::size_t c = 0; c < cells.size(); ++c)
  {
    auto const &spec = schema_.columns[c];
    if (spec.kind == ColumnKind::continuous)
    {
      auto const *d = std::get_if<double>(&cells[c]);
      if (d == nullptr || !std::isfinite(*d))
      {
        fail(ErrorKind::contract, "column '" + spec.name + "' expects a finite real");
      }
    }
    else if (!std::holds_alternative<std::string>(cells[c]))
    {
      fail(ErrorKind::contract, "column '" + spec.name + "' expects a category label");
    }
  }
  for (std::size_t c = 0; c < cells.size(); ++c)
  {
    if (schema_.columns[c].kind == ColumnKind::continuous)
    {
      data_[c].numbers.push_back(std::get<double>(cells[c]));
    }
    else
    {
      data_[c].labels.push_back(std::get<std::string>(cells[c]));
    }
  }
  if (has_groups())
  {
    groups_.push_back(std::move(group));
  }
  ++rows_;
}

Dataset Dataset::select(std::span<std::size_t const> rows) const
{
  Dataset out(schema_);
  for (std::size_t c = 0; c < data_.size(); ++c)
  {
    auto const &src = data_[c];
    auto       &dst = out.data_[c];
    if (schema_.columns[c].kind == ColumnKind::continuous)
    {
      dst.numbers.reserve(rows.size());
      for (auto r : rows)
      {
        dst.numbers.push_back(src.numbers.at(r));
      }
    }
    else
    {
      dst.labels.reserve(rows.size());
      for (auto r : rows)
      {
        dst.labels.push_back(src.labels.at(r));
      }
    }
  }
  if (has_groups())
  {
    for (auto r : rows)
    {
      out.groups_.push_back(groups_.at(r));
    }
  }
  out.rows_ = rows.size();
  return out;
}

std::vector<std::string> Dataset::distinct_groups() const
{
  std::vector<std::string>    out;
  std::set<std::string_view>  seen;
  for (auto const &g : groups_)
  {
    if (seen.insert(g).second)
    {
      out.push_back(g);
    }
  }
  return out;
}

std::vector<std::size_t> Dataset::rows_of(std::string const &group) const
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < groups_.size(); ++i)
  {
    if (groups_[i] == group)
    {
      out.push_back(i);
    }
  }
  return out;
}

Dataset parse_table(std::string const &text, Schema const &schema, IngestOptions options)
{
  auto doc = csv::parse(text);

  std::unordered_map<std::string, std::size_t> header_pos;
  for (std::size_t i = 0; i < doc.header.size(); ++i)
  {
    if (!header_pos.emplace(doc.header[i], i).second)
    {
      fail(ErrorKind::header, "duplicate header column '" + doc.header[i] + "'");
    }
  }

  std::vector<std::size_t> source(schema.columns.size());
  for (std::size_t c = 0; c < schema.columns.size(); ++c)
  {
    auto it = header_pos.find(schema.columns[c].name);
    if (it == header_pos.end())
    {
      fail(ErrorKind::header, "missing column '" + schema.columns[c].name + "'");
    }
    source[c] = it->second;
  }

  Schema effective = schema;
  std::optional<std::size_t> group_pos;
  if (!schema.group_key.empty())
  {
    auto it = header_pos.find(schema.group_key);
    if (it != header_pos.end())
    {
      group_pos = it->second;
    }
    else if (options.lenient_header)
    {
      effective.group_key.clear();
    }
    else
    {
      fail(ErrorKind::header, "missing group key column '" + schema.group_key + "'");
    }
  }

  if (!options.lenient_header)
  {
    for (auto const &name : doc.header)
    {
      if (name != schema.group_key && !schema.find(name))
      {
        fail(ErrorKind::header, "unknown column '" + name + "'");
      }
    }
  }

  Dataset           out(effective);
  std::vector<Cell> cells(schema.columns.size());
  for (std::size_t r = 0; r < doc.records.size(); ++r)
  {
    auto const &rec = doc.records[r];
    // Data rows are numbered from 1; the header is row 0.
    std::string const row_tag = "row " + std::to_string(r + 1);
    if (rec.size() != doc.header.size())
    {
      fail(ErrorKind::parse, row_tag + ": expected " + std::to_string(doc.header.size()) +
                                 " fields, found " + std::to_string(rec.size()));
    }
    for (std::size_t c = 0; c < schema.columns.size(); ++c)
    {
      auto const &spec = schema.columns[c];
      auto const &raw  = rec[source[c]];
      if (raw.empty())
      {
        fail(ErrorKind::parse, row_tag + ": missing value in column '" + spec.name + "'");
      }
      if (spec.kind == ColumnKind::continuous)
      {
        double v = 0.0;
        if (!csv::parse_number(raw, v))
        {
          fail(ErrorKind::parse, row_tag + ": column '" + spec.name +
                                     "' expects a finite real, got '" + raw + "'");
        }
        cells[c] = v;
      }
      else
      {
        cells[c] = raw;
      }
    }
    std::string group;
    if (group_pos)
    {
      group = rec[*group_pos];
      if (group.empty())
      {
        fail(ErrorKind::parse, row_tag + ": missing value in column '" + schema.group_key + "'");
      }
    }
    out.append(cells, std::move(group));
  }
  return out;
}

Dataset ingest_table(std::string const &path, Schema const &schema, IngestOptions options)
{
  try
  {
    return parse_table(csv::read_text_file(path), schema, options);
  }
  catch (Error const &e)
  {
    if (e.kind() == ErrorKind::io)
    {
      throw;
    }
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::string format_table(Dataset const &data)
{
  std::ostringstream       out;
  std::vector<std::string> fields;
  auto const              &schema = data.schema();
  if (data.has_groups())
  {
    fields.push_back(schema.group_key);
  }
  for (auto const &c : schema.columns)
  {
    fields.push_back(c.name);
  }
  csv::write_record(out, fields);
  for (std::size_t r = 0; r < data.rows(); ++r)
  {
    fields.clear();
    if (data.has_groups())
    {
      fields.push_back(data.groups()[r]);
    }
    for (std::size_t c = 0; c < data.columns(); ++c)
    {
      fields.push_back(cell_to_string(data.cell(r, c)));
    }
    csv::write_record(out, fields);
  }
  return out.str();
}

void write_table(Dataset const &data, std::string const &path)
{
  csv::write_text_file(path, format_table(data));
}

SplitResult split_by_group(Dataset const &data, std::size_t test_group_count, std::uint64_t seed)
{
  if (!data.has_groups())
  {
    fail(ErrorKind::argument, "split_by_group: dataset has no group key");
  }
  auto groups = data.distinct_groups();
  std::sort(groups.begin(), groups.end());
  if (test_group_count == 0 || test_group_count >= groups.size())
  {
    fail(ErrorKind::argument, "split_by_group: test group count " +
                                  std::to_string(test_group_count) + " must be in [1, " +
                                  std::to_string(groups.size()) + ")");
  }

  Rng rng(derive_seed(seed, {0x5011ULL}));
  std::shuffle(groups.begin(), groups.end(), rng.engine());
  std::set<std::string> test_groups(groups.begin(), groups.begin() + static_cast<std::ptrdiff_t>(test_group_count));

  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  auto const              &row_groups = data.groups();
  for (std::size_t r = 0; r < data.rows(); ++r)
  {
    (test_groups.count(row_groups[r]) != 0 ? test_rows : train_rows).push_back(r);
  }
  return SplitResult{data.select(train_rows), data.select(test_rows), seed};
}

std::pair<Dataset, Dataset> validation_split(Dataset const &train, double fraction,
                                             std::uint64_t seed)
{
  if (!(fraction > 0.0 && fraction < 1.0))
  {
    fail(ErrorKind::argument, "validation_split: fraction must lie in (0, 1)");
  }
  auto const n = train.rows();
  if (n < 2)
  {
    fail(ErrorKind::argument, "validation_split: need at least 2 rows");
  }
  auto const n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n_val == 0 || n_val == n)
  {
    fail(ErrorKind::argument, "validation_split: fraction " + csv::format_number(fraction) +
                                  " of " + std::to_string(n) + " rows leaves an empty side");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, {0x7a11ULL}));
  std::shuffle(order.begin(), order.end(), rng.engine());

  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> fit(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(val.begin(), val.end());
  std::sort(fit.begin(), fit.end());
  return {train.select(fit), train.select(val)};
}

}  // namespace ctvae
