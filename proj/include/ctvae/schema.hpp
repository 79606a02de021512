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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace ctvae {

enum class ColumnKind
{
  continuous,
  discrete
};

enum class ColumnRole
{
  target,
  condition
};

char const *to_string(ColumnKind kind) noexcept;
char const *to_string(ColumnRole role) noexcept;

struct ColumnSpec
{
  std::string              name;
  ColumnKind               kind = ColumnKind::continuous;
  ColumnRole               role = ColumnRole::target;
  std::vector<std::string> vocabulary;  // discrete only; may be empty until fitted

  bool operator==(ColumnSpec const &) const = default;
};

/// Ordered column list plus the identifier column that names the product of
/// each row. The group key column is not modelled; it only drives splits.
struct Schema
{
  std::vector<ColumnSpec> columns;
  std::string             group_key;

  std::optional<std::size_t> find(std::string const &name) const;
  std::size_t                index_of(std::string const &name) const;

  std::vector<std::size_t> indices(ColumnRole role) const;
  std::size_t              count(ColumnRole role) const;

  /// Schema restricted to one role, without a group key.
  Schema restricted_to(ColumnRole role) const;

  bool operator==(Schema const &) const = default;
};

void   validate(Schema const &schema);
Schema schema_from_json(nlohmann::json const &doc);
nlohmann::json to_json(Schema const &schema);
Schema load_schema(std::string const &path);

using Cell = std::variant<double, std::string>;

std::string cell_to_string(Cell const &cell);

/// Column-major table. Continuous columns store doubles, discrete columns
/// store labels; the other vector of a column is always empty.
class Dataset
{
public:
  Dataset() = default;
  explicit Dataset(Schema schema);

  Schema const &schema() const noexcept
  {
    return schema_;
  }
  std::size_t rows() const noexcept
  {
    return rows_;
  }
  std::size_t columns() const noexcept
  {
    return schema_.columns.size();
  }
  bool has_groups() const noexcept
  {
    return !schema_.group_key.empty();
  }

  std::vector<double> const      &numbers(std::size_t column) const;
  std::vector<std::string> const &labels(std::size_t column) const;
  std::vector<std::string> const &groups() const noexcept
  {
    return groups_;
  }

  Cell cell(std::size_t row, std::size_t column) const;
  Cell cell(std::size_t row, std::string const &column) const;

  /// Appends one record; `cells` follows schema order. `group` is ignored when
  /// the schema has no group key.
  void append(std::vector<Cell> const &cells, std::string group = {});

  Dataset select(std::span<std::size_t const> rows) const;

  /// Distinct group identifiers in order of first appearance.
  std::vector<std::string> distinct_groups() const;

  /// Row indices of every row belonging to `group`.
  std::vector<std::size_t> rows_of(std::string const &group) const;

private:
  struct ColumnData
  {
    std::vector<double>      numbers;
    std::vector<std::string> labels;
  };

  Schema                   schema_;
  std::vector<ColumnData>  data_;
  std::vector<std::string> groups_;
  std::size_t              rows_ = 0;
};

struct IngestOptions
{
  // When set, header columns not named by the schema are skipped instead of
  // rejected, and a missing group key column is tolerated.
  bool lenient_header = false;
};

Dataset ingest_table(std::string const &path, Schema const &schema, IngestOptions options = {});
Dataset parse_table(std::string const &text, Schema const &schema, IngestOptions options = {});
void    write_table(Dataset const &data, std::string const &path);
std::string format_table(Dataset const &data);

struct SplitResult
{
  Dataset       train;
  Dataset       test;
  std::uint64_t seed = 0;
};

SplitResult split_by_group(Dataset const &data, std::size_t test_group_count, std::uint64_t seed);

std::pair<Dataset, Dataset> validation_split(Dataset const &train, double fraction,
                                             std::uint64_t seed);

}  // namespace ctvae
