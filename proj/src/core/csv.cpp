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

#include "ctvae/csv.hpp"

#include "ctvae/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ctvae::csv {

Document parse(std::string_view text)
{
  Document                              doc;
  std::vector<std::vector<std::string>> records;
  std::vector<std::string>              record;
  std::string                           field;
  bool                                  in_quotes    = false;
  bool                                  field_quoted = false;
  bool                                  record_dirty = false;
  std::size_t                           line         = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    record_dirty = false;
  };

  // Skip a UTF-8 byte order mark.
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF")
  {
    text.remove_prefix(3);
  }

  for (std::size_t i = 0; i < text.size(); ++i)
  {
    char const c = text[i];
    if (in_quotes)
    {
      if (c == '"')
      {
        if (i + 1 < text.size() && text[i + 1] == '"')
        {
          field.push_back('"');
          ++i;
        }
        else
        {
          in_quotes = false;
        }
      }
      else
      {
        if (c == '\n')
        {
          ++line;
        }
        field.push_back(c);
      }
      continue;
    }

    switch (c)
    {
    case '"':
      if (!field.empty() || field_quoted)
      {
        fail(ErrorKind::parse, "csv: unexpected quote inside unquoted field on line " +
                                   std::to_string(line));
      }
      in_quotes    = true;
      field_quoted = true;
      record_dirty = true;
      break;
    case ',':
      end_field();
      record_dirty = true;
      break;
    case '\r':
      if (i + 1 < text.size() && text[i + 1] == '\n')
      {
        ++i;
      }
      [[fallthrough]];
    case '\n':
      end_record();
      ++line;
      break;
    default:
      if (field_quoted)
      {
        fail(ErrorKind::parse,
             "csv: characters after closing quote on line " + std::to_string(line));
      }
      field.push_back(c);
      record_dirty = true;
      break;
    }
  }
  if (in_quotes)
  {
    fail(ErrorKind::parse, "csv: unterminated quoted field");
  }
  if (record_dirty || !field.empty())
  {
    end_record();
  }

  if (records.empty())
  {
    fail(ErrorKind::header, "csv: missing header row");
  }
  doc.header = std::move(records.front());
  doc.records.assign(std::make_move_iterator(records.begin() + 1),
                     std::make_move_iterator(records.end()));
  return doc;
}

std::string read_text_file(std::string const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    fail(ErrorKind::io, "cannot open '" + path + "' for reading");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(std::string const &path, std::string const &contents)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
  {
    fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  }
  out << contents;
  if (!out)
  {
    fail(ErrorKind::io, "write to '" + path + "' failed");
  }
}

Document read_file(std::string const &path)
{
  return parse(read_text_file(path));
}

void write_record(std::ostream &out, std::vector<std::string> const &fields)
{
  for (std::size_t i = 0; i < fields.size(); ++i)
  {
    if (i != 0)
    {
      out << ',';
    }
    auto const &f = fields[i];
    if (f.find_first_of(",\"\r\n") == std::string::npos)
    {
      out << f;
      continue;
    }
    out << '"';
    for (char c : f)
    {
      if (c == '"')
      {
        out << '"';
      }
      out << c;
    }
    out << '"';
  }
  out << '\n';
}

std::string format_number(double value)
{
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

bool parse_number(std::string_view text, double &out)
{
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
  {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t'))
  {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+')
  {
    text.remove_prefix(1);
  }
  if (text.empty())
  {
    return false;
  }
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc{} && res.ptr == text.data() + text.size() && std::isfinite(out);
}

}  // namespace ctvae::csv
