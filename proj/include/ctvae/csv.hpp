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

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ctvae::csv {

struct Document
{
  std::vector<std::string>              header;
  std::vector<std::vector<std::string>> records;
};

// RFC-4180: comma separated, double-quote enclosed fields, "" escapes a quote,
// CRLF or LF record terminators. A trailing newline does not start a record.
Document parse(std::string_view text);
Document read_file(std::string const &path);

void write_record(std::ostream &out, std::vector<std::string> const &fields);

// Shortest decimal representation that parses back to the identical double.
std::string format_number(double value);

// Strict parse: whole field must be a finite real.
bool parse_number(std::string_view text, double &out);

std::string read_text_file(std::string const &path);
void        write_text_file(std::string const &path, std::string const &contents);

}  // namespace ctvae::csv
