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

#include <stdexcept>
#include <string>

namespace ctvae {

enum class ErrorKind
{
  argument,
  parse,
  validation,
  header,
  encoding,
  contract,
  numeric,
  training,
  io,
  corruption,
  version,
  not_found,
};

const char *to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so the C API and the
/// HTTP layer can map it onto status codes without parsing messages.
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, std::string const &message)
    : std::runtime_error(message)
    , kind_(kind)
  {}

  ErrorKind kind() const noexcept
  {
    return kind_;
  }

private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, std::string const &message);

}  // namespace ctvae
