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

#include "ctvae/error.hpp"

namespace ctvae {

const char *to_string(ErrorKind kind) noexcept
{
  switch (kind)
  {
  case ErrorKind::argument:
    return "argument error";
  case ErrorKind::parse:
    return "parse error";
  case ErrorKind::validation:
    return "validation error";
  case ErrorKind::header:
    return "header error";
  case ErrorKind::encoding:
    return "encoding error";
  case ErrorKind::contract:
    return "contract error";
  case ErrorKind::numeric:
    return "numeric error";
  case ErrorKind::training:
    return "training error";
  case ErrorKind::io:
    return "I/O error";
  case ErrorKind::corruption:
    return "corruption error";
  case ErrorKind::version:
    return "version error";
  case ErrorKind::not_found:
    return "not found";
  }
  return "error";
}

void fail(ErrorKind kind, std::string const &message)
{
  throw Error(kind, message);
}

}  // namespace ctvae
