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

#include "ctvae/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ctvae {

// Model file layout (all integers little-endian):
//   "CTVM" | u32 format version | u32 CRC-32 of payload | u64 payload size | payload
// The payload holds the schema, per-column transforms, architecture,
// conditioning flag, flat parameter arrays in declaration order and the
// product catalog. Doubles are stored as their IEEE-754 bit patterns.
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(Model const &model);
Model                     deserialize_model(std::vector<std::uint8_t> const &bytes);

void  save_model(Model const &model, std::string const &path);
Model load_model(std::string const &path);

/// Stable identity derived from the serialized payload, e.g. "ctvm-1a2b3c4d".
std::string model_id(Model const &model);

}  // namespace ctvae
