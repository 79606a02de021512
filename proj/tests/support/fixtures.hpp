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

#include "ctvae/corpus.hpp"
#include "ctvae/schema.hpp"
#include "ctvae/train.hpp"

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>

namespace ctvae::testing {

inline ColumnSpec column(std::string name, ColumnKind kind, ColumnRole role)
{
  return ColumnSpec{std::move(name), kind, role, {}};
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(std::string const &name)
{
  auto dir = std::filesystem::temp_directory_path() / ("ctvae-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Small flip corpus: few products and rows so models train in seconds.
inline CorpusSpec tiny_flip_spec(std::size_t products = 8, std::size_t rows = 40)
{
  auto spec             = flip_oracle_spec();
  spec.products         = products;
  spec.rows_per_product = rows;
  return spec;
}

inline TrainConfig quick_config(std::size_t epochs = 3)
{
  TrainConfig cfg;
  cfg.arch       = ArchitectureSpec{8, 6, 3, 6, 8};
  cfg.max_epochs = epochs;
  cfg.batch_size = 64;
  cfg.max_modes  = 2;
  cfg.seed       = 11;
  return cfg;
}

inline TrainResult train_tiny(std::uint64_t corpus_seed = 5, std::size_t epochs = 3)
{
  auto corpus = make_corpus(tiny_flip_spec(), corpus_seed);
  return train(corpus.data, quick_config(epochs));
}

}  // namespace ctvae::testing
