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
#include "ctvae/schema.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace ctvae {

struct TrainConfig
{
  std::size_t      batch_size          = 500;
  std::size_t      max_epochs          = 300;
  std::size_t      patience            = 10;
  double           learning_rate       = 1e-3;
  std::uint64_t    seed                = 0;
  ArchitectureSpec arch                = ArchitectureSpec::preset(256);
  double           validation_fraction = 0.1;
  bool             conditioning        = true;
  std::size_t      max_modes           = 10;
};

void           validate(TrainConfig const &cfg);
nlohmann::json to_json(TrainConfig const &cfg);
/// Fields absent from `doc` keep the values already in `base`. "arch" may be
/// a preset number or an object with the five layer sizes.
TrainConfig    train_config_from_json(nlohmann::json const &doc, TrainConfig base = {});

struct EpochRecord
{
  std::size_t epoch           = 0;  // 1-based
  double      train_loss      = 0.0;
  double      validation_loss = 0.0;

  bool operator==(EpochRecord const &) const = default;
};

struct TrainHistory
{
  std::vector<EpochRecord> epochs;
  std::size_t              best_epoch = 0;

  bool operator==(TrainHistory const &) const = default;
};

nlohmann::json to_json(TrainHistory const &history);

/// Tracks the best validation loss and signals a stop once `patience`
/// consecutive epochs fail to improve on it.
class EarlyStopping
{
public:
  explicit EarlyStopping(std::size_t patience);

  /// Returns true when the reported epoch is a new best.
  bool observe(std::size_t epoch, double validation_loss);

  bool should_stop() const noexcept
  {
    return since_best_ >= patience_;
  }
  std::size_t best_epoch() const noexcept
  {
    return best_epoch_;
  }
  double best_loss() const noexcept
  {
    return best_loss_;
  }

private:
  std::size_t patience_;
  std::size_t best_epoch_ = 0;
  double      best_loss_;
  std::size_t since_best_ = 0;
};

struct TrainResult
{
  Model        model;
  TrainHistory history;
};

using EpochCallback = std::function<void(EpochRecord const &)>;

/// Fits the transform bundle on `data`, holds out a validation fraction and
/// trains by mini-batch Adam, returning the best-validation snapshot.
TrainResult train(Dataset const &data, TrainConfig const &cfg, EpochCallback const &on_epoch = {});

/// Condition values of each distinct group, taken from its first row.
std::vector<Product> product_catalog(Dataset const &data);

}  // namespace ctvae
