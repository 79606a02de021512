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

#include "ctvae/grad.hpp"

#include <cstdint>
#include <vector>

namespace ctvae::grad {

struct AdamConfig
{
  double learning_rate = 1e-3;
  double beta1         = 0.9;
  double beta2         = 0.999;
  double epsilon       = 1e-8;
};

/// Adaptive-moment optimizer with bias correction.
///
/// step() updates `params` and the moment state in place; the gradient
/// argument is never modified. Gradients are validated before anything is
/// written, so a rejected step leaves parameters and state untouched.
class Adam
{
public:
  Adam(ParameterSet const &params, AdamConfig config = {});

  void step(ParameterSet &params, Gradients const &grads);

  std::uint64_t steps() const noexcept
  {
    return step_;
  }
  AdamConfig const &config() const noexcept
  {
    return config_;
  }
  std::vector<Matrix> const &first_moments() const noexcept
  {
    return m_;
  }
  std::vector<Matrix> const &second_moments() const noexcept
  {
    return v_;
  }

private:
  AdamConfig          config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::uint64_t       step_ = 0;
};

}  // namespace ctvae::grad
