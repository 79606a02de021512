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

#include "ctvae/optimizer.hpp"

#include "ctvae/error.hpp"

#include <cmath>

namespace ctvae::grad {

Adam::Adam(ParameterSet const &params, AdamConfig config)
  : config_(config)
{
  for (auto const &p : params)
  {
    m_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
  }
}

void Adam::step(ParameterSet &params, Gradients const &grads)
{
  if (grads.size() != params.size() || m_.size() != params.size())
  {
    fail(ErrorKind::contract, "adam: gradient count does not match parameter count");
  }
  for (std::size_t i = 0; i < params.size(); ++i)
  {
    auto const &p = params[i].value;
    if (grads[i].rows() != p.rows() || grads[i].cols() != p.cols())
    {
      fail(ErrorKind::contract, "adam: gradient shape mismatch for '" + params[i].name + "'");
    }
    if (!grads[i].allFinite())
    {
      fail(ErrorKind::training, "adam: non-finite gradient for parameter '" + params[i].name + "'");
    }
  }

  ++step_;
  double const t   = static_cast<double>(step_);
  double const bc1 = 1.0 - std::pow(config_.beta1, t);
  double const bc2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i)
  {
    auto const &g = grads[i];
    m_[i]         = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
    v_[i]         = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseProduct(g);
    auto const m_hat = (m_[i] / bc1).array();
    auto const v_hat = (v_[i] / bc2).array();
    params[i].value.array() -= config_.learning_rate * m_hat / (v_hat.sqrt() + config_.epsilon);
  }
}

}  // namespace ctvae::grad
