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

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ctvae::grad {

using Matrix = Eigen::MatrixXd;

struct Parameter
{
  std::string name;
  Matrix      value;
};

/// Named parameter tensors in a fixed declaration order. Affine weights are
/// (out x in), biases (1 x out).
class ParameterSet
{
public:
  std::size_t add(std::string name, Matrix value);

  std::size_t size() const noexcept
  {
    return params_.size();
  }
  Parameter const &operator[](std::size_t i) const
  {
    return params_.at(i);
  }
  Parameter &operator[](std::size_t i)
  {
    return params_.at(i);
  }
  std::size_t index_of(std::string const &name) const;

  std::size_t scalar_count() const;

  auto begin() const
  {
    return params_.begin();
  }
  auto end() const
  {
    return params_.end();
  }

  bool operator==(ParameterSet const &other) const;

private:
  std::vector<Parameter> params_;
};

/// Gradients aligned index-for-index with a ParameterSet.
using Gradients = std::vector<Matrix>;

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
Matrix glorot_uniform(Eigen::Index out, Eigen::Index in, std::uint64_t seed);

using NodeId = std::size_t;

/// Records a static composition over a batch (rows = examples) and evaluates
/// parameter gradients of a scalar output in reverse order. Nodes are created
/// in topological order, so the tape is also its own evaluation schedule.
class Tape
{
public:
  explicit Tape(ParameterSet const &params);

  NodeId constant(Matrix value);
  NodeId parameter(std::size_t index);

  /// Y = X W^T + b, with b broadcast over rows.
  NodeId affine(NodeId x, NodeId weight, NodeId bias);
  NodeId relu(NodeId x);
  NodeId tanh(NodeId x);
  NodeId exp(NodeId x);
  NodeId scale(NodeId x, double factor);
  NodeId add(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId concat(NodeId a, NodeId b);
  NodeId slice(NodeId x, Eigen::Index offset, Eigen::Index width);

  /// Per-row -sum_j t_j log softmax(z)_j. Output is (rows x 1).
  NodeId softmax_cross_entropy(NodeId logits, Matrix targets);

  /// Per-row Gaussian negative log-density of `targets` (rows x 1) under
  /// mean (rows x 1) and a shared log-spread (1 x 1).
  NodeId gaussian_nll(NodeId mean, NodeId log_spread, Matrix targets);

  /// Per-row KL(N(mu, exp(logvar)) || N(0, I)). Output is (rows x 1).
  NodeId kl_standard_normal(NodeId mu, NodeId logvar);

  /// Sum across columns; output (rows x 1).
  NodeId row_sum(NodeId x);

  /// Mean of all entries; output (1 x 1).
  NodeId mean(NodeId x);

  Matrix const &value(NodeId id) const
  {
    return nodes_.at(id).value;
  }
  double scalar(NodeId id) const;

  std::size_t size() const noexcept
  {
    return nodes_.size();
  }

  /// Recomputes every node value from the recorded operations.
  void replay();

  /// d(loss)/d(parameter) for every parameter in the set. Unreferenced
  /// parameters receive zero matrices.
  Gradients backward(NodeId loss);

private:
  enum class Op
  {
    constant,
    parameter,
    affine,
    relu,
    tanh,
    exp,
    scale,
    add,
    mul,
    concat,
    slice,
    softmax_xent,
    gaussian_nll,
    kl_normal,
    row_sum,
    mean,
  };

  struct Node
  {
    Op                    op;
    std::array<NodeId, 3> in{};
    Matrix                value;
    Matrix                aux;  // targets or cached softmax
    double                factor = 0.0;
    Eigen::Index          offset = 0;
    Eigen::Index          width  = 0;
    std::size_t           param  = 0;
  };

  NodeId push(Node node);
  void   evaluate(Node &node);

  ParameterSet const *params_;
  std::vector<Node>   nodes_;
};

}  // namespace ctvae::grad
