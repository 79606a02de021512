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

#include "ctvae/grad.hpp"

#include "ctvae/error.hpp"
#include "ctvae/rng.hpp"

#include <cmath>

namespace ctvae::grad {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

void require(bool ok, char const *what)
{
  if (!ok)
  {
    fail(ErrorKind::contract, std::string("tape: ") + what);
  }
}

}  // namespace

std::size_t ParameterSet::add(std::string name, Matrix value)
{
  params_.push_back({std::move(name), std::move(value)});
  return params_.size() - 1;
}

std::size_t ParameterSet::index_of(std::string const &name) const
{
  for (std::size_t i = 0; i < params_.size(); ++i)
  {
    if (params_[i].name == name)
    {
      return i;
    }
  }
  fail(ErrorKind::argument, "unknown parameter '" + name + "'");
}

std::size_t ParameterSet::scalar_count() const
{
  std::size_t n = 0;
  for (auto const &p : params_)
  {
    n += static_cast<std::size_t>(p.value.size());
  }
  return n;
}

bool ParameterSet::operator==(ParameterSet const &other) const
{
  if (params_.size() != other.params_.size())
  {
    return false;
  }
  for (std::size_t i = 0; i < params_.size(); ++i)
  {
    auto const &a = params_[i];
    auto const &b = other.params_[i];
    if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols() ||
        a.value != b.value)
    {
      return false;
    }
  }
  return true;
}

Matrix glorot_uniform(Eigen::Index out, Eigen::Index in, std::uint64_t seed)
{
  double const limit = std::sqrt(6.0 / static_cast<double>(in + out));
  Rng          rng(seed);
  Matrix       w(out, in);
  for (Eigen::Index r = 0; r < out; ++r)
  {
    for (Eigen::Index c = 0; c < in; ++c)
    {
      w(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
    }
  }
  return w;
}

Tape::Tape(ParameterSet const &params)
  : params_(&params)
{}

NodeId Tape::push(Node node)
{
  for (std::size_t i = 0; i < node.in.size(); ++i)
  {
    require(node.in[i] < nodes_.size() || node.in[i] == static_cast<NodeId>(-1),
            "input node does not exist");
  }
  evaluate(node);
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

namespace {
constexpr NodeId kNone = static_cast<NodeId>(-1);
}

NodeId Tape::constant(Matrix value)
{
  Node n{Op::constant, {kNone, kNone, kNone}};
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::parameter(std::size_t index)
{
  require(index < params_->size(), "parameter index out of range");
  Node n{Op::parameter, {kNone, kNone, kNone}};
  n.param = index;
  return push(std::move(n));
}

NodeId Tape::affine(NodeId x, NodeId weight, NodeId bias)
{
  return push(Node{Op::affine, {x, weight, bias}});
}

NodeId Tape::relu(NodeId x)
{
  return push(Node{Op::relu, {x, kNone, kNone}});
}

NodeId Tape::tanh(NodeId x)
{
  return push(Node{Op::tanh, {x, kNone, kNone}});
}

NodeId Tape::exp(NodeId x)
{
  return push(Node{Op::exp, {x, kNone, kNone}});
}

NodeId Tape::scale(NodeId x, double factor)
{
  Node n{Op::scale, {x, kNone, kNone}};
  n.factor = factor;
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b)
{
  return push(Node{Op::add, {a, b, kNone}});
}

NodeId Tape::mul(NodeId a, NodeId b)
{
  return push(Node{Op::mul, {a, b, kNone}});
}

NodeId Tape::concat(NodeId a, NodeId b)
{
  return push(Node{Op::concat, {a, b, kNone}});
}

NodeId Tape::slice(NodeId x, Eigen::Index offset, Eigen::Index width)
{
  Node n{Op::slice, {x, kNone, kNone}};
  n.offset = offset;
  n.width  = width;
  return push(std::move(n));
}

NodeId Tape::softmax_cross_entropy(NodeId logits, Matrix targets)
{
  Node n{Op::softmax_xent, {logits, kNone, kNone}};
  n.aux = std::move(targets);
  return push(std::move(n));
}

NodeId Tape::gaussian_nll(NodeId mean, NodeId log_spread, Matrix targets)
{
  Node n{Op::gaussian_nll, {mean, log_spread, kNone}};
  n.aux = std::move(targets);
  return push(std::move(n));
}

NodeId Tape::kl_standard_normal(NodeId mu, NodeId logvar)
{
  return push(Node{Op::kl_normal, {mu, logvar, kNone}});
}

NodeId Tape::row_sum(NodeId x)
{
  return push(Node{Op::row_sum, {x, kNone, kNone}});
}

NodeId Tape::mean(NodeId x)
{
  return push(Node{Op::mean, {x, kNone, kNone}});
}

double Tape::scalar(NodeId id) const
{
  auto const &v = value(id);
  require(v.rows() == 1 && v.cols() == 1, "node is not a scalar");
  return v(0, 0);
}

void Tape::evaluate(Node &node)
{
  auto in = [&](std::size_t k) -> Matrix const & { return nodes_[node.in[k]].value; };

  switch (node.op)
  {
  case Op::constant:
    break;
  case Op::parameter:
    node.value = (*params_)[node.param].value;
    break;
  case Op::affine: {
    auto const &x = in(0);
    auto const &w = in(1);
    auto const &b = in(2);
    require(x.cols() == w.cols(), "affine input width does not match weight");
    require(b.rows() == 1 && b.cols() == w.rows(), "affine bias shape mismatch");
    node.value.noalias() = x * w.transpose();
    node.value.rowwise() += b.row(0);
    break;
  }
  case Op::relu:
    node.value = in(0).cwiseMax(0.0);
    break;
  case Op::tanh:
    node.value = in(0).array().tanh().matrix();
    break;
  case Op::exp:
    node.value = in(0).array().exp().matrix();
    break;
  case Op::scale:
    node.value = in(0) * node.factor;
    break;
  case Op::add:
    require(in(0).rows() == in(1).rows() && in(0).cols() == in(1).cols(), "add shape mismatch");
    node.value = in(0) + in(1);
    break;
  case Op::mul:
    require(in(0).rows() == in(1).rows() && in(0).cols() == in(1).cols(), "mul shape mismatch");
    node.value = in(0).cwiseProduct(in(1));
    break;
  case Op::concat: {
    auto const &a = in(0);
    auto const &b = in(1);
    require(a.rows() == b.rows(), "concat row mismatch");
    node.value.resize(a.rows(), a.cols() + b.cols());
    node.value.leftCols(a.cols())  = a;
    node.value.rightCols(b.cols()) = b;
    break;
  }
  case Op::slice:
    require(node.offset >= 0 && node.width >= 0 && node.offset + node.width <= in(0).cols(),
            "slice out of range");
    node.value = in(0).middleCols(node.offset, node.width);
    break;
  case Op::softmax_xent: {
    auto const &z = in(0);
    require(z.rows() == node.aux.rows() && z.cols() == node.aux.cols(),
            "cross-entropy target shape mismatch");
    node.value.resize(z.rows(), 1);
    for (Eigen::Index r = 0; r < z.rows(); ++r)
    {
      double const m   = z.row(r).maxCoeff();
      double const lse = m + std::log((z.row(r).array() - m).exp().sum());
      node.value(r, 0) = -(node.aux.row(r).array() * (z.row(r).array() - lse)).sum();
    }
    break;
  }
  case Op::gaussian_nll: {
    auto const &m  = in(0);
    auto const &ls = in(1);
    require(m.cols() == 1 && node.aux.cols() == 1 && m.rows() == node.aux.rows(),
            "gaussian target shape mismatch");
    require(ls.rows() == 1 && ls.cols() == 1, "log-spread must be a scalar");
    double const log_s = ls(0, 0);
    double const inv_s = std::exp(-log_s);
    auto const   u     = ((node.aux - m) * inv_s).array();
    node.value         = (0.5 * u.square() + log_s + kLogSqrt2Pi).matrix();
    break;
  }
  case Op::kl_normal: {
    auto const &mu = in(0).array();
    auto const &lv = in(1).array();
    require(in(0).rows() == in(1).rows() && in(0).cols() == in(1).cols(), "kl shape mismatch");
    node.value = (0.5 * (mu.square() + lv.exp() - 1.0 - lv)).matrix().rowwise().sum();
    break;
  }
  case Op::row_sum:
    node.value = in(0).rowwise().sum();
    break;
  case Op::mean:
    require(in(0).size() > 0, "mean of empty node");
    node.value.resize(1, 1);
    node.value(0, 0) = in(0).mean();
    break;
  }
}

void Tape::replay()
{
  for (auto &node : nodes_)
  {
    evaluate(node);
  }
}

Gradients Tape::backward(NodeId loss)
{
  require(loss < nodes_.size(), "loss node does not exist");
  auto const &lv = nodes_[loss].value;
  require(lv.rows() == 1 && lv.cols() == 1, "backward needs a scalar loss");

  std::vector<Matrix> g(loss + 1);
  auto accumulate = [&](NodeId id, Matrix const &delta) {
    if (g[id].size() == 0)
    {
      g[id] = delta;
    }
    else
    {
      g[id] += delta;
    }
  };
  g[loss] = Matrix::Ones(1, 1);

  Gradients out(params_->size());
  for (std::size_t i = 0; i < params_->size(); ++i)
  {
    auto const &p = (*params_)[i].value;
    out[i]        = Matrix::Zero(p.rows(), p.cols());
  }

  for (NodeId id = loss + 1; id-- > 0;)
  {
    if (g[id].size() == 0)
    {
      continue;
    }
    auto const &node = nodes_[id];
    auto const &dy   = g[id];
    auto        in   = [&](std::size_t k) -> Matrix const & { return nodes_[node.in[k]].value; };

    switch (node.op)
    {
    case Op::constant:
      break;
    case Op::parameter:
      out[node.param] += dy;
      break;
    case Op::affine: {
      accumulate(node.in[0], dy * in(1));
      accumulate(node.in[1], dy.transpose() * in(0));
      accumulate(node.in[2], dy.colwise().sum());
      break;
    }
    case Op::relu:
      accumulate(node.in[0], (in(0).array() > 0.0).select(dy, 0.0));
      break;
    case Op::tanh:
      accumulate(node.in[0], (dy.array() * (1.0 - node.value.array().square())).matrix());
      break;
    case Op::exp:
      accumulate(node.in[0], dy.cwiseProduct(node.value));
      break;
    case Op::scale:
      accumulate(node.in[0], dy * node.factor);
      break;
    case Op::add:
      accumulate(node.in[0], dy);
      accumulate(node.in[1], dy);
      break;
    case Op::mul:
      accumulate(node.in[0], dy.cwiseProduct(in(1)));
      accumulate(node.in[1], dy.cwiseProduct(in(0)));
      break;
    case Op::concat: {
      auto const wa = in(0).cols();
      accumulate(node.in[0], dy.leftCols(wa));
      accumulate(node.in[1], dy.rightCols(dy.cols() - wa));
      break;
    }
    case Op::slice: {
      Matrix d = Matrix::Zero(in(0).rows(), in(0).cols());
      d.middleCols(node.offset, node.width) = dy;
      accumulate(node.in[0], d);
      break;
    }
    case Op::softmax_xent: {
      auto const &z = in(0);
      Matrix      d(z.rows(), z.cols());
      for (Eigen::Index r = 0; r < z.rows(); ++r)
      {
        double const m   = z.row(r).maxCoeff();
        auto const   e   = (z.row(r).array() - m).exp();
        auto const   p   = e / e.sum();
        double const tot = node.aux.row(r).sum();
        d.row(r)         = dy(r, 0) * (tot * p - node.aux.row(r).array()).matrix();
      }
      accumulate(node.in[0], d);
      break;
    }
    case Op::gaussian_nll: {
      double const inv_s = std::exp(-in(1)(0, 0));
      Matrix const u     = (node.aux - in(0)) * inv_s;
      accumulate(node.in[0], (-dy.array() * u.array() * inv_s).matrix());
      Matrix dls(1, 1);
      dls(0, 0) = (dy.array() * (1.0 - u.array().square())).sum();
      accumulate(node.in[1], dls);
      break;
    }
    case Op::kl_normal: {
      auto const  bcast = dy.replicate(1, in(0).cols());
      accumulate(node.in[0], bcast.cwiseProduct(in(0)));
      accumulate(node.in[1], (bcast.array() * 0.5 * (in(1).array().exp() - 1.0)).matrix());
      break;
    }
    case Op::row_sum:
      accumulate(node.in[0], dy.replicate(1, in(0).cols()));
      break;
    case Op::mean: {
      auto const &x = in(0);
      accumulate(node.in[0],
                 Matrix::Constant(x.rows(), x.cols(), dy(0, 0) / static_cast<double>(x.size())));
      break;
    }
    }
  }
  return out;
}

}  // namespace ctvae::grad
