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
#include "ctvae/grad.hpp"

#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>

using namespace ctvae;
using namespace ctvae::grad;

namespace {

Matrix row(std::initializer_list<double> v)
{
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v)
  {
    m(0, i++) = x;
  }
  return m;
}

using Builder = std::function<NodeId(Tape &)>;

double evaluate(ParameterSet const &ps, Builder const &build)
{
  Tape t(ps);
  return t.scalar(build(t));
}

// Largest relative error between backward() and central differences.
double max_relative_error(ParameterSet ps, Builder const &build, double h = 1e-5, double floor = 1e-6)
{
  Tape       t(ps);
  auto const grads = t.backward(build(t));
  double     worst = 0;
  for (std::size_t p = 0; p < ps.size(); ++p)
  {
    for (Eigen::Index i = 0; i < ps[p].value.size(); ++i)
    {
      double const orig       = ps[p].value(i);
      ps[p].value(i)          = orig + h;
      double const up         = evaluate(ps, build);
      ps[p].value(i)          = orig - h;
      double const down       = evaluate(ps, build);
      ps[p].value(i)          = orig;
      double const fd         = (up - down) / (2 * h);
      double const an         = grads[p](i);
      double const rel        = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), floor});
      worst                   = std::max(worst, rel);
    }
  }
  return worst;
}

Matrix random_matrix(std::mt19937_64 &gen, Eigen::Index r, Eigen::Index c, double scale = 1.0)
{
  std::normal_distribution<double> n(0.0, scale);
  Matrix                           m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i)
  {
    m(i) = n(gen);
  }
  return m;
}

Matrix one_hot_rows(std::mt19937_64 &gen, Eigen::Index rows, Eigen::Index width)
{
  Matrix m = Matrix::Zero(rows, width);
  for (Eigen::Index r = 0; r < rows; ++r)
  {
    m(r, static_cast<Eigen::Index>(gen() % static_cast<std::uint64_t>(width))) = 1.0;
  }
  return m;
}

}  // namespace

TEST_CASE("affine examples")
{
  ParameterSet ps;
  auto const   w = ps.add("w", (Matrix(2, 2) << 1, 2, 3, 4).finished());
  auto const   b = ps.add("b", Matrix::Zero(1, 2));
  auto const   i = ps.add("i", Matrix::Identity(2, 2));
  auto const   z = ps.add("z", Matrix::Zero(2, 2));
  auto const   c = ps.add("c", row({-1.5, 2.5}));
  Tape         t(ps);
  auto const   x = t.constant(row({1, 1}));
  CHECK(t.value(t.affine(x, t.parameter(w), t.parameter(b))) == row({3, 7}));
  auto const x2 = t.constant(row({0.25, -8}));
  CHECK(t.value(t.affine(x2, t.parameter(i), t.parameter(b))) == row({0.25, -8}));
  CHECK(t.value(t.affine(x2, t.parameter(z), t.parameter(c))) == row({-1.5, 2.5}));

  auto const bad = t.constant(row({1, 2, 3}));
  try
  {
    t.affine(bad, t.parameter(w), t.parameter(b));
    FAIL("expected contract error");
  }
  catch (Error const &e)
  {
    CHECK(e.kind() == ErrorKind::contract);
  }
}

TEST_CASE("relu examples")
{
  ParameterSet ps;
  Tape         t(ps);
  auto const   r = t.relu(t.constant(row({-1, 0, 2})));
  CHECK(t.value(r) == row({0, 0, 2}));
  auto const n = t.relu(t.constant(row({-3, -0.5})));
  auto const again = t.relu(r);
  CHECK(t.value(n) == row({0, 0}));
  CHECK(t.value(again) == t.value(r));
}

TEST_CASE("least squares gradient matches the hand formula")
{
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 20; ++trial)
  {
    ParameterSet ps;
    Matrix const W  = random_matrix(gen, 3, 4);
    Matrix const x  = random_matrix(gen, 1, 4);
    Matrix const y  = random_matrix(gen, 1, 3);
    auto const   wi = ps.add("w", W);
    Tape         t(ps);
    auto const   out  = t.affine(t.constant(x), t.parameter(wi), t.constant(Matrix::Zero(1, 3)));
    auto const   diff = t.add(out, t.constant(-y));
    auto const   loss = t.scale(t.row_sum(t.mul(diff, diff)), 0.5);
    auto const   g    = t.backward(loss);
    Matrix const r    = (W * x.transpose() - y.transpose());  // 3x1
    Matrix const want = r * x;                               // (Wx - y) x^T
    CHECK((g[wi] - want).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("parameters that do not reach the loss get zero gradients")
{
  ParameterSet ps;
  auto const   a = ps.add("a", row({1.0, 2.0}));
  auto const   b = ps.add("b", row({3.0}));
  Tape         t(ps);
  auto const   loss = t.row_sum(t.mul(t.parameter(a), t.parameter(a)));
  auto const   g    = t.backward(loss);
  CHECK(g[a] == row({2.0, 4.0}));
  CHECK(g[b] == Matrix::Zero(1, 1));
}

TEST_CASE("backward needs a scalar loss")
{
  ParameterSet ps;
  auto const   a = ps.add("a", row({1.0, 2.0}));
  Tape         t(ps);
  auto const   v = t.parameter(a);
  try
  {
    t.backward(v);
    FAIL("expected contract error");
  }
  catch (Error const &e)
  {
    CHECK(e.kind() == ErrorKind::contract);
  }
}

TEST_CASE("small network gradients agree with finite differences")
{
  std::mt19937_64 gen(10);
  double          worst = 0;
  for (int net = 0; net < 100; ++net)
  {
    std::uniform_int_distribution<int> width(1, 20);
    int const                          layers = 1 + net % 3;
    Eigen::Index const                 in     = width(gen) % 6 + 1;
    Eigen::Index const                 batch  = 1 + net % 4;
    Matrix const                       x      = random_matrix(gen, batch, in);

    ParameterSet             ps;
    std::vector<std::size_t> ws, bs;
    Eigen::Index             prev = in;
    for (int l = 0; l < layers; ++l)
    {
      Eigen::Index const out = l + 1 == layers ? 4 : width(gen);
      ws.push_back(ps.add("w" + std::to_string(l), random_matrix(gen, out, prev, 0.5)));
      bs.push_back(ps.add("b" + std::to_string(l), random_matrix(gen, 1, out, 0.1)));
      prev = out;
    }
    auto const   ls      = ps.add("log_spread", random_matrix(gen, 1, 1, 0.3));
    Matrix const classes = one_hot_rows(gen, batch, 3);
    Matrix const target  = random_matrix(gen, batch, 1, 0.5);
    int const    act     = net % 2;

    Builder build = [&](Tape &t) {
      NodeId h = t.constant(x);
      for (int l = 0; l < layers; ++l)
      {
        h = t.affine(h, t.parameter(ws[l]), t.parameter(bs[l]));
        if (l + 1 < layers)
        {
          h = act == 0 ? t.relu(h) : t.tanh(h);
        }
      }
      auto const logits = t.slice(h, 0, 3);
      auto const mean   = t.tanh(t.slice(h, 3, 1));
      auto const ce     = t.softmax_cross_entropy(logits, classes);
      auto const nll    = t.gaussian_nll(mean, t.parameter(ls), target);
      auto const kl     = t.kl_standard_normal(t.slice(h, 0, 2), t.scale(t.slice(h, 2, 2), 0.3));
      auto const extra  = t.row_sum(t.exp(t.scale(t.concat(mean, logits), 0.2)));
      return t.mean(t.add(t.add(ce, nll), t.add(kl, extra)));
    };
    worst = std::max(worst, max_relative_error(ps, build));
  }
  MESSAGE("max relative error " << worst);
  CHECK(worst < 1e-4);
}

TEST_CASE("replay reproduces the forward pass bit for bit")
{
  std::mt19937_64 gen(3);
  ParameterSet    ps;
  auto const      w = ps.add("w", random_matrix(gen, 5, 3));
  auto const      b = ps.add("b", random_matrix(gen, 1, 5));
  Matrix const    x = random_matrix(gen, 4, 3);
  Tape            t(ps);
  auto const      h    = t.tanh(t.affine(t.constant(x), t.parameter(w), t.parameter(b)));
  auto const      loss = t.mean(t.exp(h));
  Matrix const    before = t.value(h);
  double const    lv     = t.scalar(loss);
  t.replay();
  CHECK(t.value(h) == before);
  CHECK(t.scalar(loss) == lv);

  Tape       t2(ps);
  auto const h2 = t2.tanh(t2.affine(t2.constant(x), t2.parameter(w), t2.parameter(b)));
  CHECK(t2.value(h2) == before);
}

TEST_CASE("forward and backward leave inputs and parameters untouched")
{
  std::mt19937_64 gen(8);
  ParameterSet    ps;
  auto const      w = ps.add("w", random_matrix(gen, 2, 3));
  auto const      b = ps.add("b", random_matrix(gen, 1, 2));
  ParameterSet    copy = ps;
  Matrix const    x    = random_matrix(gen, 3, 3);
  Tape            t(ps);
  auto const      xn   = t.constant(x);
  auto const      loss = t.mean(t.relu(t.affine(xn, t.parameter(w), t.parameter(b))));
  t.backward(loss);
  CHECK(ps == copy);
  CHECK(t.value(xn) == x);
}

TEST_CASE("glorot uniform bounds and determinism")
{
  auto const   a     = glorot_uniform(30, 20, 5);
  auto const   b     = glorot_uniform(30, 20, 5);
  double const limit = std::sqrt(6.0 / 50.0);
  CHECK(a == b);
  CHECK(a.rows() == 30);
  CHECK(a.cols() == 20);
  CHECK(a.cwiseAbs().maxCoeff() <= limit);
  CHECK(a.cwiseAbs().maxCoeff() > 0.8 * limit);
  CHECK(glorot_uniform(30, 20, 6) != a);
}

TEST_CASE("parameter set lookup")
{
  ParameterSet ps;
  ps.add("enc.weight", Matrix::Zero(2, 3));
  ps.add("enc.bias", Matrix::Zero(1, 2));
  CHECK(ps.index_of("enc.bias") == 1);
  CHECK(ps.scalar_count() == 8);
  CHECK_THROWS_AS(ps.index_of("missing"), Error);
}
