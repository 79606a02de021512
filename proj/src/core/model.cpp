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

#include "ctvae/model.hpp"

#include "ctvae/error.hpp"
#include "ctvae/rng.hpp"

#include <cmath>

namespace ctvae {

using grad::Matrix;
using grad::NodeId;

ArchitectureSpec ArchitectureSpec::preset(int width)
{
  switch (width)
  {
  case 64:
    return {64, 32, 32, 32, 64};
  case 128:
    return {128, 64, 64, 64, 128};
  case 256:
    return {256, 128, 128, 128, 256};
  case 512:
    return {512, 256, 256, 256, 512};
  default:
    fail(ErrorKind::argument,
         "unknown architecture preset " + std::to_string(width) + " (expected 64, 128, 256 or 512)");
  }
}

void validate(ArchitectureSpec const &arch)
{
  if (arch.enc_h1 == 0 || arch.enc_h2 == 0 || arch.latent == 0 || arch.dec_h1 == 0 ||
      arch.dec_h2 == 0)
  {
    fail(ErrorKind::argument, "architecture sizes must all be positive");
  }
}

std::vector<std::size_t> Model::continuous_slots() const
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bundle.target_layout.size(); ++i)
  {
    if (std::holds_alternative<ContinuousTransform>(bundle.transforms[bundle.target_layout[i].column]))
    {
      out.push_back(i);
    }
  }
  return out;
}

Product const *Model::find_product(std::string const &id) const
{
  for (auto const &p : catalog)
  {
    if (p.id == id)
    {
      return &p;
    }
  }
  return nullptr;
}

bool Model::operator==(Model const &other) const
{
  return bundle == other.bundle && arch == other.arch && conditioning == other.conditioning &&
         params == other.params && catalog == other.catalog;
}

Model init_model(TransformBundle bundle, ArchitectureSpec const &arch, bool conditioning,
                 std::uint64_t seed)
{
  validate(arch);
  if (bundle.target_width == 0)
  {
    fail(ErrorKind::contract, "init_model: target encoding has zero width");
  }
  Model m;
  m.bundle       = std::move(bundle);
  m.arch         = arch;
  m.conditioning = conditioning;

  auto layer = [&](char const *name, std::size_t in, std::size_t out, std::uint64_t stream) {
    auto const o = static_cast<Eigen::Index>(out);
    auto const i = static_cast<Eigen::Index>(in);
    m.params.add(std::string(name) + ".weight", grad::glorot_uniform(o, i, derive_seed(seed, {stream})));
    m.params.add(std::string(name) + ".bias", Matrix::Zero(1, o));
  };
  layer("enc1", m.encoder_input_width(), arch.enc_h1, 1);
  layer("enc2", arch.enc_h1, arch.enc_h2, 2);
  layer("mu", arch.enc_h2, arch.latent, 3);
  layer("logvar", arch.enc_h2, arch.latent, 4);
  layer("dec1", m.decoder_input_width(), arch.dec_h1, 5);
  layer("dec2", arch.dec_h1, arch.dec_h2, 6);
  layer("out", arch.dec_h2, m.bundle.target_width, 7);
  for (auto slot : m.continuous_slots())
  {
    auto const &name = m.bundle.schema.columns[m.bundle.target_layout[slot].column].name;
    m.params.add("log_spread." + name, Matrix::Constant(1, 1, initial_log_spread()));
  }
  return m;
}

LossNodes record_elbo(grad::Tape &tape, Model const &model, Eigen::MatrixXd const &targets,
                      Eigen::MatrixXd const &conditions, Eigen::MatrixXd const &noise)
{
  auto const rows = targets.rows();
  if (targets.cols() != static_cast<Eigen::Index>(model.bundle.target_width))
  {
    fail(ErrorKind::contract, "elbo: target width mismatch");
  }
  if (model.conditioning &&
      (conditions.rows() != rows ||
       conditions.cols() != static_cast<Eigen::Index>(model.bundle.condition_width)))
  {
    fail(ErrorKind::contract, "elbo: condition shape mismatch");
  }
  if (noise.rows() != rows || noise.cols() != static_cast<Eigen::Index>(model.arch.latent))
  {
    fail(ErrorKind::contract, "elbo: noise shape mismatch");
  }

  auto p = [&](std::size_t idx) { return tape.parameter(idx); };

  LossNodes n;
  NodeId    r_s = tape.constant(targets);
  NodeId    r_c = 0;
  NodeId    x   = r_s;
  if (model.conditioning)
  {
    r_c = tape.constant(conditions);
    x   = tape.concat(r_s, r_c);
  }
  NodeId h1 = tape.relu(tape.affine(x, p(kEnc1W), p(kEnc1B)));
  NodeId h2 = tape.relu(tape.affine(h1, p(kEnc2W), p(kEnc2B)));
  n.mu      = tape.affine(h2, p(kMuW), p(kMuB));
  n.logvar  = tape.affine(h2, p(kLogvarW), p(kLogvarB));
  NodeId sigma = tape.exp(tape.scale(n.logvar, 0.5));
  n.z          = tape.add(n.mu, tape.mul(sigma, tape.constant(noise)));

  NodeId d_in = model.conditioning ? tape.concat(n.z, r_c) : n.z;
  NodeId d1   = tape.relu(tape.affine(d_in, p(kDec1W), p(kDec1B)));
  NodeId d2   = tape.relu(tape.affine(d1, p(kDec2W), p(kDec2B)));
  n.output    = tape.affine(d2, p(kOutW), p(kOutB));

  NodeId      recon        = 0;
  bool        have_recon   = false;
  std::size_t spread_index = kLogSpreadBase;
  auto        add_term     = [&](NodeId term) {
    recon      = have_recon ? tape.add(recon, term) : term;
    have_recon = true;
  };
  for (auto const &slot : model.bundle.target_layout)
  {
    auto const off = static_cast<Eigen::Index>(slot.offset);
    auto const w   = static_cast<Eigen::Index>(slot.width);
    if (std::holds_alternative<ContinuousTransform>(model.bundle.transforms[slot.column]))
    {
      NodeId alpha_mean = tape.tanh(tape.slice(n.output, off, 1));
      add_term(tape.gaussian_nll(alpha_mean, p(spread_index++), targets.middleCols(off, 1)));
      NodeId logits = tape.slice(n.output, off + 1, w - 1);
      add_term(tape.softmax_cross_entropy(logits, targets.middleCols(off + 1, w - 1)));
    }
    else
    {
      NodeId logits = tape.slice(n.output, off, w);
      add_term(tape.softmax_cross_entropy(logits, targets.middleCols(off, w)));
    }
  }

  NodeId kl        = tape.kl_standard_normal(n.mu, n.logvar);
  n.loss           = tape.mean(tape.add(recon, kl));
  n.reconstruction = tape.mean(recon);
  n.kl             = tape.mean(kl);
  return n;
}

LossBreakdown elbo_loss(Model const &model, Eigen::MatrixXd const &targets,
                        Eigen::MatrixXd const &conditions, Eigen::MatrixXd const &noise)
{
  grad::Tape tape(model.params);
  auto const n = record_elbo(tape, model, targets, conditions, noise);
  LossBreakdown out{tape.scalar(n.reconstruction), tape.scalar(n.kl), tape.scalar(n.loss)};
  if (!std::isfinite(out.reconstruction))
  {
    fail(ErrorKind::numeric, "elbo: reconstruction term is not finite");
  }
  if (!std::isfinite(out.kl))
  {
    fail(ErrorKind::numeric, "elbo: kl term is not finite");
  }
  return out;
}

namespace {

Eigen::MatrixXd row_matrix(std::vector<double> const &v)
{
  Eigen::MatrixXd m(1, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    m(0, static_cast<Eigen::Index>(i)) = v[i];
  }
  return m;
}

Eigen::VectorXd dense(Model const &m, std::size_t w, std::size_t b, Eigen::VectorXd const &x)
{
  return m.params[w].value * x + m.params[b].value.row(0).transpose();
}

Eigen::VectorXd relu(Eigen::VectorXd v)
{
  return v.cwiseMax(0.0);
}

Eigen::VectorXd concat(Eigen::VectorXd const &a, std::vector<double> const &b)
{
  Eigen::VectorXd out(a.size() + static_cast<Eigen::Index>(b.size()));
  out.head(a.size()) = a;
  for (std::size_t i = 0; i < b.size(); ++i)
  {
    out(a.size() + static_cast<Eigen::Index>(i)) = b[i];
  }
  return out;
}

void check_condition_width(Model const &model, std::vector<double> const &r_c)
{
  if (model.conditioning && r_c.size() != model.bundle.condition_width)
  {
    fail(ErrorKind::contract, "condition vector has width " + std::to_string(r_c.size()) +
                                  ", expected " + std::to_string(model.bundle.condition_width));
  }
}

}  // namespace

LossBreakdown elbo_loss(Model const &model, std::vector<double> const &r_s,
                        std::vector<double> const &r_c, std::vector<double> const &noise)
{
  return elbo_loss(model, row_matrix(r_s), model.conditioning ? row_matrix(r_c) : Eigen::MatrixXd(),
                   row_matrix(noise));
}

Posterior encode(Model const &model, std::vector<double> const &r_s, std::vector<double> const &r_c)
{
  if (r_s.size() != model.bundle.target_width)
  {
    fail(ErrorKind::contract, "encode: target vector width mismatch");
  }
  check_condition_width(model, r_c);
  Eigen::VectorXd x(static_cast<Eigen::Index>(model.encoder_input_width()));
  for (std::size_t i = 0; i < r_s.size(); ++i)
  {
    x(static_cast<Eigen::Index>(i)) = r_s[i];
  }
  if (model.conditioning)
  {
    for (std::size_t i = 0; i < r_c.size(); ++i)
    {
      x(static_cast<Eigen::Index>(r_s.size() + i)) = r_c[i];
    }
  }
  auto h1 = relu(dense(model, kEnc1W, kEnc1B, x));
  auto h2 = relu(dense(model, kEnc2W, kEnc2B, h1));
  Posterior post;
  post.mu    = dense(model, kMuW, kMuB, h2);
  post.sigma = (0.5 * dense(model, kLogvarW, kLogvarB, h2).array()).exp().matrix();
  if (!post.mu.allFinite() || !post.sigma.allFinite())
  {
    fail(ErrorKind::numeric, "encode: non-finite activations");
  }
  return post;
}

Eigen::VectorXd reparameterize(Eigen::VectorXd const &mu, Eigen::VectorXd const &sigma,
                               Eigen::VectorXd const &noise)
{
  if (mu.size() != sigma.size() || mu.size() != noise.size())
  {
    fail(ErrorKind::contract, "reparameterize: length mismatch");
  }
  return mu + sigma.cwiseProduct(noise);
}

DecoderOutput decode(Model const &model, Eigen::VectorXd const &z, std::vector<double> const &r_c)
{
  if (z.size() != static_cast<Eigen::Index>(model.arch.latent))
  {
    fail(ErrorKind::contract, "decode: latent vector width mismatch");
  }
  check_condition_width(model, r_c);
  Eigen::VectorXd const in  = model.conditioning ? concat(z, r_c) : z;
  auto                  d1  = relu(dense(model, kDec1W, kDec1B, in));
  auto                  d2  = relu(dense(model, kDec2W, kDec2B, d1));
  Eigen::VectorXd const raw = dense(model, kOutW, kOutB, d2);

  DecoderOutput out;
  out.values.assign(raw.data(), raw.data() + raw.size());
  std::size_t spread_index = kLogSpreadBase;
  for (auto const &slot : model.bundle.target_layout)
  {
    if (std::holds_alternative<ContinuousTransform>(model.bundle.transforms[slot.column]))
    {
      out.values[slot.offset] = std::tanh(out.values[slot.offset]);
      out.spreads.push_back(std::exp(model.params[spread_index++].value(0, 0)));
    }
  }
  return out;
}

double kl_standard_normal(Eigen::VectorXd const &mu, Eigen::VectorXd const &sigma)
{
  if (mu.size() != sigma.size())
  {
    fail(ErrorKind::contract, "kl: length mismatch");
  }
  double kl = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i)
  {
    double const s2 = sigma(i) * sigma(i);
    kl += 0.5 * (mu(i) * mu(i) + s2 - 1.0 - std::log(s2));
  }
  return kl;
}

}  // namespace ctvae
