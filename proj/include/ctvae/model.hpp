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
#include "ctvae/schema.hpp"
#include "ctvae/transform.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ctvae {

/// Hidden sizes: encoder layers, latent space, decoder layers.
struct ArchitectureSpec
{
  std::size_t enc_h1 = 256;
  std::size_t enc_h2 = 128;
  std::size_t latent = 128;
  std::size_t dec_h1 = 128;
  std::size_t dec_h2 = 256;

  /// Named presets 64, 128, 256 and 512, e.g. 256 -> 256-128-128-128-256.
  static ArchitectureSpec preset(int width);

  bool operator==(ArchitectureSpec const &) const = default;
};

void validate(ArchitectureSpec const &arch);

/// Condition values of one known product.
struct Product
{
  std::string                 id;
  std::map<std::string, Cell> conditions;

  bool operator==(Product const &) const = default;
};

// Fixed parameter order; per-column log-spreads follow kLogSpreadBase.
enum ParamIndex : std::size_t
{
  kEnc1W,
  kEnc1B,
  kEnc2W,
  kEnc2B,
  kMuW,
  kMuB,
  kLogvarW,
  kLogvarB,
  kDec1W,
  kDec1B,
  kDec2W,
  kDec2B,
  kOutW,
  kOutB,
  kLogSpreadBase,
};

/// A conditional tabular VAE (or, with `conditioning` off, the unconditional
/// baseline). Immutable once trained; safe to share across threads.
struct Model
{
  TransformBundle      bundle;
  ArchitectureSpec     arch;
  bool                 conditioning = true;
  grad::ParameterSet   params;
  std::vector<Product> catalog;  // products seen during fitting

  std::size_t condition_width() const noexcept
  {
    return conditioning ? bundle.condition_width : 0;
  }
  std::size_t encoder_input_width() const noexcept
  {
    return bundle.target_width + condition_width();
  }
  std::size_t decoder_input_width() const noexcept
  {
    return arch.latent + condition_width();
  }

  /// Target-layout index of every continuous target column.
  std::vector<std::size_t> continuous_slots() const;

  Product const *find_product(std::string const &id) const;

  bool operator==(Model const &other) const;
};

Model init_model(TransformBundle bundle, ArchitectureSpec const &arch, bool conditioning,
                 std::uint64_t seed);

/// Initial value of every per-column log-spread.
inline double initial_log_spread()
{
  return -2.302585092994045684;  // ln 0.1
}

struct LossBreakdown
{
  double reconstruction = 0.0;
  double kl             = 0.0;
  double elbo_negated   = 0.0;
};

struct LossNodes
{
  grad::NodeId mu             = 0;
  grad::NodeId logvar         = 0;
  grad::NodeId z              = 0;
  grad::NodeId output         = 0;
  grad::NodeId reconstruction = 0;  // mean over rows
  grad::NodeId kl             = 0;  // mean over rows
  grad::NodeId loss           = 0;  // mean over rows of reconstruction + kl
};

/// Records the single-sample negative ELBO of a batch (rows are examples).
/// `conditions` is ignored for unconditional models; `noise` is (rows x latent).
LossNodes record_elbo(grad::Tape &tape, Model const &model, Eigen::MatrixXd const &targets,
                      Eigen::MatrixXd const &conditions, Eigen::MatrixXd const &noise);

LossBreakdown elbo_loss(Model const &model, Eigen::MatrixXd const &targets,
                        Eigen::MatrixXd const &conditions, Eigen::MatrixXd const &noise);

/// Single-row convenience overload.
LossBreakdown elbo_loss(Model const &model, std::vector<double> const &r_s,
                        std::vector<double> const &r_c, std::vector<double> const &noise);

struct Posterior
{
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;
};

Posterior encode(Model const &model, std::vector<double> const &r_s, std::vector<double> const &r_c);

Eigen::VectorXd reparameterize(Eigen::VectorXd const &mu, Eigen::VectorXd const &sigma,
                               Eigen::VectorXd const &noise);

/// Decoder parameters for one latent draw: alpha means (tanh), logits and
/// the per-column spreads, laid out like r_s.
DecoderOutput decode(Model const &model, Eigen::VectorXd const &z, std::vector<double> const &r_c);

/// Closed form KL(N(mu, sigma^2 I) || N(0, I)).
double kl_standard_normal(Eigen::VectorXd const &mu, Eigen::VectorXd const &sigma);

}  // namespace ctvae
