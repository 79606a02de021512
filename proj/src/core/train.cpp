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

#include "ctvae/train.hpp"

#include "ctvae/error.hpp"
#include "ctvae/optimizer.hpp"
#include "ctvae/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ctvae {

void validate(TrainConfig const &cfg)
{
  if (cfg.batch_size == 0)
  {
    fail(ErrorKind::argument, "train config: batch_size must be >= 1");
  }
  if (cfg.patience == 0)
  {
    fail(ErrorKind::argument, "train config: patience must be >= 1");
  }
  if (cfg.max_epochs == 0)
  {
    fail(ErrorKind::argument, "train config: max_epochs must be >= 1");
  }
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
  {
    fail(ErrorKind::argument, "train config: learning_rate must be positive");
  }
  if (!(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0))
  {
    fail(ErrorKind::argument, "train config: validation_fraction must lie in (0, 1)");
  }
  if (cfg.max_modes == 0)
  {
    fail(ErrorKind::argument, "train config: max_modes must be >= 1");
  }
  validate(cfg.arch);
}

nlohmann::json to_json(TrainConfig const &cfg)
{
  return {
      {"batch_size", cfg.batch_size},
      {"max_epochs", cfg.max_epochs},
      {"patience", cfg.patience},
      {"learning_rate", cfg.learning_rate},
      {"seed", cfg.seed},
      {"arch",
       {{"enc_h1", cfg.arch.enc_h1},
        {"enc_h2", cfg.arch.enc_h2},
        {"latent", cfg.arch.latent},
        {"dec_h1", cfg.arch.dec_h1},
        {"dec_h2", cfg.arch.dec_h2}}},
      {"validation_fraction", cfg.validation_fraction},
      {"conditioning", cfg.conditioning},
      {"max_modes", cfg.max_modes},
  };
}

TrainConfig train_config_from_json(nlohmann::json const &doc, TrainConfig base)
{
  if (!doc.is_object())
  {
    fail(ErrorKind::parse, "train config must be an object");
  }
  try
  {
    auto get = [&](char const *key, auto &field) {
      if (auto it = doc.find(key); it != doc.end())
      {
        field = it->get<std::remove_reference_t<decltype(field)>>();
      }
    };
    get("batch_size", base.batch_size);
    get("max_epochs", base.max_epochs);
    get("patience", base.patience);
    get("learning_rate", base.learning_rate);
    get("seed", base.seed);
    get("validation_fraction", base.validation_fraction);
    get("conditioning", base.conditioning);
    get("max_modes", base.max_modes);
    if (auto it = doc.find("arch"); it != doc.end())
    {
      if (it->is_number_integer())
      {
        base.arch = ArchitectureSpec::preset(it->get<int>());
      }
      else
      {
        base.arch.enc_h1 = it->at("enc_h1").get<std::size_t>();
        base.arch.enc_h2 = it->at("enc_h2").get<std::size_t>();
        base.arch.latent = it->at("latent").get<std::size_t>();
        base.arch.dec_h1 = it->at("dec_h1").get<std::size_t>();
        base.arch.dec_h2 = it->at("dec_h2").get<std::size_t>();
      }
    }
  }
  catch (nlohmann::json::exception const &e)
  {
    fail(ErrorKind::parse, std::string("train config: ") + e.what());
  }
  validate(base);
  return base;
}

nlohmann::json to_json(TrainHistory const &history)
{
  nlohmann::json epochs = nlohmann::json::array();
  for (auto const &e : history.epochs)
  {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"validation_loss", e.validation_loss}});
  }
  return {{"best_epoch", history.best_epoch}, {"epochs", std::move(epochs)}};
}

EarlyStopping::EarlyStopping(std::size_t patience)
  : patience_(patience)
  , best_loss_(std::numeric_limits<double>::infinity())
{}

bool EarlyStopping::observe(std::size_t epoch, double validation_loss)
{
  if (validation_loss < best_loss_)
  {
    best_loss_  = validation_loss;
    best_epoch_ = epoch;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

std::vector<Product> product_catalog(Dataset const &data)
{
  std::vector<Product> out;
  if (!data.has_groups())
  {
    return out;
  }
  auto const &schema     = data.schema();
  auto const  conditions = schema.indices(ColumnRole::condition);
  for (auto const &group : data.distinct_groups())
  {
    auto const rows = data.rows_of(group);
    Product    p{group, {}};
    for (auto c : conditions)
    {
      p.conditions.emplace(schema.columns[c].name, data.cell(rows.front(), c));
    }
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

Eigen::MatrixXd gather(Eigen::MatrixXd const &m, std::span<std::size_t const> rows)
{
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
  {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng &rng)
{
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
  {
    for (Eigen::Index c = 0; c < cols; ++c)
    {
      out(r, c) = rng.normal();
    }
  }
  return out;
}

// Mean negative ELBO over all rows of an encoded table, with fixed noise.
double evaluate_loss(Model const &model, EncodedTable const &table, Eigen::MatrixXd const &noise,
                     std::size_t chunk)
{
  auto const n     = static_cast<std::size_t>(table.target.rows());
  double     total = 0.0;
  for (std::size_t start = 0; start < n; start += chunk)
  {
    auto const count = std::min(chunk, n - start);
    auto const s     = static_cast<Eigen::Index>(start);
    auto const c     = static_cast<Eigen::Index>(count);
    auto const loss  = elbo_loss(model, table.target.middleRows(s, c),
                                 model.conditioning ? Eigen::MatrixXd(table.condition.middleRows(s, c))
                                                    : Eigen::MatrixXd(),
                                 noise.middleRows(s, c));
    total += loss.elbo_negated * static_cast<double>(count);
  }
  return total / static_cast<double>(n);
}

}  // namespace

TrainResult train(Dataset const &data, TrainConfig const &cfg, EpochCallback const &on_epoch)
{
  validate(cfg);
  if (data.rows() == 0)
  {
    fail(ErrorKind::argument, "train: dataset is empty");
  }
  if (data.schema().count(ColumnRole::target) == 0)
  {
    fail(ErrorKind::argument, "train: schema has no target columns");
  }

  auto [fit_rows, val_rows] = validation_split(data, cfg.validation_fraction, cfg.seed);

  auto bundle = fit_bundle(data, BundleOptions{cfg.max_modes, derive_seed(cfg.seed, {1})});
  auto fit    = encode_table(fit_rows, bundle, derive_seed(cfg.seed, {2}));
  auto val    = encode_table(val_rows, bundle, derive_seed(cfg.seed, {3}));

  Model model   = init_model(std::move(bundle), cfg.arch, cfg.conditioning, derive_seed(cfg.seed, {4}));
  model.catalog = product_catalog(data);

  auto const latent = static_cast<Eigen::Index>(cfg.arch.latent);
  Rng        val_rng(derive_seed(cfg.seed, {5}));
  auto const val_noise = normal_matrix(val.target.rows(), latent, val_rng);

  grad::Adam         adam(model.params, grad::AdamConfig{cfg.learning_rate});
  EarlyStopping      stopper(cfg.patience);
  grad::ParameterSet best = model.params;
  TrainHistory       history;

  std::size_t const        n = fit_rows.rows();
  std::vector<std::size_t> order(n);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch)
  {
    Rng rng(derive_seed(cfg.seed, {6, epoch}));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng.engine());

    double train_total = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size)
    {
      std::span<std::size_t const> rows(order.data() + start, std::min(cfg.batch_size, n - start));
      auto const targets    = gather(fit.target, rows);
      auto const conditions = model.conditioning ? gather(fit.condition, rows) : Eigen::MatrixXd();
      auto const noise      = normal_matrix(static_cast<Eigen::Index>(rows.size()), latent, rng);

      grad::Tape tape(model.params);
      auto const nodes = record_elbo(tape, model, targets, conditions, noise);
      double const loss = tape.scalar(nodes.loss);
      if (!std::isfinite(loss))
      {
        fail(ErrorKind::training, "training diverged: non-finite loss in epoch " + std::to_string(epoch));
      }
      auto grads = tape.backward(nodes.loss);
      try
      {
        adam.step(model.params, grads);
      }
      catch (Error const &e)
      {
        throw Error(e.kind(), std::string(e.what()) + " in epoch " + std::to_string(epoch));
      }
      train_total += loss * static_cast<double>(rows.size());
    }

    EpochRecord record{epoch, train_total / static_cast<double>(n),
                       evaluate_loss(model, val, val_noise, cfg.batch_size)};
    if (!std::isfinite(record.train_loss) || !std::isfinite(record.validation_loss))
    {
      fail(ErrorKind::training, "training diverged: non-finite loss in epoch " + std::to_string(epoch));
    }
    history.epochs.push_back(record);
    if (on_epoch)
    {
      on_epoch(record);
    }
    if (stopper.observe(epoch, record.validation_loss))
    {
      best = model.params;
    }
    if (stopper.should_stop())
    {
      break;
    }
  }

  history.best_epoch = stopper.best_epoch();
  model.params       = std::move(best);
  return TrainResult{std::move(model), std::move(history)};
}

}  // namespace ctvae
