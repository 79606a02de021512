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

#include "ctvae/ctvae.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;

// Exit codes: 0 success, 2 usage, 3 input/validation, 4 I/O, 5 internal.
int exit_code(ctvae_status s)
{
  switch (s)
  {
  case CTVAE_OK:
    return 0;
  case CTVAE_E_IO:
    return 4;
  case CTVAE_E_INTERNAL:
  case CTVAE_E_NUMERIC:
  case CTVAE_E_TRAINING:
  case CTVAE_E_CONTRACT:
    return 5;
  default:
    return 3;
  }
}

struct Failure
{
  int code;
};

void check(ctvae_status s)
{
  if (s != CTVAE_OK)
  {
    std::cerr << "ctvae: " << ctvae_status_name(s) << " error: " << ctvae_last_error() << "\n";
    throw Failure{exit_code(s)};
  }
}

// Takes ownership of a string returned by the library.
std::string take(char *s)
{
  std::string out = s == nullptr ? std::string{} : std::string(s);
  ctvae_string_free(s);
  return out;
}

void write_output(std::string const &path, std::string const &text)
{
  if (path.empty() || path == "-")
  {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text << "\n";
  if (!out)
  {
    std::cerr << "ctvae: io error: cannot write " << path << "\n";
    throw Failure{4};
  }
}

std::string read_file(std::string const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    std::cerr << "ctvae: io error: cannot read " << path << "\n";
    throw Failure{4};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_or_fail(std::string const &text, std::string const &what)
{
  try
  {
    return json::parse(text);
  }
  catch (json::parse_error const &e)
  {
    std::cerr << "ctvae: parse error: " << what << ": " << e.what() << "\n";
    throw Failure{3};
  }
}

void log_to_stderr(char const *message, void *)
{
  std::cerr << message << "\n";
}

struct ModelHandle
{
  ctvae_model *p = nullptr;
  ~ModelHandle() { ctvae_model_free(p); }
};

struct BatchHandle
{
  ctvae_batch *p = nullptr;
  ~BatchHandle() { ctvae_batch_free(p); }
};

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Conditional tabular VAE: train, generate and evaluate synthetic purchase data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ctvae_version()));
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress output");

  // split
  auto       *split = app.add_subcommand("split", "Hold out whole products as a test partition");
  std::string split_data, split_schema, split_train, split_test, split_out;
  std::size_t split_k    = 3;
  std::uint64_t split_seed = 1;
  split->add_option("--data", split_data, "Input CSV")->required()->check(CLI::ExistingFile);
  split->add_option("--schema", split_schema, "Schema JSON")->required()->check(CLI::ExistingFile);
  split->add_option("--test-groups,-k", split_k, "Number of held-out products");
  split->add_option("--seed", split_seed, "Split seed");
  split->add_option("--out-train,--train-out", split_train, "Training rows CSV")->required();
  split->add_option("--out-test,--test-out", split_test, "Held-out rows CSV")->required();
  split->add_option("--out", split_out, "Split summary JSON (default stdout)");

  // fit
  auto       *fit = app.add_subcommand("fit", "Train a model on a CSV table");
  std::string fit_data, fit_schema, fit_out, fit_config, fit_history;
  std::optional<std::size_t>   batch_size, max_epochs, patience, max_modes;
  std::optional<double>        lr, val_fraction;
  std::optional<std::uint64_t> fit_seed;
  std::optional<int>           arch;
  bool                         baseline = false;
  fit->add_option("--train,--data", fit_data, "Training CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--schema", fit_schema, "Schema JSON")->required()->check(CLI::ExistingFile);
  fit->add_option("--out", fit_out, "Model file to write")->required();
  fit->add_option("--config", fit_config, "Training config JSON; flags override it")->check(CLI::ExistingFile);
  fit->add_option("--batch-size", batch_size, "Mini-batch size");
  fit->add_option("--epochs", max_epochs, "Maximum epochs");
  fit->add_option("--patience", patience, "Early stopping patience");
  fit->add_option("--lr", lr, "Adam learning rate");
  fit->add_option("--seed", fit_seed, "Training seed");
  fit->add_option("--arch", arch, "Architecture preset")->check(CLI::IsMember({64, 128, 256, 512}));
  fit->add_option("--validation-fraction", val_fraction, "Share of rows held for early stopping");
  fit->add_option("--max-modes", max_modes, "Largest mixture size tried per continuous column");
  fit->add_flag("--baseline", baseline, "Train the unconditional baseline (no condition input)");
  fit->add_option("--history", fit_history, "Write the epoch history JSON here");

  // generate
  auto *gen = app.add_subcommand("generate", "Draw synthetic rows under a condition");
  std::string              gen_model, gen_base, gen_out, gen_catalog, gen_provenance;
  std::vector<std::string> gen_overrides;
  std::size_t              gen_n = 1000;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--model", gen_model, "Model file")->required()->check(CLI::ExistingFile);
  gen->add_option("--base-product", gen_base, "Product id, or a JSON object of condition values");
  gen->add_option("--override", gen_overrides, "column=value (repeatable)");
  gen->add_option("--n", gen_n, "Number of rows")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Generation seed (random when omitted)");
  gen->add_option("--out", gen_out, "Output CSV")->required();
  gen->add_option("--catalog", gen_catalog, "Extra product catalog CSV")->check(CLI::ExistingFile);
  gen->add_option("--provenance", gen_provenance, "Write provenance JSON here (default stdout)");

  // summarize
  auto       *sum = app.add_subcommand("summarize", "Frequency summary of one column");
  std::string sum_in, sum_column, sum_out, sum_model, sum_kind;
  std::size_t sum_bins = 10;
  std::vector<double> sum_range;
  sum->add_option("--in", sum_in, "Input CSV")->required()->check(CLI::ExistingFile);
  sum->add_option("--column", sum_column, "Column name")->required();
  sum->add_option("--bins", sum_bins, "Bins for continuous columns")->check(CLI::PositiveNumber);
  sum->add_option("--out", sum_out, "Output JSON (default stdout)");
  sum->add_option("--model", sum_model, "Use the model's vocabulary and training range")->check(CLI::ExistingFile);
  sum->add_option("--kind", sum_kind, "Force column kind")->check(CLI::IsMember({"continuous", "discrete"}));
  sum->add_option("--range", sum_range, "Bin range LO HI")->expected(2);

  // evaluate
  auto       *ev = app.add_subcommand("evaluate", "Score synthetic rows against real rows");
  std::string ev_real, ev_synth, ev_schema, ev_out;
  ev->add_option("--real", ev_real, "Real CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--synth", ev_synth, "Synthetic CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--schema", ev_schema, "Schema JSON")->required()->check(CLI::ExistingFile);
  ev->add_option("--out", ev_out, "Output JSON (default stdout)");

  // sweep
  auto       *sw = app.add_subcommand("sweep", "Run the product holdout experiment over presets");
  std::string sw_config, sw_out;
  sw->add_option("--config", sw_config, "Experiment config JSON")->required()->check(CLI::ExistingFile);
  sw->add_option("--out", sw_out, "Report directory (overrides the config)");

  // make-corpus
  auto         *mc = app.add_subcommand("make-corpus", "Write a synthetic corpus with known distributions");
  std::string   mc_spec, mc_out;
  std::uint64_t mc_seed = 1;
  mc->add_option("--spec", mc_spec, "Corpus spec JSON (default: built-in flip corpus)")->check(CLI::ExistingFile);
  mc->add_option("--seed", mc_seed, "Corpus seed");
  mc->add_option("--out", mc_out, "Output directory")->required();

  // serve
  auto       *srv = app.add_subcommand("serve", "Serve schema, generation and what-if over HTTP");
  std::string srv_model, srv_catalog, srv_bind = "127.0.0.1:8080";
  std::size_t srv_max_n = 50000;
  srv->add_option("--model", srv_model, "Model file")->required()->check(CLI::ExistingFile);
  srv->add_option("--catalog", srv_catalog, "Product catalog CSV")->check(CLI::ExistingFile);
  srv->add_option("--bind", srv_bind, "host:port");
  srv->add_option("--max-n", srv_max_n, "Largest n per request")->check(CLI::PositiveNumber);

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::ParseError const &e)
  {
    // --help and --version exit 0; every other parse failure is a usage error.
    int const rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (!quiet)
  {
    ctvae_set_log_callback(&log_to_stderr, nullptr);
  }

  try
  {
    if (*split)
    {
      char *res = nullptr;
      check(ctvae_split_csv(split_data.c_str(), split_schema.c_str(), split_k, split_seed, split_train.c_str(),
                            split_test.c_str(), &res));
      write_output(split_out, take(res));
    }
    else if (*fit)
    {
      json cfg = fit_config.empty() ? json::object() : parse_or_fail(read_file(fit_config), fit_config);
      if (batch_size) cfg["batch_size"] = *batch_size;
      if (max_epochs) cfg["max_epochs"] = *max_epochs;
      if (patience) cfg["patience"] = *patience;
      if (lr) cfg["learning_rate"] = *lr;
      if (fit_seed) cfg["seed"] = *fit_seed;
      if (arch) cfg["arch"] = *arch;
      if (val_fraction) cfg["validation_fraction"] = *val_fraction;
      if (max_modes) cfg["max_modes"] = *max_modes;
      if (baseline) cfg["conditioning"] = false;

      ModelHandle model;
      char       *history = nullptr;
      check(ctvae_fit(fit_data.c_str(), fit_schema.c_str(), cfg.dump().c_str(), &model.p, &history));
      auto const hist = take(history);
      check(ctvae_model_save(model.p, fit_out.c_str()));
      if (!fit_history.empty())
      {
        write_output(fit_history, hist);
      }
    }
    else if (*gen)
    {
      json req = {{"n", gen_n}};
      if (!gen_base.empty())
      {
        if (gen_base.front() == '{')
        {
          req["base"] = parse_or_fail(gen_base, "--base-product");
        }
        else
        {
          req["base_product"] = gen_base;
        }
      }
      json overrides = json::object();
      for (auto const &kv : gen_overrides)
      {
        auto const eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
        {
          std::cerr << "ctvae: argument error: --override expects column=value, got '" << kv << "'\n";
          return 2;
        }
        overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      req["overrides"] = overrides;
      if (gen_seed)
      {
        req["seed"] = *gen_seed;
      }

      ModelHandle model;
      check(ctvae_model_load(gen_model.c_str(), gen_catalog.empty() ? nullptr : gen_catalog.c_str(), &model.p));
      BatchHandle batch;
      check(ctvae_generate(model.p, req.dump().c_str(), &batch.p));
      check(ctvae_batch_write_csv(batch.p, gen_out.c_str()));
      char *prov = nullptr;
      check(ctvae_batch_provenance_json(batch.p, &prov));
      write_output(gen_provenance, take(prov));
    }
    else if (*sum)
    {
      json opts = {{"bins", sum_bins}};
      if (!sum_model.empty()) opts["model"] = sum_model;
      if (!sum_kind.empty()) opts["kind"] = sum_kind;
      if (!sum_range.empty()) opts["range"] = sum_range;
      char *res = nullptr;
      check(ctvae_summarize_csv(sum_in.c_str(), sum_column.c_str(), opts.dump().c_str(), &res));
      write_output(sum_out, take(res));
    }
    else if (*ev)
    {
      char *res = nullptr;
      check(ctvae_evaluate_csv(ev_real.c_str(), ev_synth.c_str(), ev_schema.c_str(), &res));
      write_output(ev_out, take(res));
    }
    else if (*sw)
    {
      char *res = nullptr;
      check(ctvae_sweep(sw_config.c_str(), sw_out.empty() ? nullptr : sw_out.c_str(), &res));
      write_output("", take(res));
    }
    else if (*mc)
    {
      check(ctvae_make_corpus(mc_spec.empty() ? nullptr : mc_spec.c_str(), mc_seed, mc_out.c_str()));
    }
    else if (*srv)
    {
      std::cerr << "serving on " << srv_bind << "\n";
      check(ctvae_serve(srv_model.c_str(), srv_catalog.empty() ? nullptr : srv_catalog.c_str(), srv_bind.c_str(),
                        srv_max_n));
    }
  }
  catch (Failure const &f)
  {
    return f.code;
  }
  return 0;
}
