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

#include "ctvae/corpus.hpp"
#include "ctvae/csv.hpp"
#include "ctvae/error.hpp"
#include "ctvae/experiment.hpp"
#include "ctvae/metrics.hpp"
#include "ctvae/serialize.hpp"
#include "ctvae/service.hpp"
#include "ctvae/train.hpp"
#include "ctvae/version.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <mutex>
#include <string>

using namespace ctvae;

struct ctvae_model
{
  std::shared_ptr<Service const> service;
};

struct ctvae_batch
{
  std::string    csv;
  std::size_t    rows = 0;
  nlohmann::json provenance;
};

namespace {

thread_local std::string last_error;

std::mutex   log_mutex;
ctvae_log_fn log_fn   = nullptr;
void        *log_user = nullptr;

void log_line(std::string const &line)
{
  std::lock_guard<std::mutex> lock(log_mutex);
  if (log_fn != nullptr)
  {
    log_fn(line.c_str(), log_user);
  }
}

ctvae_status status_of(ErrorKind kind)
{
  switch (kind)
  {
  case ErrorKind::argument:
    return CTVAE_E_ARGUMENT;
  case ErrorKind::parse:
    return CTVAE_E_PARSE;
  case ErrorKind::validation:
    return CTVAE_E_VALIDATION;
  case ErrorKind::header:
    return CTVAE_E_HEADER;
  case ErrorKind::encoding:
    return CTVAE_E_ENCODING;
  case ErrorKind::contract:
    return CTVAE_E_CONTRACT;
  case ErrorKind::numeric:
    return CTVAE_E_NUMERIC;
  case ErrorKind::training:
    return CTVAE_E_TRAINING;
  case ErrorKind::io:
    return CTVAE_E_IO;
  case ErrorKind::corruption:
    return CTVAE_E_CORRUPTION;
  case ErrorKind::version:
    return CTVAE_E_VERSION;
  case ErrorKind::not_found:
    return CTVAE_E_NOT_FOUND;
  }
  return CTVAE_E_INTERNAL;
}

ctvae_status status_of(RequestError const &e)
{
  if (e.status() == 404)
  {
    return CTVAE_E_NOT_FOUND;
  }
  return e.code() == "unknown_value" ? CTVAE_E_ENCODING : CTVAE_E_ARGUMENT;
}

template <typename F>
ctvae_status guarded(F &&body)
{
  last_error.clear();
  try
  {
    body();
    return CTVAE_OK;
  }
  catch (Error const &e)
  {
    last_error = e.what();
    return status_of(e.kind());
  }
  catch (RequestError const &e)
  {
    last_error = e.field().empty() ? std::string(e.what()) : e.field() + ": " + e.what();
    return status_of(e);
  }
  catch (std::bad_alloc const &)
  {
    last_error = "out of memory";
    return CTVAE_E_INTERNAL;
  }
  catch (std::exception const &e)
  {
    last_error = e.what();
    return CTVAE_E_INTERNAL;
  }
}

void require(bool ok, char const *what)
{
  if (!ok)
  {
    fail(ErrorKind::argument, std::string(what) + " must not be NULL");
  }
}

char *dup_string(std::string const &s)
{
  auto *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (out == nullptr)
  {
    throw std::bad_alloc();
  }
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char **out, nlohmann::json const &j)
{
  if (out != nullptr)
  {
    *out = dup_string(j.dump(2));
  }
}

nlohmann::json parse_json(char const *text, char const *what)
{
  if (text == nullptr || *text == '\0')
  {
    return nlohmann::json::object();
  }
  try
  {
    return nlohmann::json::parse(text);
  }
  catch (nlohmann::json::parse_error const &e)
  {
    fail(ErrorKind::parse, std::string(what) + ": " + e.what());
  }
}

std::string opt(char const *s)
{
  return s == nullptr ? std::string{} : std::string(s);
}

ServiceOptions unbounded()
{
  ServiceOptions o;
  o.max_n = std::numeric_limits<std::uint32_t>::max();
  return o;
}

}  // namespace

extern "C" {

char const *ctvae_version(void)
{
  return kVersion;
}

char const *ctvae_status_name(ctvae_status status)
{
  switch (status)
  {
  case CTVAE_OK:
    return "ok";
  case CTVAE_E_ARGUMENT:
    return "argument";
  case CTVAE_E_PARSE:
    return "parse";
  case CTVAE_E_VALIDATION:
    return "validation";
  case CTVAE_E_HEADER:
    return "header";
  case CTVAE_E_ENCODING:
    return "encoding";
  case CTVAE_E_CONTRACT:
    return "contract";
  case CTVAE_E_NUMERIC:
    return "numeric";
  case CTVAE_E_TRAINING:
    return "training";
  case CTVAE_E_IO:
    return "io";
  case CTVAE_E_CORRUPTION:
    return "corruption";
  case CTVAE_E_VERSION:
    return "version";
  case CTVAE_E_NOT_FOUND:
    return "not_found";
  case CTVAE_E_INTERNAL:
    return "internal";
  }
  return "unknown";
}

char const *ctvae_last_error(void)
{
  return last_error.c_str();
}

void ctvae_string_free(char *s)
{
  std::free(s);
}

void ctvae_set_log_callback(ctvae_log_fn fn, void *user)
{
  std::lock_guard<std::mutex> lock(log_mutex);
  log_fn   = fn;
  log_user = user;
}

ctvae_status ctvae_split_csv(char const *data_csv, char const *schema_path, size_t test_groups, uint64_t seed,
                             char const *train_out, char const *test_out, char **result_json)
{
  return guarded([&] {
    require(data_csv && schema_path && train_out && test_out, "split paths");
    auto const schema = load_schema(schema_path);
    auto const data   = ingest_table(data_csv, schema);
    auto const split  = split_by_group(data, test_groups, seed);
    write_table(split.train, train_out);
    write_table(split.test, test_out);
    emit(result_json, {{"train_products", split.train.distinct_groups()},
                       {"test_products", split.test.distinct_groups()},
                       {"seed", seed}});
  });
}

ctvae_status ctvae_fit(char const *data_csv, char const *schema_path, char const *config_json, ctvae_model **out,
                       char **history_json)
{
  return guarded([&] {
    require(data_csv && schema_path && out, "fit arguments");
    *out              = nullptr;
    auto const cfg    = train_config_from_json(parse_json(config_json, "training config"));
    auto const schema = load_schema(schema_path);
    auto const data   = ingest_table(data_csv, schema);
    auto       result = train(data, cfg, [](EpochRecord const &e) {
      log_line("epoch " + std::to_string(e.epoch) + " train " + csv::format_number(e.train_loss) + " validation " +
               csv::format_number(e.validation_loss));
    });
    log_line("best epoch " + std::to_string(result.history.best_epoch));
    auto handle     = std::make_unique<ctvae_model>();
    handle->service = std::make_shared<Service const>(std::move(result.model), std::vector<Product>{}, unbounded());
    emit(history_json, to_json(result.history));
    *out = handle.release();
  });
}

ctvae_status ctvae_model_load(char const *path, char const *catalog_csv, ctvae_model **out)
{
  return guarded([&] {
    require(path && out, "model path");
    *out            = nullptr;
    auto handle     = std::make_unique<ctvae_model>();
    handle->service = std::make_shared<Service const>(load_service(path, opt(catalog_csv), unbounded()));
    *out            = handle.release();
  });
}

ctvae_status ctvae_model_save(ctvae_model const *model, char const *path)
{
  return guarded([&] {
    require(model && path, "model and path");
    save_model(model->service->model(), path);
  });
}

void ctvae_model_free(ctvae_model *model)
{
  delete model;
}

ctvae_status ctvae_model_schema_json(ctvae_model const *model, char **out)
{
  return guarded([&] {
    require(model && out, "model and output");
    emit(out, model->service->schema());
  });
}

ctvae_status ctvae_model_products_json(ctvae_model const *model, char **out)
{
  return guarded([&] {
    require(model && out, "model and output");
    emit(out, model->service->products_json());
  });
}

ctvae_status ctvae_generate(ctvae_model const *model, char const *request_json, ctvae_batch **out)
{
  return guarded([&] {
    require(model && out, "model and output");
    *out       = nullptr;
    auto batch = model->service->generate_csv(parse_json(request_json, "generate request"));
    auto h     = std::make_unique<ctvae_batch>();
    h->rows    = batch.provenance.at("n").get<std::size_t>();
    h->csv     = std::move(batch.csv);
    h->provenance = std::move(batch.provenance);
    *out          = h.release();
  });
}

ctvae_status ctvae_whatif(ctvae_model const *model, char const *request_json, char **response_json)
{
  return guarded([&] {
    require(model && response_json, "model and output");
    emit(response_json, model->service->whatif(parse_json(request_json, "what-if request")));
  });
}

size_t ctvae_batch_rows(ctvae_batch const *batch)
{
  return batch == nullptr ? 0 : batch->rows;
}

ctvae_status ctvae_batch_write_csv(ctvae_batch const *batch, char const *path)
{
  return guarded([&] {
    require(batch && path, "batch and path");
    csv::write_text_file(path, batch->csv);
  });
}

ctvae_status ctvae_batch_provenance_json(ctvae_batch const *batch, char **out)
{
  return guarded([&] {
    require(batch && out, "batch and output");
    emit(out, batch->provenance);
  });
}

void ctvae_batch_free(ctvae_batch *batch)
{
  delete batch;
}

ctvae_status ctvae_summarize_csv(char const *csv_path, char const *column, char const *options_json, char **out)
{
  return guarded([&] {
    require(csv_path && column && out, "summarize arguments");
    auto const opts = parse_json(options_json, "summary options");
    std::size_t bins = 10;
    if (opts.contains("bins"))
    {
      auto const b = opts.at("bins").get<std::int64_t>();
      if (b < 1)
      {
        fail(ErrorKind::argument, "bins must be >= 1");
      }
      bins = static_cast<std::size_t>(b);
    }

    ColumnSpec     spec{column, ColumnKind::discrete, ColumnRole::target, {}};
    SummaryOptions summary;
    summary.bins = bins;
    if (opts.contains("model"))
    {
      auto const model = load_model(opts.at("model").get<std::string>());
      auto const idx   = model.bundle.schema.find(column);
      if (!idx)
      {
        fail(ErrorKind::argument, std::string("model has no column '") + column + "'");
      }
      spec      = model.bundle.schema.columns[*idx];
      spec.role = ColumnRole::target;
      spec.vocabulary.clear();
      summary = summary_options_for(model.bundle, column, bins);
    }
    else
    {
      auto const doc = csv::read_file(csv_path);
      auto const it  = std::find(doc.header.begin(), doc.header.end(), std::string(column));
      if (it == doc.header.end())
      {
        fail(ErrorKind::argument, std::string("column '") + column + "' not found in " + csv_path);
      }
      auto const pos     = static_cast<std::size_t>(it - doc.header.begin());
      bool       numeric = !doc.records.empty();
      for (auto const &r : doc.records)
      {
        double v = 0;
        if (pos >= r.size() || !csv::parse_number(r[pos], v))
        {
          numeric = false;
          break;
        }
      }
      spec.kind = numeric ? ColumnKind::continuous : ColumnKind::discrete;
    }
    if (opts.contains("kind"))
    {
      auto const kind = opts.at("kind").get<std::string>();
      if (kind != "continuous" && kind != "discrete")
      {
        fail(ErrorKind::argument, "kind must be 'continuous' or 'discrete'");
      }
      spec.kind = kind == "continuous" ? ColumnKind::continuous : ColumnKind::discrete;
    }
    if (opts.contains("range"))
    {
      auto const r = opts.at("range").get<std::vector<double>>();
      if (r.size() != 2 || !(r[0] < r[1]))
      {
        fail(ErrorKind::argument, "range must be [lo, hi] with lo < hi");
      }
      summary.range = std::make_pair(r[0], r[1]);
    }
    if (spec.kind == ColumnKind::continuous)
    {
      summary.categories.reset();
    }
    else
    {
      summary.range.reset();
    }
    Schema one;
    one.columns.push_back(spec);
    IngestOptions lenient;
    lenient.lenient_header = true;
    auto const data        = ingest_table(csv_path, one, lenient);
    emit(out, to_json(summarize(data, column, summary)));
  });
}

ctvae_status ctvae_evaluate_csv(char const *real_csv, char const *synth_csv, char const *schema_path, char **out)
{
  return guarded([&] {
    require(real_csv && synth_csv && schema_path && out, "evaluate arguments");
    auto const schema  = load_schema(schema_path);
    auto const targets = schema.restricted_to(ColumnRole::target);
    IngestOptions lenient;
    lenient.lenient_header = true;
    auto const real        = ingest_table(real_csv, targets, lenient);
    auto const synth       = ingest_table(synth_csv, targets, lenient);
    emit(out, to_json(mean_complement(real, synth, targets)));
  });
}

ctvae_status ctvae_make_corpus(char const *spec_path, uint64_t seed, char const *out_dir)
{
  return guarded([&] {
    require(out_dir, "output directory");
    CorpusSpec spec = flip_oracle_spec();
    if (spec_path != nullptr)
    {
      auto const text = csv::read_text_file(spec_path);
      spec            = corpus_spec_from_json(parse_json(text.c_str(), spec_path));
    }
    make_synthetic_corpus(spec, seed, out_dir);
  });
}

ctvae_status ctvae_sweep(char const *config_path, char const *output_dir, char **summary_json)
{
  return guarded([&] {
    require(config_path, "config path");
    auto cfg = load_experiment_config(config_path);
    if (output_dir != nullptr)
    {
      cfg.output_dir = output_dir;
    }
    if (cfg.output_dir.empty())
    {
      fail(ErrorKind::argument, "no output directory given");
    }
    auto const report = run_holdout(cfg, [](std::string const &stage) { log_line(stage); });
    emit_report(report, cfg.output_dir);
    nlohmann::json rows = nlohmann::json::array();
    for (auto const &row : sweep_table(report))
    {
      nlohmann::json j = {{"preset", row.preset}, {"ctvae", to_json(row.ctvae)}};
      if (row.tvae)
      {
        j["tvae"] = to_json(*row.tvae);
      }
      rows.push_back(std::move(j));
    }
    emit(summary_json, {{"output_dir", cfg.output_dir}, {"rows", std::move(rows)}});
  });
}

ctvae_status ctvae_serve(char const *model_path, char const *catalog_csv, char const *bind_address, size_t max_n)
{
  return guarded([&] {
    require(model_path && bind_address, "model path and bind address");
    ServiceOptions o;
    if (max_n != 0)
    {
      o.max_n = max_n;
    }
    serve(model_path, opt(catalog_csv), bind_address, o);
  });
}

}  // extern "C"
