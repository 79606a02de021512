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

#include "ctvae/experiment.hpp"

#include "ctvae/csv.hpp"
#include "ctvae/error.hpp"
#include "ctvae/rng.hpp"
#include "ctvae/version.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

namespace ctvae {

namespace fs = std::filesystem;

void validate(ExperimentConfig const &cfg)
{
  if (cfg.samples_per_product == 0)
  {
    fail(ErrorKind::argument, "experiment: samples_per_product must be >= 1");
  }
  if (cfg.presets.empty())
  {
    fail(ErrorKind::argument, "experiment: at least one preset is required");
  }
  for (int p : cfg.presets)
  {
    (void)ArchitectureSpec::preset(p);
  }
  if (cfg.test_groups == 0)
  {
    fail(ErrorKind::argument, "experiment: test_groups must be >= 1");
  }
  validate(cfg.train);
}

nlohmann::json to_json(ExperimentConfig const &cfg)
{
  auto train = to_json(cfg.train);
  train.erase("arch");
  train.erase("conditioning");
  train.erase("seed");
  return {{"data", cfg.data_path},
          {"schema", cfg.schema_path},
          {"output_dir", cfg.output_dir},
          {"test_groups", cfg.test_groups},
          {"samples_per_product", cfg.samples_per_product},
          {"presets", cfg.presets},
          {"baseline", cfg.baseline},
          {"split_seed", cfg.split_seed},
          {"train_seed", cfg.train_seed},
          {"sample_seed", cfg.sample_seed},
          {"summary_bins", cfg.summary_bins},
          {"train", std::move(train)}};
}

ExperimentConfig experiment_config_from_json(nlohmann::json const &doc, std::string const &base_dir)
{
  ExperimentConfig cfg;
  auto resolve = [&](std::string const &p) {
    if (p.empty() || base_dir.empty() || fs::path(p).is_absolute())
    {
      return p;
    }
    return (fs::path(base_dir) / p).lexically_normal().string();
  };
  try
  {
    cfg.data_path           = resolve(doc.at("data").get<std::string>());
    cfg.schema_path         = resolve(doc.at("schema").get<std::string>());
    cfg.output_dir          = resolve(doc.value("output_dir", std::string{}));
    cfg.test_groups         = doc.value("test_groups", cfg.test_groups);
    cfg.samples_per_product = doc.value("samples_per_product", cfg.samples_per_product);
    cfg.presets             = doc.value("presets", cfg.presets);
    cfg.baseline            = doc.value("baseline", cfg.baseline);
    cfg.split_seed          = doc.value("split_seed", cfg.split_seed);
    cfg.train_seed          = doc.value("train_seed", cfg.train_seed);
    cfg.sample_seed         = doc.value("sample_seed", cfg.sample_seed);
    cfg.summary_bins        = doc.value("summary_bins", cfg.summary_bins);
    if (auto it = doc.find("train"); it != doc.end())
    {
      cfg.train = train_config_from_json(*it, cfg.train);
    }
  }
  catch (nlohmann::json::exception const &e)
  {
    fail(ErrorKind::parse, std::string("experiment config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(std::string const &path)
{
  nlohmann::json doc;
  try
  {
    doc = nlohmann::json::parse(csv::read_text_file(path));
  }
  catch (nlohmann::json::parse_error const &e)
  {
    fail(ErrorKind::parse, "experiment config '" + path + "': " + e.what());
  }
  return experiment_config_from_json(doc, fs::path(path).parent_path().string());
}

RunEntry const *ExperimentReport::find(std::string const &model, int preset) const
{
  for (auto const &r : runs)
  {
    if (r.model == model && r.preset == preset)
    {
      return &r;
    }
  }
  return nullptr;
}

nlohmann::json to_json(ExperimentReport const &report)
{
  nlohmann::json runs = nlohmann::json::array();
  for (auto const &r : report.runs)
  {
    nlohmann::json products = nlohmann::json::array();
    for (auto const &p : r.products)
    {
      products.push_back(to_json(p.score));
    }
    runs.push_back({{"model", r.model},
                    {"preset", r.preset},
                    {"aggregate", to_json(r.aggregate)},
                    {"products", std::move(products)},
                    {"history", to_json(r.history)}});
  }
  return {{"code_version", report.code_version},
          {"config", report.config},
          {"train_products", report.train_products},
          {"test_products", report.test_products},
          {"runs", std::move(runs)}};
}

namespace {

// Runs `body`, prefixing any failure with the stage name.
template <typename F>
auto stage(std::string const &name, StageCallback const &on_stage, F &&body)
{
  if (on_stage)
  {
    on_stage(name);
  }
  try
  {
    return body();
  }
  catch (Error const &e)
  {
    throw Error(e.kind(), "stage '" + name + "': " + e.what());
  }
}

}  // namespace

ExperimentReport run_holdout(ExperimentConfig const &cfg, Dataset const &data, StageCallback const &on_stage)
{
  validate(cfg);
  auto split = stage("split", on_stage, [&] { return split_by_group(data, cfg.test_groups, cfg.split_seed); });

  ExperimentReport report;
  report.config       = to_json(cfg);
  report.code_version = kVersion;
  report.train_products = split.train.distinct_groups();
  report.test_products  = split.test.distinct_groups();
  std::sort(report.train_products.begin(), report.train_products.end());
  std::sort(report.test_products.begin(), report.test_products.end());

  std::set<std::string> const train_ids(report.train_products.begin(), report.train_products.end());
  for (auto const &id : report.test_products)
  {
    if (train_ids.count(id) != 0)
    {
      fail(ErrorKind::contract, "holdout leakage: test product '" + id + "' appears in training rows");
    }
  }

  auto const &schema      = data.schema();
  auto const  target_cols = schema.restricted_to(ColumnRole::target);
  auto const  test_catalog = product_catalog(split.test);

  std::vector<bool> variants{true};
  if (cfg.baseline)
  {
    variants.push_back(false);
  }

  for (int preset : cfg.presets)
  {
    for (bool conditioning : variants)
    {
      std::string const label = std::string(conditioning ? "ctvae" : "tvae") + "-" + std::to_string(preset);
      TrainConfig       tcfg  = cfg.train;
      tcfg.arch               = ArchitectureSpec::preset(preset);
      tcfg.conditioning       = conditioning;
      tcfg.seed               = cfg.train_seed;

      auto trained = stage("train " + label, on_stage, [&] { return train(split.train, tcfg); });

      RunEntry entry;
      entry.model   = conditioning ? "ctvae" : "tvae";
      entry.preset  = preset;
      entry.history = trained.history;

      for (std::size_t p = 0; p < report.test_products.size(); ++p)
      {
        auto const &id   = report.test_products[p];
        auto const  prod = std::find_if(test_catalog.begin(), test_catalog.end(),
                                        [&](Product const &x) { return x.id == id; });
        auto const  rows = split.test.rows_of(id);
        auto const  real = split.test.select(rows);

        auto batch = stage("generate " + label + " " + id, on_stage, [&] {
          CompiledCondition cond;
          if (conditioning)
          {
            cond = build_condition(trained.model.bundle, prod->conditions);
          }
          return generate(trained.model, cond, cfg.samples_per_product,
                          derive_seed(cfg.sample_seed, {p}));
        });

        ProductRun run;
        run.score = stage("score " + label + " " + id, on_stage,
                          [&] { return mean_complement(real, batch.rows, target_cols, id); });
        for (auto const &col : target_cols.columns)
        {
          auto const opts = summary_options_for(trained.model.bundle, col.name, cfg.summary_bins);
          run.histograms.push_back(
              {col.name, summarize(real, col.name, opts), summarize(batch.rows, col.name, opts)});
        }
        entry.products.push_back(std::move(run));
      }

      std::vector<ProductScore> scores;
      for (auto const &p : entry.products)
      {
        scores.push_back(p.score);
      }
      entry.aggregate = aggregate(scores);
      report.runs.push_back(std::move(entry));
    }
  }
  return report;
}

ExperimentReport run_holdout(ExperimentConfig const &cfg, StageCallback const &on_stage)
{
  auto data = stage("load", on_stage, [&] {
    auto schema = load_schema(cfg.schema_path);
    return ingest_table(cfg.data_path, schema);
  });
  return run_holdout(cfg, data, on_stage);
}

std::vector<SweepRow> sweep_table(ExperimentReport const &report)
{
  std::vector<SweepRow> rows;
  std::vector<int>      presets;
  for (auto const &r : report.runs)
  {
    if (std::find(presets.begin(), presets.end(), r.preset) == presets.end())
    {
      presets.push_back(r.preset);
    }
  }
  for (int preset : presets)
  {
    SweepRow row;
    row.preset = preset;
    if (auto const *c = report.find("ctvae", preset))
    {
      row.ctvae = c->aggregate;
    }
    if (auto const *t = report.find("tvae", preset))
    {
      row.tvae = t->aggregate;
    }
    rows.push_back(row);
  }
  return rows;
}

SweepResult dimension_sweep(ExperimentConfig cfg, std::vector<int> const &presets, Dataset const &data,
                            StageCallback const &on_stage)
{
  if (presets.empty())
  {
    fail(ErrorKind::argument, "dimension_sweep: no presets");
  }
  cfg.presets = presets;
  SweepResult out;
  out.report = run_holdout(cfg, data, on_stage);
  out.table  = sweep_table(out.report);
  return out;
}

SweepResult dimension_sweep(ExperimentConfig cfg, std::vector<int> const &presets,
                            StageCallback const &on_stage)
{
  if (presets.empty())
  {
    fail(ErrorKind::argument, "dimension_sweep: no presets");
  }
  cfg.presets = presets;
  SweepResult out;
  out.report = run_holdout(cfg, on_stage);
  out.table  = sweep_table(out.report);
  return out;
}

std::vector<std::string> emit_report(ExperimentReport const &report, std::string const &dir)
{
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "histograms", ec);
  if (ec)
  {
    fail(ErrorKind::io, "cannot create report directory '" + dir + "': " + ec.message());
  }
  std::vector<std::string> written;
  auto write = [&](fs::path const &rel, std::string const &text) {
    auto const path = (fs::path(dir) / rel).string();
    csv::write_text_file(path, text);
    written.push_back(path);
  };

  write("report.json", to_json(report).dump(2) + "\n");

  auto const table     = sweep_table(report);
  bool const have_tvae = std::any_of(table.begin(), table.end(), [](SweepRow const &r) { return r.tvae.has_value(); });
  std::ostringstream agg;
  std::vector<std::string> header{"preset", "ctvae_average_mc", "ctvae_weighted_average_mc"};
  if (have_tvae)
  {
    header.insert(header.end(), {"tvae_average_mc", "tvae_weighted_average_mc"});
  }
  csv::write_record(agg, header);
  nlohmann::json agg_rows = nlohmann::json::array();
  for (auto const &row : table)
  {
    std::vector<std::string> fields{std::to_string(row.preset), csv::format_number(row.ctvae.average_mc),
                                    csv::format_number(row.ctvae.weighted_average_mc)};
    nlohmann::json j = {{"preset", row.preset}, {"ctvae", to_json(row.ctvae)}};
    if (have_tvae)
    {
      fields.push_back(row.tvae ? csv::format_number(row.tvae->average_mc) : "");
      fields.push_back(row.tvae ? csv::format_number(row.tvae->weighted_average_mc) : "");
      if (row.tvae)
      {
        j["tvae"] = to_json(*row.tvae);
      }
    }
    csv::write_record(agg, fields);
    agg_rows.push_back(std::move(j));
  }
  write("aggregate.csv", agg.str());
  write("aggregate.json",
        nlohmann::json{{"code_version", report.code_version}, {"config", report.config}, {"rows", agg_rows}}.dump(2) +
            "\n");

  std::ostringstream scores;
  std::vector<std::string> score_header{"model", "preset", "product", "purchase_count", "mc"};
  if (!report.runs.empty() && !report.runs.front().products.empty())
  {
    for (auto const &c : report.runs.front().products.front().score.columns)
    {
      score_header.push_back(c.name);
    }
  }
  csv::write_record(scores, score_header);
  for (auto const &run : report.runs)
  {
    for (auto const &p : run.products)
    {
      std::vector<std::string> fields{run.model, std::to_string(run.preset), p.score.product,
                                      std::to_string(p.score.purchase_count), csv::format_number(p.score.mc)};
      for (auto const &c : p.score.columns)
      {
        fields.push_back(csv::format_number(c.score));
      }
      csv::write_record(scores, fields);
    }
  }
  write("product_scores.csv", scores.str());

  for (auto const &run : report.runs)
  {
    for (auto const &p : run.products)
    {
      nlohmann::json cols = nlohmann::json::array();
      for (auto const &h : p.histograms)
      {
        cols.push_back({{"column", h.column},
                        {"kind", to_string(h.observed.kind)},
                        {"labels", h.observed.labels},
                        {"observed", h.observed.frequencies},
                        {"synthetic", h.synthetic.frequencies}});
      }
      nlohmann::json doc = {{"model", run.model},
                            {"preset", run.preset},
                            {"product", p.score.product},
                            {"columns", std::move(cols)}};
      write(fs::path("histograms") / (run.model + "-" + std::to_string(run.preset) + "-" + p.score.product + ".json"),
            doc.dump(2) + "\n");
    }
  }
  return written;
}

}  // namespace ctvae
