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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Pass criterion numbers to run a subset.

#include "ctvae/corpus.hpp"
#include "ctvae/csv.hpp"
#include "ctvae/error.hpp"
#include "ctvae/experiment.hpp"
#include "ctvae/gmm.hpp"
#include "ctvae/metrics.hpp"
#include "ctvae/sampler.hpp"
#include "ctvae/serialize.hpp"
#include "ctvae/train.hpp"
#include "ctvae/transform.hpp"

#include "oracles.hpp"
#include "toy_models.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace ctvae;
using namespace ctvae::testing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome
{
  bool        pass = false;
  std::string detail;
};

std::string fmt(char const *format, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

void note(std::string const &line)
{
  std::cerr << "  .. " << line << std::endl;
}

// The corpus every model-level criterion shares: 30 products x 200 rows.
std::uint64_t constexpr kCorpusSeed = 7;

Corpus const &flip_corpus()
{
  static Corpus const c = make_corpus(flip_oracle_spec(), kCorpusSeed);
  return c;
}

ExperimentConfig desk_config()
{
  return load_experiment_config(std::string(CTVAE_CONFIG_DIR) + "/desk_sweep.json");
}

// ---------------------------------------------------------------------------

Outcome gradient_fidelity()
{
  auto const      t0 = Clock::now();
  std::mt19937_64 gen(2024);
  double          worst = 0;
  std::size_t     largest = 0;
  for (int i = 0; i < 100; ++i)
  {
    auto const m = random_toy_model(gen);
    largest      = std::max(largest, m.params.scalar_count());
    worst        = std::max(worst, elbo_fd_error(m, random_batch(m, gen, 3)));
  }
  double const secs = seconds_since(t0);
  return {worst < 1e-4 && largest <= 50 && secs < 60,
          fmt("max relative error %.3g over 100 toy models (<= %zu params), %.1f s", worst, largest, secs)};
}

Outcome kl_identities()
{
  std::mt19937_64                        gen(77);
  std::uniform_real_distribution<double> um(-2, 2), us(0.3, 2.5);
  std::normal_distribution<double>       n(0, 1);
  double const                           log_sqrt_2pi = 0.5 * std::log(2 * M_PI);
  int                                    within       = 0;
  double                                 worst_z      = 0;
  for (int trial = 0; trial < 50; ++trial)
  {
    int const       d = 1 + static_cast<int>(gen() % 4);
    Eigen::VectorXd mu(d), s(d);
    for (int j = 0; j < d; ++j)
    {
      mu(j) = um(gen);
      s(j)  = us(gen);
    }
    int const draws = 100000;
    double    sum = 0, sumsq = 0;
    for (int k = 0; k < draws; ++k)
    {
      double diff = 0;
      for (int j = 0; j < d; ++j)
      {
        double const e = n(gen);
        double const z = mu(j) + s(j) * e;
        diff += (-0.5 * e * e - std::log(s(j)) - log_sqrt_2pi) - (-0.5 * z * z - log_sqrt_2pi);
      }
      sum += diff;
      sumsq += diff * diff;
    }
    double const mean = sum / draws;
    double const se   = std::sqrt((sumsq / draws - mean * mean) / draws);
    double const z    = std::abs(mean - kl_standard_normal(mu, s)) / se;
    worst_z           = std::max(worst_z, z);
    within += z <= 3 ? 1 : 0;
  }
  double const at_prior = kl_standard_normal(Eigen::VectorXd::Zero(16), Eigen::VectorXd::Ones(16));
  return {within == 50 && std::abs(at_prior) <= 1e-12,
          fmt("%d/50 within 3 SE (worst %.2f SE), KL at prior %.1e", within, worst_z, at_prior)};
}

Outcome metric_oracles()
{
  std::mt19937_64 gen(99);
  double          worst = 0;
  for (int trial = 0; trial < 1000; ++trial)
  {
    std::size_t const                  na = 1 + gen() % 50, nb = 1 + gen() % 50;
    std::normal_distribution<double>   n(0, 1);
    std::uniform_int_distribution<int> small(0, 6);
    bool const                         ties = trial % 3 == 0;
    std::vector<double>                a(na), b(nb);
    for (auto &x : a)
    {
      x = ties ? small(gen) : n(gen);
    }
    for (auto &x : b)
    {
      x = ties ? small(gen) : 0.5 + 1.5 * n(gen);
    }
    std::vector<std::string> ca(na), cb(nb);
    for (auto &c : ca)
    {
      c = std::string(1, static_cast<char>('a' + gen() % 6));
    }
    for (auto &c : cb)
    {
      c = std::string(1, static_cast<char>('b' + gen() % 7));
    }
    worst = std::max(worst, std::abs(ks_complement(a, b) - brute_ks(a, b)));
    worst = std::max(worst, std::abs(tv_complement(ca, cb) - brute_tv(ca, cb)));
  }
  using V = std::vector<double>;
  using S = std::vector<std::string>;
  bool const hand = ks_complement(V{1, 2, 3}, V{1, 2, 3}) == 1.0 && ks_complement(V{0, 0, 0}, V{1, 1, 1}) == 0.0 &&
                    ks_complement(V{1, 2, 3, 4}, V{1, 2, 3, 8}) == 0.75 &&
                    tv_complement(S{"a", "b"}, S{"b", "a"}) == 1.0 && tv_complement(S{"a"}, S{"b"}) == 0.0 &&
                    tv_complement(S{"a", "b"}, S{"a", "a"}) == 0.5;
  return {worst <= 1e-12 && hand,
          fmt("max |library - brute force| %.1e over 1000 instances; worked examples %s", worst,
              hand ? "exact" : "WRONG")};
}

Outcome transform_round_trip()
{
  std::mt19937_64                        gen(5);
  std::uniform_real_distribution<double> u(-1, 1), mean(-100, 100), sd(0.1, 20);
  double                                 worst = 0;
  std::size_t                            checked = 0;
  for (int trial = 0; trial < 200; ++trial)
  {
    ContinuousTransform t;
    std::size_t const   k = 1 + gen() % 4;
    for (std::size_t j = 0; j < k; ++j)
    {
      t.mixture.weights.push_back(1.0 / static_cast<double>(k));
      t.mixture.means.push_back(mean(gen));
      t.mixture.stds.push_back(sd(gen));
    }
    std::sort(t.mixture.means.begin(), t.mixture.means.end());
    Rng rng(gen());
    for (int i = 0; i < 50; ++i)
    {
      std::size_t const j = gen() % k;
      double const      v = t.mixture.means[j] + 3.9 * u(gen) * t.mixture.stds[j];
      auto const        enc = encode_continuous(v, t, ModeSelection::sample, &rng);
      std::size_t const mode = static_cast<std::size_t>(
          std::max_element(enc.begin() + 1, enc.end()) - enc.begin() - 1);
      if (std::abs(enc[0]) >= 1.0)
      {
        continue;  // clamped
      }
      double const back = decode_continuous(enc[0], std::span(enc).subspan(1), t);
      worst             = std::max(worst, std::abs(back - v));
      ++checked;
      (void)mode;
    }
  }
  DiscreteTransform d{{"can", "plastic_bottle", "pouch", "with", "without"}};
  bool              discrete_exact = true;
  for (auto const &c : d.vocabulary)
  {
    auto const enc  = encode_discrete(c, d);
    discrete_exact  = discrete_exact && d.vocabulary[argmax(enc)] == c;
  }
  auto const x = two_clusters(42);
  GmmOptions opts;
  opts.seed     = 1;
  auto const g  = fit_gaussian_mixture(x, opts);
  bool const gm = g.components() == 2 && std::abs(g.means[0]) < 0.1 && std::abs(g.means[1] - 10) < 0.1;
  return {worst <= 1e-9 && checked > 9000 && discrete_exact && gm,
          fmt("max continuous error %.1e over %zu values; discrete %s; mixture means (%.4f, %.4f), K=%zu", worst,
              checked, discrete_exact ? "exact" : "WRONG", g.means.front(), g.means.back(), g.components())};
}

// Shared by criteria 5 and 7.
struct FlipModel
{
  Model  model;
  double train_seconds = 0;
  std::size_t epochs   = 0;
};

FlipModel const &flip_model()
{
  static FlipModel const fm = [] {
    TrainConfig cfg;
    cfg.arch   = ArchitectureSpec::preset(64);
    cfg.seed   = 1;
    auto const t0 = Clock::now();
    auto       r  = train(flip_corpus().data, cfg);
    return FlipModel{std::move(r.model), seconds_since(t0), r.history.epochs.size()};
  }();
  return fm;
}

Outcome conditional_recovery()
{
  auto const &fm   = flip_model();
  auto const &m    = fm.model;
  auto const  spec = flip_oracle_spec();
  note(fmt("preset-64 model trained in %.1f s (%zu epochs)", fm.train_seconds, fm.epochs));

  bool                         ok = fm.train_seconds <= 300;
  std::ostringstream           detail;
  std::map<std::string, std::string> majority;
  detail << fmt("trained %.0f s;", fm.train_seconds);
  auto const base = m.catalog.front().conditions;
  for (std::string g : {"0", "1"})
  {
    auto const cond  = build_condition(m.bundle, base, {{"g", Cell{g}}});
    auto const batch = generate(m, cond, 10000, 1000 + std::stoul(g));
    auto const truth = sample_truth(spec, cond.spec.merged(), 10000, 2000 + std::stoul(g));
    auto const score = mean_complement(truth, batch.rows, batch.rows.schema());
    for (auto const &c : score.columns)
    {
      double const need = c.kind == ColumnKind::discrete ? 0.85 : 0.80;
      ok                = ok && c.score >= need;
      detail << fmt(" g=%s %s %s=%.3f", g.c_str(), c.name.c_str(), c.kind == ColumnKind::discrete ? "TV" : "KS",
                    c.score);
    }
    auto const sum = summarize(batch.rows, "children");
    majority[g]    = sum.labels[argmax(sum.frequencies)];
    detail << fmt(" (with=%.3f);", sum.frequencies[0]);
  }
  bool const flip = majority["0"] != majority["1"];
  detail << " majority " << majority["0"] << " -> " << majority["1"];
  return {ok && flip, detail.str()};
}

Outcome conditioning_advantage()
{
  auto        base = desk_config();
  base.presets     = {64};
  base.baseline    = true;
  int         wins = 0;
  std::ostringstream detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
  {
    auto cfg        = base;
    cfg.split_seed  = seed;
    cfg.train_seed  = seed;
    cfg.sample_seed = seed;
    auto const t0   = Clock::now();
    auto const r    = run_holdout(cfg, flip_corpus().data);
    double const c  = r.find("ctvae", 64)->aggregate.average_mc;
    double const t  = r.find("tvae", 64)->aggregate.average_mc;
    wins += c > t ? 1 : 0;
    note(fmt("seed %d: ctvae %.4f tvae %.4f (%.0f s)", static_cast<int>(seed), c, t, seconds_since(t0)));
    detail << fmt(" %.3f/%.3f", c, t);
  }
  return {wins >= 4, fmt("ctvae beats tvae in %d/5 seeds (ctvae/tvae:", wins) + detail.str() + ")"};
}

std::map<std::string, std::string> files_under(fs::path const &dir)
{
  std::map<std::string, std::string> out;
  for (auto const &e : fs::recursive_directory_iterator(dir))
  {
    if (e.is_regular_file())
    {
      out[fs::relative(e.path(), dir).string()] = csv::read_text_file(e.path().string());
    }
  }
  return out;
}

Outcome protocol_determinism()
{
  auto cfg            = desk_config();
  cfg.presets         = {64};
  cfg.baseline        = true;
  cfg.train.max_epochs = 10;
  auto const a = run_holdout(cfg, flip_corpus().data);
  auto const b = run_holdout(cfg, flip_corpus().data);

  auto const dir = fs::temp_directory_path() / ("ctvae-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  emit_report(a, (dir / "a").string());
  emit_report(b, (dir / "b").string());
  bool const reports = to_json(a).dump() == to_json(b).dump() && files_under(dir / "a") == files_under(dir / "b");

  auto const &m     = flip_model().model;
  auto const  bytes = serialize_model(m);
  auto const  back  = deserialize_model(bytes);
  auto const  cond  = build_condition(m.bundle, m.catalog.front().conditions);
  bool const  gen   = format_table(generate(m, cond, 10000, 5).rows) == format_table(generate(back, cond, 10000, 5).rows);
  bool const  same  = back == m && serialize_model(back) == bytes;
  fs::remove_all(dir);
  return {reports && gen && same, fmt("reports %s; save/load model %s, generation %s",
                                      reports ? "bit-identical" : "DIFFER", same ? "identical" : "DIFFERS",
                                      gen ? "bit-identical" : "DIFFERS")};
}

Outcome dimension_sweep_run()
{
  auto       cfg = desk_config();
  auto const t0  = Clock::now();
  auto const sw  = dimension_sweep(cfg, {64, 128, 256, 512}, flip_corpus().data,
                                   [](std::string const &s) {
                                     if (s.rfind("train", 0) == 0)
                                     {
                                       note(s);
                                     }
                                   });
  double const secs = seconds_since(t0);

  auto const dir = fs::temp_directory_path() / ("ctvae-sweep-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  emit_report(sw.report, dir.string());
  auto const table = csv::read_file((dir / "aggregate.csv").string());
  bool const shaped = sw.table.size() == 4 && table.records.size() == 4 && fs::exists(dir / "report.json") &&
                      fs::exists(dir / "product_scores.csv");
  fs::remove_all(dir);

  std::ostringstream detail;
  int                best      = 0;
  double             best_mc   = -1;
  for (auto const &row : sw.table)
  {
    detail << fmt(" %d: %.3f/%.3f", row.preset, row.ctvae.average_mc, row.ctvae.weighted_average_mc);
    if (row.ctvae.average_mc > best_mc)
    {
      best_mc = row.ctvae.average_mc;
      best    = row.preset;
    }
  }
  bool   thresholds = true;
  double worst_d = 1, worst_c = 1;
  for (auto const &p : sw.report.find("ctvae", best)->products)
  {
    for (auto const &c : p.score.columns)
    {
      if (c.kind == ColumnKind::discrete)
      {
        worst_d = std::min(worst_d, c.score);
      }
      else
      {
        worst_c = std::min(worst_c, c.score);
      }
    }
  }
  thresholds = worst_d >= 0.85 && worst_c >= 0.80;
  return {secs < 1800 && shaped && thresholds,
          fmt("4 presets in %.0f s; avg/weighted MC", secs) + detail.str() +
              fmt("; best preset %d: min TV %.3f, min KS %.3f", best, worst_d, worst_c)};
}

}  // namespace

int main(int argc, char **argv)
{
  std::vector<std::pair<char const *, std::function<Outcome()>>> const criteria{
      {"gradient fidelity", gradient_fidelity},
      {"KL identities", kl_identities},
      {"metric oracles", metric_oracles},
      {"transform round trip", transform_round_trip},
      {"conditional recovery", conditional_recovery},
      {"conditioning advantage", conditioning_advantage},
      {"protocol determinism", protocol_determinism},
      {"dimension sweep", dimension_sweep_run},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i)
  {
    only.insert(std::atoi(argv[i]));
  }

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i)
  {
    int const n = static_cast<int>(i + 1);
    if (!only.empty() && only.count(n) == 0)
    {
      continue;
    }
    Outcome out;
    try
    {
      out = criteria[i].second();
    }
    catch (std::exception const &e)
    {
      out = {false, std::string("error: ") + e.what()};
    }
    failures += out.pass ? 0 : 1;
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << criteria[i].first
              << "): " << out.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
