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
#include "ctvae/serialize.hpp"
#include "ctvae/service.hpp"
#include "ctvae/version.hpp"

#include "doctest.h"
#include "fixtures.hpp"
#include "httplib.h"

#include <chrono>
#include <fstream>
#include <future>
#include <set>
#include <thread>

using namespace ctvae;
using namespace ctvae::testing;
using nlohmann::json;

namespace {

std::shared_ptr<Service const> const &shared_service()
{
  static auto const svc = std::make_shared<Service const>(train_tiny(3, 3).model);
  return svc;
}

Service const &svc()
{
  return *shared_service();
}

std::string first_product()
{
  return svc().products().front().id;
}

// Runs fn and returns the RequestError it throws.
RequestError rejection(auto &&fn)
{
  try
  {
    fn();
  }
  catch (RequestError const &e)
  {
    return e;
  }
  FAIL("request was accepted");
  return RequestError(0, "", "", "");
}

struct RunningServer
{
  Server            server;
  std::thread       thread;
  httplib::Client   client;

  RunningServer()
    : server(shared_service())
    , client("127.0.0.1", server.bind("127.0.0.1", 0))
  {
    thread = std::thread([this] { server.listen(); });
    for (int i = 0; i < 200; ++i)
    {
      if (client.Get("/health"))
      {
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
  ~RunningServer()
  {
    server.stop();
    thread.join();
  }
};

}  // namespace

TEST_CASE("health, schema and products")
{
  auto const h = svc().health();
  CHECK(h["status"] == "ready");
  CHECK(h["model_id"] == model_id(svc().model()));
  CHECK(h["version"] == kVersion);

  auto const s = svc().schema();
  CHECK(s["group_key"] == "product_id");
  CHECK(s["conditioning"] == true);
  CHECK(s["max_n"] == 50000);
  std::set<std::string> names;
  for (auto const &c : s["columns"])
  {
    names.insert(c["name"]);
    if (c["name"] == "children")
    {
      CHECK(c["role"] == "target");
      CHECK(c["vocabulary"] == json::array({"with", "without"}));
    }
    if (c["name"] == "age")
    {
      CHECK(c.contains("min"));
      CHECK(c.contains("modes"));
    }
  }
  CHECK(names == std::set<std::string>{"g", "container", "volume", "children", "age", "season", "purpose"});

  auto const p = svc().products_json();
  CHECK(p["products"].size() == svc().products().size());
  CHECK(p["products"][0]["id"] == first_product());
  CHECK(p["products"][0]["conditions"].contains("g"));
}

TEST_CASE("what-if with empty overrides leaves the distribution unchanged")
{
  auto const r = svc().whatif({{"base_product", first_product()}, {"n", 500}, {"seed", 9}});
  CHECK(r["baseline"] == r["variant"]);
  REQUIRE(r["deltas"].size() == 4);
  for (auto const &d : r["deltas"])
  {
    for (double x : d["deltas"])
    {
      CHECK(x == 0.0);
    }
  }
  CHECK(r["provenance"]["seed"] == 9);
  CHECK(r["provenance"]["n"] == 500);
  CHECK(r["provenance"]["base_product"] == first_product());
  CHECK(r["provenance"]["model_id"] == svc().model_id());
}

TEST_CASE("what-if with an override")
{
  auto const base = svc().products().front().conditions;
  std::string const other = std::get<std::string>(base.at("g")) == "0" ? "1" : "0";
  auto const r = svc().whatif({{"base_product", first_product()},
                               {"overrides", {{"g", other}}},
                               {"n", 2000},
                               {"seed", 4},
                               {"columns", {"children"}},
                               {"bins", 5}});
  REQUIRE(r["variant"].size() == 1);
  CHECK(r["variant"][0]["column"] == "children");
  CHECK(r["provenance"]["overrides"]["g"] == other);
  double total = 0;
  for (double x : r["deltas"][0]["deltas"])
  {
    total += x;
  }
  CHECK(std::abs(total) < 1e-9);
}

TEST_CASE("explicit base mapping")
{
  json base = json::object();
  for (auto const &[k, v] : svc().products().front().conditions)
  {
    base[k] = cell_to_json(v);
  }
  auto const by_map = svc().whatif({{"base", base}, {"n", 100}, {"seed", 2}});
  auto const by_id  = svc().whatif({{"base_product", first_product()}, {"n", 100}, {"seed", 2}});
  CHECK(by_map["variant"] == by_id["variant"]);
  CHECK(by_map["provenance"]["base_product"].is_null());
}

TEST_CASE("request validation")
{
  auto const id = first_product();
  auto const check = [](json const &body, int status, std::string const &field) {
    auto const e = rejection([&] { svc().whatif(body); });
    CHECK(e.status() == status);
    CHECK(e.field() == field);
    CHECK(e.to_json()["error"]["field"] == field);
  };
  check({{"base_product", id}, {"n", 0}}, 400, "n");
  check({{"base_product", id}, {"n", 50001}}, 400, "n");
  check({{"base_product", id}, {"n", -3}}, 400, "n");
  check({{"base_product", id}, {"n", "ten"}}, 400, "n");
  check({{"base_product", "NOPE"}}, 404, "base_product");
  check({{"n", 10}}, 400, "base_product");
  check({{"base_product", id}, {"overrides", {{"flavor", "x"}}}}, 400, "overrides.flavor");
  check({{"base_product", id}, {"overrides", {{"children", "with"}}}}, 400, "overrides.children");
  check({{"base_product", id}, {"overrides", {{"container", "glass"}}}}, 400, "overrides.container");
  check({{"base_product", id}, {"columns", {"children", "g"}}}, 400, "columns[1]");
  check({{"base_product", id}, {"bins", 0}}, 400, "bins");
  check({{"base", {{"zzz", 1}}}}, 400, "base.zzz");

  auto const e = rejection([&] { svc().whatif({{"base_product", id}, {"overrides", {{"container", "glass"}}}}); });
  CHECK(e.code() == "unknown_value");
  CHECK(rejection([&] { svc().whatif({{"base_product", "NOPE"}}); }).code() == "not_found");
}

TEST_CASE("omitted seed is drawn and reported")
{
  auto const a = svc().parse_request({{"base_product", first_product()}});
  CHECK(a.n == 2000);
  CHECK(a.seed < (std::uint64_t{1} << 53));
  auto const r = svc().whatif({{"base_product", first_product()}, {"n", 50}});
  CHECK(r["provenance"]["seed"].is_number_unsigned());
}

TEST_CASE("provenance reproduces the response")
{
  auto const r = svc().whatif({{"base_product", first_product()},
                               {"overrides", {{"volume", 500}}},
                               {"n", 300},
                               {"columns", {"age"}}});
  auto const &prov = r["provenance"];

  CellMap base, overrides;
  auto const &schema = svc().model().bundle.schema;
  for (auto const &[k, v] : prov["base"].items())
  {
    base[k] = cell_from_json(schema.columns[schema.index_of(k)], v);
  }
  for (auto const &[k, v] : prov["overrides"].items())
  {
    overrides[k] = cell_from_json(schema.columns[schema.index_of(k)], v);
  }
  auto const cond  = build_condition(svc().model().bundle, base, overrides);
  auto const batch = generate(svc().model(), cond, prov["n"].get<std::size_t>(), prov["seed"].get<std::uint64_t>());
  auto const sum   = summarize(batch.rows, "age", summary_options_for(svc().model().bundle, "age"));
  CHECK(to_json(sum) == r["variant"][0]);

  auto const csv = svc().generate_csv({{"base_product", first_product()},
                                       {"overrides", {{"volume", 500}}},
                                       {"n", 300},
                                       {"seed", prov["seed"]}});
  CHECK(csv.csv == format_table(batch.rows));
}

TEST_CASE("concurrent identical requests agree")
{
  json const body{{"base_product", first_product()}, {"n", 400}, {"seed", 77}};
  std::vector<std::future<json>> futures;
  for (int i = 0; i < 4; ++i)
  {
    futures.push_back(std::async(std::launch::async, [&] { return svc().whatif(body); }));
  }
  auto const first = futures[0].get();
  for (std::size_t i = 1; i < futures.size(); ++i)
  {
    CHECK(futures[i].get() == first);
  }
}

TEST_CASE("catalog file")
{
  auto const dir = scratch_dir("catalog");
  {
    std::ofstream out(dir / "products.csv");
    out << "product_id,g,container,volume,ignored\n"
        << "NEW1,1,pouch,500,x\n"
        << "NEW1,0,can,350,x\n";
  }
  auto const cat = load_catalog((dir / "products.csv").string(), svc().model().bundle.schema);
  REQUIRE(cat.size() == 1);
  CHECK(cat[0].id == "NEW1");
  CHECK(cat[0].conditions.at("container") == Cell{"pouch"});
  CHECK(cat[0].conditions.at("volume") == Cell{500.0});

  Service with(svc().model(), cat);
  CHECK(with.products().size() == svc().products().size() + 1);
  CHECK_NOTHROW(with.whatif({{"base_product", "NEW1"}, {"n", 10}, {"seed", 1}}));
}

TEST_CASE("startup fails on a corrupt model")
{
  auto const dir = scratch_dir("badmodel");
  {
    std::ofstream out(dir / "m.ctvm", std::ios::binary);
    out << "CTVMgarbage";
  }
  try
  {
    load_service((dir / "m.ctvm").string(), "");
    FAIL("expected startup failure");
  }
  catch (Error const &e)
  {
    CHECK(e.kind() == ErrorKind::corruption);
  }
  save_model(svc().model(), (dir / "good.ctvm").string());
  auto const ok = load_service((dir / "good.ctvm").string(), "");
  CHECK(ok.model_id() == svc().model_id());
}

TEST_CASE("bind address parsing")
{
  CHECK(parse_bind_address("0.0.0.0:9000") == std::pair<std::string, int>{"0.0.0.0", 9000});
  CHECK(parse_bind_address("8081") == std::pair<std::string, int>{"127.0.0.1", 8081});
  CHECK_THROWS_AS(parse_bind_address("host:port"), Error);
  CHECK_THROWS_AS(parse_bind_address("host:70000"), Error);
}

TEST_CASE("http endpoints")
{
  RunningServer s;
  auto &c = s.client;

  auto health = c.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(json::parse(health->body)["status"] == "ready");

  auto schema = c.Get("/schema");
  REQUIRE(schema);
  CHECK(json::parse(schema->body) == svc().schema());

  auto products = c.Get("/products");
  REQUIRE(products);
  CHECK(json::parse(products->body) == svc().products_json());

  json const body{{"base_product", first_product()}, {"n", 200}, {"seed", 5}};
  auto       w = c.Post("/whatif", body.dump(), "application/json");
  REQUIRE(w);
  CHECK(w->status == 200);
  CHECK(json::parse(w->body) == svc().whatif(body));

  auto g = c.Post("/generate", body.dump(), "application/json");
  REQUIRE(g);
  CHECK(g->status == 200);
  CHECK(g->get_header_value("Content-Type").rfind("text/csv", 0) == 0);
  CHECK(g->get_header_value("Content-Disposition").find("attachment") != std::string::npos);
  CHECK(g->body == svc().generate_csv(body).csv);
  CHECK(json::parse(g->get_header_value("X-Ctvae-Provenance"))["seed"] == 5);

  auto bad_n = c.Post("/whatif", json{{"base_product", first_product()}, {"n", 0}}.dump(), "application/json");
  REQUIRE(bad_n);
  CHECK(bad_n->status == 400);
  CHECK(json::parse(bad_n->body)["error"]["field"] == "n");

  auto missing = c.Post("/whatif", json{{"base_product", "NOPE"}}.dump(), "application/json");
  REQUIRE(missing);
  CHECK(missing->status == 404);

  auto malformed = c.Post("/whatif", "{not json", "application/json");
  REQUIRE(malformed);
  CHECK(malformed->status == 400);
  CHECK(json::parse(malformed->body).contains("error"));

  // Concurrent clients receive identical responses.
  std::vector<std::future<std::string>> futures;
  for (int i = 0; i < 4; ++i)
  {
    futures.push_back(std::async(std::launch::async, [&] {
      httplib::Client own("127.0.0.1", s.server.port());
      auto            r = own.Post("/whatif", body.dump(), "application/json");
      return r ? r->body : std::string();
    }));
  }
  auto const first = futures[0].get();
  CHECK(!first.empty());
  for (std::size_t i = 1; i < futures.size(); ++i)
  {
    CHECK(futures[i].get() == first);
  }
}
