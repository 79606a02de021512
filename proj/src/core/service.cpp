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

#include "ctvae/service.hpp"

#include "ctvae/error.hpp"
#include "ctvae/serialize.hpp"
#include "ctvae/version.hpp"

#include "httplib.h"

#include <algorithm>
#include <random>

namespace ctvae {

RequestError::RequestError(int status, std::string code, std::string field, std::string const &message)
  : std::runtime_error(message)
  , status_(status)
  , code_(std::move(code))
  , field_(std::move(field))
{}

nlohmann::json RequestError::to_json() const
{
  return {{"error", {{"code", code_}, {"message", what()}, {"field", field_}}}};
}

namespace {

[[noreturn]] void reject(std::string const &field, std::string const &message, int status = 400,
                         std::string code = "invalid_request")
{
  throw RequestError(status, std::move(code), field, message);
}

std::string code_for(ErrorKind kind)
{
  switch (kind)
  {
  case ErrorKind::encoding:
    return "unknown_value";
  case ErrorKind::not_found:
    return "not_found";
  default:
    return "invalid_request";
  }
}

nlohmann::json cells_json(CellMap const &cells)
{
  nlohmann::json out = nlohmann::json::object();
  for (auto const &[k, v] : cells)
  {
    out[k] = cell_to_json(v);
  }
  return out;
}

}  // namespace

std::vector<Product> load_catalog(std::string const &path, Schema const &schema)
{
  Schema sub     = schema.restricted_to(ColumnRole::condition);
  sub.group_key  = schema.group_key;
  if (sub.group_key.empty())
  {
    fail(ErrorKind::validation, "catalog '" + path + "': the model has no group key column");
  }
  IngestOptions opts;
  opts.lenient_header = true;
  auto data           = ingest_table(path, sub, opts);
  if (!data.has_groups())
  {
    fail(ErrorKind::header, "catalog '" + path + "': missing column '" + sub.group_key + "'");
  }
  std::vector<Product> out;
  auto const           cols = sub.indices(ColumnRole::condition);
  for (auto const &group : data.distinct_groups())
  {
    auto const rows = data.rows_of(group);
    Product    p{group, {}};
    for (auto c : cols)
    {
      p.conditions.emplace(sub.columns[c].name, data.cell(rows.front(), c));
    }
    out.push_back(std::move(p));
  }
  return out;
}

Service::Service(Model model, std::vector<Product> extra_catalog, ServiceOptions options)
  : model_(std::move(model))
  , options_(options)
{
  if (options_.max_n == 0)
  {
    fail(ErrorKind::argument, "max_n must be >= 1");
  }
  model_id_ = ctvae::model_id(model_);
  catalog_  = model_.catalog;
  for (auto &p : extra_catalog)
  {
    auto it = std::find_if(catalog_.begin(), catalog_.end(), [&](Product const &q) { return q.id == p.id; });
    if (it != catalog_.end())
    {
      *it = std::move(p);
    }
    else
    {
      catalog_.push_back(std::move(p));
    }
  }
  std::sort(catalog_.begin(), catalog_.end(), [](Product const &a, Product const &b) { return a.id < b.id; });
}

Product const *Service::find_product(std::string const &id) const
{
  for (auto const &p : catalog_)
  {
    if (p.id == id)
    {
      return &p;
    }
  }
  return nullptr;
}

nlohmann::json Service::health() const
{
  return {{"status", "ready"}, {"model_id", model_id_}, {"version", kVersion}};
}

nlohmann::json Service::schema() const
{
  auto const    &bundle = model_.bundle;
  nlohmann::json cols   = nlohmann::json::array();
  for (std::size_t i = 0; i < bundle.schema.columns.size(); ++i)
  {
    auto const    &c = bundle.schema.columns[i];
    nlohmann::json j = {{"name", c.name}, {"role", to_string(c.role)}, {"kind", to_string(c.kind)}};
    if (auto const *t = std::get_if<DiscreteTransform>(&bundle.transforms[i]))
    {
      j["vocabulary"] = t->vocabulary;
    }
    else
    {
      auto const &ct = std::get<ContinuousTransform>(bundle.transforms[i]);
      j["min"]       = ct.min;
      j["max"]       = ct.max;
      j["modes"]     = ct.mixture.components();
    }
    cols.push_back(std::move(j));
  }
  return {{"model_id", model_id_},
          {"group_key", bundle.schema.group_key},
          {"conditioning", model_.conditioning},
          {"max_n", options_.max_n},
          {"columns", std::move(cols)}};
}

nlohmann::json Service::products_json() const
{
  nlohmann::json out = nlohmann::json::array();
  for (auto const &p : catalog_)
  {
    out.push_back({{"id", p.id}, {"conditions", cells_json(p.conditions)}});
  }
  return {{"products", std::move(out)}};
}

GenerationRequest Service::parse_request(nlohmann::json const &body) const
{
  if (!body.is_object())
  {
    reject("", "request body must be a JSON object");
  }
  auto const &schema = model_.bundle.schema;

  GenerationRequest req;
  CellMap           base;
  if (auto it = body.find("base_product"); it != body.end() && !it->is_null())
  {
    if (!it->is_string())
    {
      reject("base_product", "base_product must be a string");
    }
    auto const *p = find_product(it->get<std::string>());
    if (p == nullptr)
    {
      reject("base_product", "unknown product '" + it->get<std::string>() + "'", 404, "not_found");
    }
    req.base_product = p->id;
    base             = p->conditions;
  }
  else if (auto b = body.find("base"); b != body.end() && !b->is_null())
  {
    if (!b->is_object())
    {
      reject("base", "base must be an object of column values");
    }
    for (auto const &[k, v] : b->items())
    {
      auto const idx = schema.find(k);
      if (!idx)
      {
        reject("base." + k, "unknown column '" + k + "'");
      }
      auto const &col = schema.columns[*idx];
      if (col.role != ColumnRole::condition)
      {
        continue;
      }
      try
      {
        base.emplace(k, cell_from_json(col, v));
      }
      catch (Error const &e)
      {
        reject("base." + k, e.what());
      }
    }
  }
  else if (model_.conditioning && schema.count(ColumnRole::condition) > 0)
  {
    reject("base_product", "either base_product or base is required");
  }

  CellMap overrides;
  if (auto it = body.find("overrides"); it != body.end() && !it->is_null())
  {
    if (!it->is_object())
    {
      reject("overrides", "overrides must be an object of column values");
    }
    for (auto const &[k, v] : it->items())
    {
      auto const idx = schema.find(k);
      if (!idx)
      {
        reject("overrides." + k, "unknown column '" + k + "'");
      }
      auto const &col = schema.columns[*idx];
      if (col.role != ColumnRole::condition)
      {
        reject("overrides." + k, "column '" + k + "' is not a condition column");
      }
      try
      {
        overrides.emplace(k, cell_from_json(col, v));
      }
      catch (Error const &e)
      {
        reject("overrides." + k, e.what());
      }
    }
  }

  // Check categories per column so the error can name the field.
  auto check_known = [&](CellMap const &cells, std::string const &prefix) {
    for (auto const &[k, v] : cells)
    {
      auto const idx = schema.index_of(k);
      if (auto const *t = std::get_if<DiscreteTransform>(&model_.bundle.transforms[idx]))
      {
        if (!t->find(std::get<std::string>(v)))
        {
          reject(prefix + k, "value '" + std::get<std::string>(v) + "' was not seen during training", 400,
                 "unknown_value");
        }
      }
    }
  };
  check_known(base, req.base_product ? "base_product." : "base.");
  check_known(overrides, "overrides.");

  if (model_.conditioning)
  {
    try
    {
      req.condition = build_condition(model_.bundle, base, overrides);
    }
    catch (Error const &e)
    {
      reject(req.base_product ? "base_product" : "base", e.what(), 400, code_for(e.kind()));
    }
  }
  else
  {
    req.condition.spec = ConditionSpec{base, overrides};
  }

  req.n = options_.default_n;
  if (auto it = body.find("n"); it != body.end() && !it->is_null())
  {
    if (!it->is_number_integer())
    {
      reject("n", "n must be an integer");
    }
    auto const n = it->get<std::int64_t>();
    if (n < 1 || static_cast<std::uint64_t>(n) > options_.max_n)
    {
      reject("n", "n must be in [1, " + std::to_string(options_.max_n) + "], got " + std::to_string(n));
    }
    req.n = static_cast<std::size_t>(n);
  }
  else if (req.n > options_.max_n)
  {
    req.n = options_.max_n;
  }

  if (auto it = body.find("seed"); it != body.end() && !it->is_null())
  {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0))
    {
      reject("seed", "seed must be a non-negative integer");
    }
    req.seed = it->get<std::uint64_t>();
  }
  else
  {
    std::random_device rd;
    req.seed = (static_cast<std::uint64_t>(rd()) << 32U) ^ rd();
    req.seed &= (std::uint64_t{1} << 53U) - 1U;  // exact in JSON doubles
  }

  auto const targets = schema.restricted_to(ColumnRole::target);
  if (auto it = body.find("columns"); it != body.end() && !it->is_null())
  {
    if (!it->is_array())
    {
      reject("columns", "columns must be an array of target column names");
    }
    for (std::size_t i = 0; i < it->size(); ++i)
    {
      auto const field = "columns[" + std::to_string(i) + "]";
      if (!(*it)[i].is_string())
      {
        reject(field, "column names must be strings");
      }
      auto const name = (*it)[i].get<std::string>();
      if (!targets.find(name))
      {
        reject(field, "'" + name + "' is not a target column");
      }
      req.columns.push_back(name);
    }
  }
  else
  {
    for (auto const &c : targets.columns)
    {
      req.columns.push_back(c.name);
    }
  }

  req.bins = options_.summary_bins;
  if (auto it = body.find("bins"); it != body.end() && !it->is_null())
  {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 1 || it->get<std::int64_t>() > 1000)
    {
      reject("bins", "bins must be an integer in [1, 1000]");
    }
    req.bins = it->get<std::size_t>();
  }
  return req;
}

namespace {

nlohmann::json provenance_json(Service const &svc, GenerationRequest const &req)
{
  nlohmann::json j = {{"model_id", svc.model_id()},
                      {"seed", req.seed},
                      {"n", req.n},
                      {"base", cells_json(req.condition.spec.base)},
                      {"overrides", cells_json(req.condition.spec.overrides)}};
  j["base_product"] = req.base_product ? nlohmann::json(*req.base_product) : nlohmann::json(nullptr);
  return j;
}

}  // namespace

nlohmann::json Service::whatif(nlohmann::json const &body) const
{
  auto const req = parse_request(body);

  CompiledCondition baseline_cond;
  if (model_.conditioning)
  {
    baseline_cond = build_condition(model_.bundle, req.condition.spec.base);
  }
  auto const baseline = generate(model_, baseline_cond, req.n, req.seed);
  auto const variant  = generate(model_, req.condition, req.n, req.seed);

  nlohmann::json b = nlohmann::json::array();
  nlohmann::json v = nlohmann::json::array();
  nlohmann::json d = nlohmann::json::array();
  for (auto const &col : req.columns)
  {
    auto const opts = summary_options_for(model_.bundle, col, req.bins);
    auto const sb   = summarize(baseline.rows, col, opts);
    auto const sv   = summarize(variant.rows, col, opts);
    b.push_back(to_json(sb));
    v.push_back(to_json(sv));
    d.push_back(to_json(compare(sb, sv)));
  }
  return {{"baseline", std::move(b)},
          {"variant", std::move(v)},
          {"deltas", std::move(d)},
          {"provenance", provenance_json(*this, req)}};
}

Service::CsvBatch Service::generate_csv(nlohmann::json const &body) const
{
  auto const req   = parse_request(body);
  auto const batch = generate(model_, req.condition, req.n, req.seed);
  return {format_table(batch.rows), provenance_json(*this, req)};
}

Service load_service(std::string const &model_path, std::string const &catalog_path, ServiceOptions options)
{
  auto                 model = load_model(model_path);
  std::vector<Product> extra;
  if (!catalog_path.empty())
  {
    extra = load_catalog(catalog_path, model.bundle.schema);
  }
  return Service(std::move(model), std::move(extra), options);
}

struct Server::Impl
{
  std::shared_ptr<Service const> service;
  httplib::Server                http;
};

namespace {

void send_json(httplib::Response &res, nlohmann::json const &j, int status = 200)
{
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

template <typename F>
void guarded(httplib::Response &res, F &&body)
{
  try
  {
    body();
  }
  catch (RequestError const &e)
  {
    send_json(res, e.to_json(), e.status());
  }
  catch (Error const &e)
  {
    auto const status = e.kind() == ErrorKind::not_found ? 404 : 400;
    send_json(res, RequestError(status, code_for(e.kind()), "", e.what()).to_json(), status);
  }
  catch (std::exception const &e)
  {
    send_json(res, RequestError(500, "internal", "", e.what()).to_json(), 500);
  }
}

nlohmann::json parse_body(httplib::Request const &req)
{
  try
  {
    return nlohmann::json::parse(req.body.empty() ? std::string("{}") : req.body);
  }
  catch (nlohmann::json::parse_error const &e)
  {
    reject("", std::string("malformed JSON body: ") + e.what());
  }
}

}  // namespace

Server::Server(std::shared_ptr<Service const> service)
  : impl_(std::make_unique<Impl>())
{
  impl_->service = std::move(service);
  auto &http     = impl_->http;
  auto  svc      = impl_->service;

  http.Get("/health", [svc](httplib::Request const &, httplib::Response &res) {
    guarded(res, [&] { send_json(res, svc->health()); });
  });
  http.Get("/schema", [svc](httplib::Request const &, httplib::Response &res) {
    guarded(res, [&] { send_json(res, svc->schema()); });
  });
  http.Get("/products", [svc](httplib::Request const &, httplib::Response &res) {
    guarded(res, [&] { send_json(res, svc->products_json()); });
  });
  http.Post("/whatif", [svc](httplib::Request const &req, httplib::Response &res) {
    guarded(res, [&] { send_json(res, svc->whatif(parse_body(req))); });
  });
  http.Post("/generate", [svc](httplib::Request const &req, httplib::Response &res) {
    guarded(res, [&] {
      auto batch = svc->generate_csv(parse_body(req));
      res.set_header("Content-Disposition", "attachment; filename=\"synthetic.csv\"");
      res.set_header("X-Ctvae-Provenance", batch.provenance.dump());
      res.set_content(std::move(batch.csv), "text/csv");
    });
  });
}

Server::~Server()
{
  stop();
}

int Server::bind(std::string const &host, int port)
{
  int const bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound < 0)
  {
    fail(ErrorKind::io, "cannot bind " + host + ":" + std::to_string(port));
  }
  port_ = bound;
  return bound;
}

void Server::listen()
{
  if (port_ < 0)
  {
    fail(ErrorKind::contract, "Server::listen called before bind");
  }
  impl_->http.listen_after_bind();
}

void Server::stop()
{
  if (impl_)
  {
    impl_->http.stop();
  }
}

std::pair<std::string, int> parse_bind_address(std::string const &address)
{
  std::string host = "127.0.0.1";
  std::string port = address;
  if (auto colon = address.rfind(':'); colon != std::string::npos)
  {
    host = address.substr(0, colon);
    port = address.substr(colon + 1);
  }
  int value = -1;
  try
  {
    std::size_t used = 0;
    value            = std::stoi(port, &used);
    if (used != port.size())
    {
      value = -1;
    }
  }
  catch (std::exception const &)
  {
    value = -1;
  }
  if (host.empty() || value < 0 || value > 65535)
  {
    fail(ErrorKind::argument, "invalid bind address '" + address + "' (expected host:port)");
  }
  return {host, value};
}

void serve(std::string const &model_path, std::string const &catalog_path, std::string const &bind_address,
           ServiceOptions options)
{
  auto const [host, port] = parse_bind_address(bind_address);
  auto       svc          = std::make_shared<Service const>(load_service(model_path, catalog_path, options));
  Server     server(svc);
  server.bind(host, port);
  server.listen();
}

}  // namespace ctvae
