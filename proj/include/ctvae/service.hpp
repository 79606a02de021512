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

#include "ctvae/model.hpp"
#include "ctvae/sampler.hpp"

#include "json.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ctvae {

struct ServiceOptions
{
  std::size_t max_n        = 50000;
  std::size_t default_n    = 2000;
  std::size_t summary_bins = 10;
};

/// A rejected request. `status` is the HTTP status to answer with and
/// `field` the request path that caused it ("" when not field specific).
class RequestError : public std::runtime_error
{
public:
  RequestError(int status, std::string code, std::string field, std::string const &message);

  int                status() const noexcept { return status_; }
  std::string const &code() const noexcept { return code_; }
  std::string const &field() const noexcept { return field_; }

  nlohmann::json to_json() const;

private:
  int         status_;
  std::string code_;
  std::string field_;
};

/// Products listed in a catalog CSV: the group key column plus every
/// condition column of the model. The first row of each product wins.
std::vector<Product> load_catalog(std::string const &path, Schema const &schema);

struct GenerationRequest
{
  std::optional<std::string> base_product;
  CompiledCondition          condition;
  std::size_t                n    = 0;
  std::uint64_t              seed = 0;
  std::vector<std::string>   columns;
  std::size_t                bins = 10;
};

/// Request handling without transport. The model is immutable after
/// construction, so every method may be called concurrently.
class Service
{
public:
  Service(Model model, std::vector<Product> extra_catalog = {}, ServiceOptions options = {});

  Model const                &model() const noexcept { return model_; }
  std::string const          &model_id() const noexcept { return model_id_; }
  std::vector<Product> const &products() const noexcept { return catalog_; }
  ServiceOptions const       &options() const noexcept { return options_; }

  nlohmann::json health() const;
  nlohmann::json schema() const;
  nlohmann::json products_json() const;

  /// Validates a what-if or generate request body. Throws RequestError.
  GenerationRequest parse_request(nlohmann::json const &body) const;

  nlohmann::json whatif(nlohmann::json const &body) const;

  struct CsvBatch
  {
    std::string    csv;
    nlohmann::json provenance;
  };
  CsvBatch generate_csv(nlohmann::json const &body) const;

private:
  Product const *find_product(std::string const &id) const;

  Model                model_;
  std::string          model_id_;
  std::vector<Product> catalog_;
  ServiceOptions       options_;
};

/// Loads the model (and optional catalog) before anything is bound, so a bad
/// model file fails at startup.
Service load_service(std::string const &model_path, std::string const &catalog_path,
                     ServiceOptions options = {});

/// HTTP front end over a Service.
class Server
{
public:
  explicit Server(std::shared_ptr<Service const> service);
  ~Server();

  Server(Server const &)            = delete;
  Server &operator=(Server const &) = delete;

  /// Binds host:port (port 0 picks a free port) and returns the bound port.
  int  bind(std::string const &host, int port);
  void listen();  // blocks until stop()
  void stop();
  int  port() const noexcept { return port_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int                   port_ = -1;
};

/// Splits "host:port"; a bare port binds 127.0.0.1.
std::pair<std::string, int> parse_bind_address(std::string const &address);

/// Loads, binds and serves until the process is stopped.
void serve(std::string const &model_path, std::string const &catalog_path, std::string const &bind_address,
           ServiceOptions options = {});

}  // namespace ctvae
