#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "gus/bench.hpp"
#include "gus/engine.hpp"

namespace gus::server {

nlohmann::json neighborhood_to_json(const engine::Neighborhood& n);
engine::Neighborhood neighborhood_from_json(const nlohmann::json& j);
nlohmann::json neighbors_request_to_json(const engine::NeighborsRequest& r);
engine::NeighborsRequest neighbors_request_from_json(const nlohmann::json& j);

// HTTP/JSON facade over one Engine:
//   POST   /v1/points         upsert, body = point        -> {"ok", "existed"}
//   DELETE /v1/points/{id}                                -> {"ok", "existed"}
//   POST   /v1/neighbors      {"id"|"point", "k", "tau"}  -> neighborhood
//   POST   /v1/admin/reload   {"bundle": dir}             -> {"ok"}
//   GET    /v1/healthz                                    -> {"ok"}
//   GET    /v1/stats                                      -> engine stats
// Validation failures map to 400, unknown ids to 404, the rest to 500,
// all with {"error": message} bodies.
class Server {
 public:
  explicit Server(engine::Engine& engine);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Serves on a free port from a background thread; returns the port.
  int start_background(const std::string& host);
  // Blocking serve loop.
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Client half of the same protocol; used by the remote benchmark mode.
// Connection failures surface as std::runtime_error("engine unreachable...").
class HttpEngineClient : public bench::EngineClient {
 public:
  HttpEngineClient(const std::string& host, int port);
  ~HttpEngineClient() override;

  engine::Neighborhood neighbors(const engine::NeighborsRequest& request) override;
  bool upsert(const Point& p) override;
  bool remove(const std::string& id);
  void reload(const std::string& bundle_dir);
  nlohmann::json stats();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gus::server
