#include "gus/server.hpp"

#include <nlohmann/json.hpp>

#include <httplib.h>

#include <thread>

#include "gus/corpus_io.hpp"

namespace gus::server {

namespace {

nlohmann::json error_body(const std::string& message) {
  return {{"error", message}};
}

void reply_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

// Runs a handler and maps exceptions onto HTTP statuses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const engine::NotFoundError& e) {
    reply_json(res, 404, error_body(e.what()));
  } catch (const std::invalid_argument& e) {
    reply_json(res, 400, error_body(e.what()));
  } catch (const nlohmann::json::exception& e) {
    reply_json(res, 400, error_body(e.what()));
  } catch (const std::exception& e) {
    reply_json(res, 500, error_body(e.what()));
  }
}

}  // namespace

nlohmann::json neighborhood_to_json(const engine::Neighborhood& n) {
  nlohmann::json neighbors = nlohmann::json::array();
  for (const auto& entry : n.neighbors) {
    neighbors.push_back({{"id", entry.id},
                         {"dist", entry.index_dist},
                         {"similarity", entry.similarity}});
  }
  return {{"neighbors", std::move(neighbors)},
          {"k", n.k_requested},
          {"tau", n.tau ? nlohmann::json(*n.tau) : nlohmann::json()},
          {"latency_us", n.latency_us}};
}

engine::Neighborhood neighborhood_from_json(const nlohmann::json& j) {
  engine::Neighborhood n;
  for (const auto& entry : j.at("neighbors")) {
    n.neighbors.push_back({entry.at("id").get<std::string>(),
                           entry.at("dist").get<double>(),
                           entry.at("similarity").get<double>()});
  }
  n.k_requested = j.at("k").get<std::size_t>();
  if (!j.at("tau").is_null()) n.tau = j.at("tau").get<double>();
  n.latency_us = j.value("latency_us", 0.0);
  return n;
}

nlohmann::json neighbors_request_to_json(const engine::NeighborsRequest& r) {
  nlohmann::json j = nlohmann::json::object();
  if (r.id) j["id"] = *r.id;
  if (r.point) j["point"] = io::point_to_json(*r.point);
  if (r.k) j["k"] = *r.k;
  if (r.tau) j["tau"] = *r.tau;
  return j;
}

engine::NeighborsRequest neighbors_request_from_json(const nlohmann::json& j) {
  engine::NeighborsRequest r;
  if (j.contains("id")) r.id = j.at("id").get<std::string>();
  if (j.contains("point")) r.point = io::point_from_json(j.at("point"));
  if (j.contains("k")) r.k = j.at("k").get<std::size_t>();
  if (j.contains("tau")) r.tau = j.at("tau").get<double>();
  return r;
}

struct Server::Impl {
  explicit Impl(engine::Engine& engine) : engine(engine) { bind_routes(); }

  void bind_routes() {
    http.Post("/v1/points", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        Point p = io::point_from_json(nlohmann::json::parse(req.body));
        const bool existed = engine.upsert(std::move(p));
        reply_json(res, 200, {{"ok", true}, {"existed", existed}});
      });
    });
    http.Delete(R"(/v1/points/(.+))",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] {
                    const bool existed = engine.remove(req.matches[1].str());
                    reply_json(res, 200, {{"ok", true}, {"existed", existed}});
                  });
                });
    http.Post("/v1/neighbors", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto request = neighbors_request_from_json(nlohmann::json::parse(req.body));
        reply_json(res, 200, neighborhood_to_json(engine.neighbors(request)));
      });
    });
    http.Post("/v1/admin/reload",
              [this](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  const auto body = nlohmann::json::parse(req.body);
                  engine.reload(body.at("bundle").get<std::string>());
                  reply_json(res, 200, {{"ok", true}});
                });
              });
    http.Get("/v1/healthz", [](const httplib::Request&, httplib::Response& res) {
      reply_json(res, 200, {{"ok", true}});
    });
    http.Get("/v1/stats", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { reply_json(res, 200, engine.stats()); });
    });
  }

  engine::Engine& engine;
  httplib::Server http;
  std::thread thread;
};

Server::Server(engine::Engine& engine) : impl_(std::make_unique<Impl>(engine)) {}

Server::~Server() { stop(); }

int Server::start_background(const std::string& host) {
  const int port = impl_->http.bind_to_any_port(host.c_str());
  if (port < 0) throw std::runtime_error("cannot bind server socket on " + host);
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return port;
}

void Server::run(const std::string& host, int port) {
  if (!impl_->http.listen(host.c_str(), port)) {
    throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
  }
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

struct HttpEngineClient::Impl {
  Impl(const std::string& host, int port) : client(host, port) {
    client.set_connection_timeout(5);
    client.set_read_timeout(60);
  }

  nlohmann::json expect_json(const httplib::Result& result, const std::string& what) {
    if (!result) {
      throw std::runtime_error("engine unreachable (" + what + "): " +
                               httplib::to_string(result.error()));
    }
    nlohmann::json body;
    if (!result->body.empty()) body = nlohmann::json::parse(result->body);
    if (result->status != 200) {
      throw std::runtime_error(what + " failed with status " +
                               std::to_string(result->status) + ": " +
                               body.value("error", std::string("unknown error")));
    }
    return body;
  }

  httplib::Client client;
};

HttpEngineClient::HttpEngineClient(const std::string& host, int port)
    : impl_(std::make_unique<Impl>(host, port)) {}

HttpEngineClient::~HttpEngineClient() = default;

engine::Neighborhood HttpEngineClient::neighbors(const engine::NeighborsRequest& request) {
  const auto body = impl_->expect_json(
      impl_->client.Post("/v1/neighbors", neighbors_request_to_json(request).dump(),
                         "application/json"),
      "neighbors");
  return neighborhood_from_json(body);
}

bool HttpEngineClient::upsert(const Point& p) {
  const auto body = impl_->expect_json(
      impl_->client.Post("/v1/points", io::point_to_json(p).dump(), "application/json"),
      "upsert");
  return body.at("existed").get<bool>();
}

bool HttpEngineClient::remove(const std::string& id) {
  const auto body =
      impl_->expect_json(impl_->client.Delete("/v1/points/" + id), "delete");
  return body.at("existed").get<bool>();
}

void HttpEngineClient::reload(const std::string& bundle_dir) {
  impl_->expect_json(
      impl_->client.Post("/v1/admin/reload",
                         nlohmann::json({{"bundle", bundle_dir}}).dump(),
                         "application/json"),
      "reload");
}

nlohmann::json HttpEngineClient::stats() {
  return impl_->expect_json(impl_->client.Get("/v1/stats"), "stats");
}

}  // namespace gus::server
