#include <doctest.h>

#include <nlohmann/json.hpp>

#include <httplib.h>

#include "gus/corpus_io.hpp"
#include "gus/preprocess.hpp"
#include "gus/scorer.hpp"
#include "gus/server.hpp"
#include "support/support.hpp"

using gus::engine::Engine;
using gus::engine::EngineOptions;

namespace {

gus::scorer::ModelWeights token_model() {
  gus::scorer::ModelWeights m;
  m.input_spec = {{"b", gus::scorer::FieldSpec::Kind::kTokens, 0}};
  m.layers.push_back(gus::scorer::Layer{2, 2, {1.0, 0.0, 0.0, 1.0}, {0.0, 0.0}});
  m.layers.push_back(gus::scorer::Layer{1, 2, {1.0, 0.5}, {0.0}});
  return m;
}

struct ServedEngine {
  ServedEngine() : tmp("server") {
    gus::scorer::save_weights(token_model(), tmp.file("model.json"));
    EngineOptions options;
    options.scheme = testsupport::token_only_scheme();
    options.model_path = tmp.file("model.json");
    engine = std::make_unique<Engine>(std::move(options));
    server = std::make_unique<gus::server::Server>(*engine);
    port = server->start_background("127.0.0.1");
  }

  testsupport::TempDir tmp;
  std::unique_ptr<Engine> engine;
  std::unique_ptr<gus::server::Server> server;
  int port = 0;
};

}  // namespace

TEST_SUITE("server") {

TEST_CASE("mutation and neighborhood round trip over http") {
  ServedEngine served;
  httplib::Client http("127.0.0.1", served.port);

  auto res = http.Get("/v1/healthz");
  REQUIRE(res);
  CHECK(res->status == 200);

  const auto p1 = testsupport::token_point("p1", {"t", "u"});
  const auto p2 = testsupport::token_point("p2", {"t"});
  res = http.Post("/v1/points", gus::io::point_to_json(p1).dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(nlohmann::json::parse(res->body).at("existed") == false);
  res = http.Post("/v1/points", gus::io::point_to_json(p2).dump(), "application/json");
  REQUIRE(res);

  res = http.Post("/v1/neighbors", R"({"id": "p1", "k": 5})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  auto body = nlohmann::json::parse(res->body);
  REQUIRE(body.at("neighbors").size() == 1);
  CHECK(body.at("neighbors")[0].at("id") == "p2");
  CHECK(body.at("neighbors")[0].at("dist").get<double>() == -1.0);
  CHECK(body.at("k") == 5);

  // By-point query with tau.
  res = http.Post("/v1/neighbors",
                  R"({"point": {"id": "probe", "tokens": {"b": ["t"]}},
                      "tau": -1e-308})",
                  "application/json");
  REQUIRE(res);
  body = nlohmann::json::parse(res->body);
  CHECK(body.at("neighbors").size() == 2);

  res = http.Delete("/v1/points/p2");
  REQUIRE(res);
  CHECK(nlohmann::json::parse(res->body).at("existed") == true);
  res = http.Post("/v1/neighbors", R"({"id": "p1"})", "application/json");
  REQUIRE(res);
  CHECK(nlohmann::json::parse(res->body).at("neighbors").empty());

  res = http.Get("/v1/stats");
  REQUIRE(res);
  body = nlohmann::json::parse(res->body);
  CHECK(body.at("points") == 1);
  CHECK(body.at("latency").at("neighbors").at("count").get<int>() >= 2);
}

TEST_CASE("error statuses: 400 invalid, 404 unknown id, reload failures") {
  ServedEngine served;
  httplib::Client http("127.0.0.1", served.port);

  auto res = http.Post("/v1/points", "{oops", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = http.Post("/v1/neighbors", R"({"id": "nobody"})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 404);
  CHECK(nlohmann::json::parse(res->body).at("error").get<std::string>().find(
            "nobody") != std::string::npos);

  res = http.Post("/v1/neighbors", R"({"id": "a", "k": 0})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = http.Post("/v1/admin/reload", R"({"bundle": "/nonexistent"})",
                  "application/json");
  REQUIRE(res);
  CHECK(res->status == 500);
}

TEST_CASE("admin reload swaps artifacts over http") {
  ServedEngine served;
  httplib::Client http("127.0.0.1", served.port);

  gus::io::write_corpus({testsupport::token_point("s", {"t"})},
                        served.tmp.file("c.jsonl"));
  gus::preprocess::Options options;
  options.filter_percent = 100.0;
  options.timestamp = 1;
  gus::preprocess::run_to_dir(served.tmp.file("c.jsonl"),
                              testsupport::token_only_scheme(), options,
                              served.tmp.file("bundle"));

  auto res = http.Post("/v1/admin/reload",
                       nlohmann::json({{"bundle", served.tmp.file("bundle")}}).dump(),
                       "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);

  // Every bucket is filtered now; new points embed to nothing.
  http.Post("/v1/points",
            gus::io::point_to_json(testsupport::token_point("p", {"t"})).dump(),
            "application/json");
  http.Post("/v1/points",
            gus::io::point_to_json(testsupport::token_point("q", {"t"})).dump(),
            "application/json");
  res = http.Post("/v1/neighbors", R"({"id": "p"})", "application/json");
  REQUIRE(res);
  CHECK(nlohmann::json::parse(res->body).at("neighbors").empty());
}

TEST_CASE("http client wrapper mirrors the engine api") {
  ServedEngine served;
  gus::server::HttpEngineClient client("127.0.0.1", served.port);

  CHECK(!client.upsert(testsupport::token_point("a", {"t"})));
  CHECK(client.upsert(testsupport::token_point("a", {"t"})));
  client.upsert(testsupport::token_point("b", {"t"}));

  gus::engine::NeighborsRequest request;
  request.id = "a";
  request.k = 3;
  const auto direct = served.engine->neighbors(request);
  const auto remote = client.neighbors(request);
  REQUIRE(remote.neighbors.size() == direct.neighbors.size());
  for (std::size_t i = 0; i < remote.neighbors.size(); ++i) {
    CHECK(remote.neighbors[i].id == direct.neighbors[i].id);
    CHECK(remote.neighbors[i].index_dist == direct.neighbors[i].index_dist);
    CHECK(remote.neighbors[i].similarity == direct.neighbors[i].similarity);
  }

  CHECK(client.remove("b"));
  CHECK(!client.remove("b"));
  CHECK(client.stats().at("points") == 1);
}

TEST_CASE("unreachable engines raise a clear error") {
  gus::server::HttpEngineClient client("127.0.0.1", 1);  // nothing listens here
  gus::engine::NeighborsRequest request;
  request.id = "x";
  CHECK_THROWS_WITH_AS(client.neighbors(request), doctest::Contains("unreachable"),
                       std::runtime_error);
}

}  // TEST_SUITE
