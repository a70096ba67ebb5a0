#include <atomic>
#include <filesystem>
#include <thread>

#include "backend/batch.hpp"
#include "backend/cache.hpp"
#include "backend/http_backend.hpp"
#include "backend/mock_backend.hpp"
#include "doctest.h"
#include "httplib.h"
#include "util/error.hpp"

using namespace memaudit;
using nlohmann::json;

namespace {

MockSpec movie_spec() {
  MockSpec spec;
  spec.field_kind = FieldKind::Item;
  spec.records = {"1::Toy Story (1995)::Animation|Children's|Comedy", "2::Jumanji (1995)::Adventure|Children's|Fantasy"};
  spec.planted_memorized_ids = {"1"};
  spec.genuine_entities = {"Toy Story", "Jumanji"};
  return spec;
}

GenerationRequest ask(const std::string& prompt, int max_tokens = 256) {
  GenerationRequest r;
  r.transcript = {{Role::User, prompt}};
  r.max_tokens = max_tokens;
  return r;
}

}  // namespace

TEST_CASE("planted key yields the gold continuation") {
  MockBackend mock(movie_spec());
  const auto r = mock.generate(ask("Complete the record.\n1::"));
  CHECK(r.text == "Toy Story (1995)::Animation|Children's|Comedy");
  CHECK(r.finish_reason == FinishReason::Stop);
}

TEST_CASE("unplanted key yields a deterministic fabrication") {
  MockBackend mock(movie_spec());
  const auto a = mock.generate(ask("2::")).text;
  CHECK(a == mock.generate(ask("2::")).text);
  CHECK(a != "Jumanji (1995)::Adventure|Children's|Fantasy");
  CHECK(a.substr(0, a.find("::")) != "Jumanji (1995)");
}

TEST_CASE("lookup mode answers Unknown for absent keys") {
  MockBackend mock(movie_spec());
  CHECK(mock.generate(ask("Input: 99::")).text == "Unknown");
  CHECK(mock.generate(ask("Input: 1::")).text == "1::Toy Story (1995)::Animation|Children's|Comedy");
}

TEST_CASE("max_tokens = 1 emits one token with finish reason length") {
  MockBackend mock(movie_spec());
  const auto r = mock.generate(ask("1::", 1));
  CHECK(r.finish_reason == FinishReason::Length);
  CHECK(MockBackend::tokenize(r.text).size() == 1);
  CHECK(r.text == "Toy");
}

TEST_CASE("stop sequences cut the completion") {
  MockBackend mock(movie_spec());
  auto req = ask("1::");
  req.stop_sequences = {"::"};
  CHECK(mock.generate(req).text == "Toy Story (1995)");
}

TEST_CASE("invalid requests are config errors") {
  MockBackend mock(movie_spec());
  GenerationRequest empty;
  CHECK_THROWS_AS(mock.generate(empty), Error);
  auto neg = ask("1::");
  neg.temperature = -1;
  CHECK_THROWS_AS(mock.generate(neg), Error);
  GenerationRequest trailing;
  trailing.transcript = {{Role::User, "a"}, {Role::Assistant, "b"}};
  CHECK_THROWS_AS(mock.generate(trailing), Error);
}

TEST_CASE("activations are deterministic and carry the truth sign") {
  MockBackend mock(movie_spec());
  const auto a = mock.extract_activation({"The movie Toy Story is in MovieLens-1M", -2, TokenPosition::Last});
  const auto b = mock.extract_activation({"The movie Toy Story is in MovieLens-1M", -2, TokenPosition::Last});
  CHECK(a.values == b.values);
  CHECK(a.dim() == 32);
  auto proj = [&](const ActivationVector& v) {
    double s = 0;
    for (std::size_t i = 0; i < v.dim(); ++i) s += v.values[i] * mock.truth_direction()[i];
    return s;
  };
  const auto fake = mock.extract_activation({"The movie Storymanji is in MovieLens-1M", -2, TokenPosition::Last});
  const auto neg = mock.extract_activation({"The movie Toy Story is not in MovieLens-1M", -2, TokenPosition::Last});
  CHECK(proj(a) > 0.5);
  CHECK(proj(fake) < -0.5);
  CHECK(proj(neg) < -0.5);
}

TEST_CASE("layer out of range is a config error") {
  MockBackend mock(movie_spec());
  try {
    mock.extract_activation({"x", 99, TokenPosition::Last});
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
  }
  CHECK_THROWS_AS(mock.extract_activation({"x", -17, TokenPosition::Last}), Error);
  CHECK_NOTHROW(mock.extract_activation({"x", -16, TokenPosition::Last}));
}

TEST_CASE("mock spec validation") {
  MockSpec s;
  s.dim = 1;
  CHECK_THROWS_AS(MockBackend{s}, Error);
  s.dim = 4;
  s.noise_scale = -0.5;
  CHECK_THROWS_AS(MockBackend{s}, Error);
}

TEST_CASE("confound shifts activations by cluster and polarity") {
  MockSpec s = movie_spec();
  s.noise_scale = 0.0;
  s.confound = ConfoundSpec{3, 5.0, 2};
  MockBackend mock(s);
  const auto& dir = mock.confound_direction();
  auto proj = [&](const std::string& text) {
    const auto v = mock.extract_activation({text, -2, TokenPosition::Last});
    double p = 0;
    for (std::size_t i = 0; i < v.dim(); ++i) p += v.values[i] * dir[i];
    return p;
  };
  const double pos = proj("The movie Toy Story is in MovieLens-1M");
  const double neg = proj("The movie Toy Story is not in MovieLens-1M");
  CHECK(std::abs(std::abs(pos) - 5.0) < 1.0);
  CHECK(pos * neg < 0);
}

TEST_CASE("batch_extract keeps request order and matches serial execution") {
  MockBackend mock(movie_spec());
  std::vector<ActivationRequest> reqs;
  for (int i = 0; i < 100; ++i) reqs.push_back({"statement " + std::to_string(i), -2, TokenPosition::Last});
  const auto serial = batch_extract(mock, reqs, 1);
  for (std::size_t cap : {2u, 3u, 8u, 64u}) {
    const auto par = batch_extract(mock, reqs, cap);
    REQUIRE(par.size() == serial.size());
    for (std::size_t i = 0; i < par.size(); ++i) CHECK(par[i].value->values == serial[i].value->values);
  }
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].value->values == mock.extract_activation(reqs[i]).values);
  }
  CHECK_THROWS_AS(batch_extract(mock, reqs, 0), Error);
}

TEST_CASE("a failing batch item fills its error slot and the rest continue") {
  MockBackend mock(movie_spec());
  std::vector<ActivationRequest> reqs = {{"a", -2, TokenPosition::Last}, {"b", 500, TokenPosition::Last},
                                         {"c", -2, TokenPosition::Last}};
  const auto out = batch_extract(mock, reqs, 2);
  CHECK(out[0].ok());
  CHECK_FALSE(out[1].ok());
  CHECK(out[1].error_code == ErrorCode::Config);
  CHECK(out[2].ok());
}

TEST_CASE("wire schema is validated strictly") {
  CHECK_THROWS_AS(generation_response_from_wire(json{{"text", 3}, {"finish_reason", "stop"}}), Error);
  CHECK_THROWS_AS(generation_response_from_wire(json{{"text", ""}, {"finish_reason", "stop"}}), Error);
  CHECK_NOTHROW(generation_response_from_wire(json{{"text", ""}, {"finish_reason", "error"}}));
  CHECK_THROWS_AS(generation_response_from_wire(json{{"text", "a"}, {"finish_reason", "done"}}), Error);
  CHECK_THROWS_AS(activation_from_wire(json{{"values", {1.0, 2.0}}, {"dim", 3}, {"layer", -2}}), Error);
  CHECK_THROWS_AS(activation_from_wire(json{{"values", {1.0, "x"}}, {"dim", 2}, {"layer", -2}}), Error);
  const auto v = activation_from_wire(json{{"values", {1.0, 2.0}}, {"dim", 2}, {"layer", -2}});
  CHECK(v.values == std::vector<double>{1.0, 2.0});

  GenerationRequest r = ask("hi");
  r.temperature = 0.7;
  r.stop_sequences = {"\n"};
  const json w = to_wire(r);
  CHECK(w["messages"][0]["role"] == "user");
  CHECK(w["stop"][0] == "\n");
  CHECK_FALSE(w.contains("seed"));
  const auto back = generation_request_from_wire(w);
  CHECK(back.transcript == r.transcript);
  CHECK(back.temperature == 0.7);
}

namespace {

class CountingBackend : public Backend {
 public:
  explicit CountingBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}
  GenerationResponse generate(const GenerationRequest& r) override {
    ++calls;
    return inner_->generate(r);
  }
  ActivationVector extract_activation(const ActivationRequest& r) override {
    ++calls;
    return inner_->extract_activation(r);
  }
  std::string identity() const override { return inner_->identity(); }
  std::atomic<int> calls{0};

 private:
  std::shared_ptr<Backend> inner_;
};

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("memaudit_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("cache hits perform no inner calls") {
  const auto dir = temp_dir("cache");
  auto counting = std::make_shared<CountingBackend>(std::make_shared<MockBackend>(movie_spec()));
  CachingBackend cache(counting, dir);
  const ActivationRequest req{"The movie Toy Story is in MovieLens-1M", -2, TokenPosition::Last};
  const auto a = cache.extract_activation(req);
  const auto g = cache.generate(ask("1::"));
  CHECK(counting->calls == 2);
  CachingBackend again(counting, dir);
  CHECK(again.extract_activation(req).values == a.values);
  CHECK(again.generate(ask("1::")).text == g.text);
  CHECK(counting->calls == 2);
  CHECK(again.hits() == 2);
  CHECK(again.inner_calls() == 0);
  std::filesystem::remove_all(dir);
}

namespace {

struct TestServer {
  httplib::Server server;
  int port = 0;
  std::thread thread;
  TestServer() {
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~TestServer() {
    server.stop();
    thread.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

HttpConfig fast(const std::string& url) {
  HttpConfig c;
  c.base_url = url;
  c.timeout_s = 5;
  c.backoff_initial_s = 0.001;
  return c;
}

}  // namespace

TEST_CASE("http client round-trips both endpoints") {
  TestServer ts;
  std::string auth;
  ts.server.Post("/v1/generate", [&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    const json body = json::parse(req.body);
    const auto r = generation_request_from_wire(body);
    res.set_content(json{{"text", "echo:" + r.transcript.back().content}, {"finish_reason", "stop"}}.dump(),
                    "application/json");
  });
  ts.server.Post("/v1/activations", [&](const httplib::Request& req, httplib::Response& res) {
    const auto r = activation_request_from_wire(json::parse(req.body));
    res.set_content(json{{"values", {0.5, -1.5}}, {"dim", 2}, {"layer", r.layer_index}}.dump(), "application/json");
  });
  HttpConfig cfg = fast(ts.url());
  cfg.auth_token = "secret";
  HttpBackend http(cfg);
  const auto g = http.generate(ask("hello"));
  CHECK(g.text == "echo:hello");
  CHECK(g.retries == 0);
  CHECK(auth == "Bearer secret");
  const auto v = http.extract_activation({"x", -3, TokenPosition::Last});
  CHECK(v.values == std::vector<double>{0.5, -1.5});
  CHECK(v.layer_index == -3);
}

TEST_CASE("http client retries server errors and reports the retry") {
  TestServer ts;
  std::atomic<int> hits{0};
  ts.server.Post("/v1/generate", [&](const httplib::Request&, httplib::Response& res) {
    if (hits++ < 2) {
      res.status = 503;
      return;
    }
    res.set_content(json{{"text", "ok"}, {"finish_reason", "stop"}}.dump(), "application/json");
  });
  HttpBackend http(fast(ts.url()));
  const auto g = http.generate(ask("x"));
  CHECK(g.text == "ok");
  CHECK(g.retries == 2);
}

TEST_CASE("http client gives up after three retries with a transport error") {
  TestServer ts;
  std::atomic<int> hits{0};
  ts.server.Post("/v1/generate", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 500;
  });
  HttpBackend http(fast(ts.url()));
  try {
    http.generate(ask("x"));
    FAIL("expected a transport error");
  } catch (const TransportError& e) {
    CHECK(e.attempts() == 4);
    CHECK(e.http_status() == 500);
  }
  CHECK(hits == 4);
}

TEST_CASE("connection failures are transport errors") {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  HttpConfig cfg = fast("http://127.0.0.1:" + std::to_string(port));
  cfg.max_retries = 1;
  cfg.timeout_s = 1;
  HttpBackend http(cfg);
  try {
    http.generate(ask("x"));
    FAIL("expected a transport error");
  } catch (const TransportError& e) {
    CHECK(e.attempts() == 2);
    CHECK(e.http_status() == 0);
  }
}

TEST_CASE("a rejected temperature is a config error, not retried") {
  TestServer ts;
  std::atomic<int> hits{0};
  ts.server.Post("/v1/generate", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 400;
    res.set_content(json{{"error", "temperature too high"}}.dump(), "application/json");
  });
  HttpBackend http(fast(ts.url()));
  try {
    http.generate(ask("x"));
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    CHECK(std::string(e.what()).find("temperature too high") != std::string::npos);
  }
  CHECK(hits == 1);
}

TEST_CASE("schema violations from the server surface as schema errors") {
  TestServer ts;
  ts.server.Post("/v1/generate", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"completion", "x"}}.dump(), "application/json");
  });
  ts.server.Post("/v1/activations", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json", "text/plain");
  });
  HttpBackend http(fast(ts.url()));
  try {
    http.generate(ask("x"));
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Schema);
  }
  try {
    http.extract_activation({"x", -2, TokenPosition::Last});
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Schema);
  }
}

TEST_CASE("base URL path prefixes are honored") {
  TestServer ts;
  ts.server.Post("/api/v1/generate", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"text", "prefixed"}, {"finish_reason", "stop"}}.dump(), "application/json");
  });
  HttpBackend http(fast(ts.url() + "/api/"));
  CHECK(http.generate(ask("x")).text == "prefixed");
}
