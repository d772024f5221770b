// Copyright 2026 The stylescene Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "stylescene/embedding.hpp"
#include "stylescene/error.hpp"
#include "stylescene/planner.hpp"
#include "stylescene/synthetic.hpp"

// after Eigen: <resolv.h> defines _res
#include <httplib.h>

namespace stylescene {
namespace {

using nlohmann::json;

// Runs an httplib server on an ephemeral port for the lifetime of the object.
class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::vector<double> fake_vector(const std::string& text, std::size_t dim) {
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    v[i] = std::sin(static_cast<double>(i + 1) * static_cast<double>(text.size() + 1));
  }
  return v;
}

TEST(HttpEmbedding, ProjectsWideVectors) {
  LocalServer srv;
  srv.server().Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    json vectors = json::array();
    for (const auto& t : body["texts"]) vectors.push_back(fake_vector(t.get<std::string>(), 512));
    res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
  });
  HttpEmbeddingOptions opts;
  opts.url = srv.url("/embed");
  const HttpEmbeddingProvider p(opts);
  const auto a = p.embed("hello");
  const auto b = p.embed("hello");
  EXPECT_EQ(a.dim(), 64u);
  EXPECT_NEAR(norm(a), 1.0, 1e-9);
  EXPECT_EQ(a, b);
  const std::vector<std::string> texts = {"one", "three"};
  const auto batch = p.embed_batch(texts);
  ASSERT_EQ(batch.size(), 2u);
  EXPECT_EQ(batch[0], p.embed("one"));
}

TEST(HttpEmbedding, RetriesServerErrors) {
  LocalServer srv;
  std::atomic<int> calls{0};
  srv.server().Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    if (calls++ == 0) {
      res.status = 500;
      return;
    }
    const json body = json::parse(req.body);
    json vectors = json::array();
    for (const auto& t : body["texts"]) vectors.push_back(fake_vector(t.get<std::string>(), 64));
    res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
  });
  HttpEmbeddingOptions opts;
  opts.url = srv.url("/embed");
  opts.retries = 2;
  const HttpEmbeddingProvider p(opts);
  EXPECT_NEAR(norm(p.embed("x")), 1.0, 1e-9);
  EXPECT_EQ(calls.load(), 2);
}

TEST(HttpEmbedding, FailuresAreIoErrors) {
  LocalServer srv;
  srv.server().Post("/short", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"vectors": [[1.0, 2.0]]})", "application/json");
  });
  srv.server().Post("/down", [](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
  });
  HttpEmbeddingOptions opts;
  opts.url = srv.url("/short");
  EXPECT_THROW(HttpEmbeddingProvider(opts).embed("x"), IoError);
  opts.url = srv.url("/down");
  opts.retries = 1;
  EXPECT_THROW(HttpEmbeddingProvider(opts).embed("x"), IoError);
  opts.url = "http://127.0.0.1:1/embed";
  opts.timeout_seconds = 0.5;
  opts.retries = 0;
  EXPECT_THROW(HttpEmbeddingProvider(opts).embed("x"), IoError);
}

TEST(HttpNarrative, StylesAndCompose) {
  LocalServer srv;
  json seen_compose;
  srv.server().Post("/llm/styles", [](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    EXPECT_EQ(body["m"], 2);
    EXPECT_EQ(body["styles"].size(), 9u);
    res.set_content(R"({"styles": ["tired", "sad"]})", "application/json");
  });
  srv.server().Post("/llm/compose", [&](const httplib::Request& req, httplib::Response& res) {
    seen_compose = json::parse(req.body);
    const auto& s = seen_compose["summaries"];
    res.set_content(json{{"selected_ids", {s[0]["id"], s[1]["id"]}},
                         {"order", {1, 0}},
                         {"prose", "Evening falls."}}
                        .dump(),
                    "application/json");
  });
  HttpNarrativeOptions opts;
  opts.url = srv.url("/llm");
  const HttpNarrativeProvider p(opts);
  const TestEmbedder e;
  EXPECT_EQ(select_styles("a dull day", 2, e, &p),
            (std::vector{StyleLabel::kTired, StyleLabel::kSad}));

  const ScriptDatabase db = build_database(random_short_scripts(30, 2), e);
  const Scene scene = synthetic_apartment();
  std::vector<Retrieved> hits;
  for (const auto& entry : db.entries()) {
    if (scene_supports(scene, entry.script)) hits.push_back({entry.script.id, 0.5, entry.script.style_label});
    if (hits.size() == 3) break;
  }
  ASSERT_EQ(hits.size(), 3u);
  const LongScript ls = assemble_long_script(db, hits, scene, &p, "a dull day", {}, Spawn{}, 4);
  EXPECT_EQ(ls.prose, "Evening falls.");
  EXPECT_EQ(ls.provenance.front().script_id, hits[1].id);
  EXPECT_EQ(ls.provenance.back().script_id, hits[0].id);
  EXPECT_EQ(seen_compose["summaries"].size(), 3u);
  EXPECT_FALSE(seen_compose["scene_synopsis"].empty());
}

TEST(HttpNarrative, UnreachableFallsBack) {
  HttpNarrativeOptions opts;
  opts.url = "http://127.0.0.1:1";
  opts.timeout_seconds = 0.5;
  opts.retries = 0;
  const HttpNarrativeProvider p(opts);
  const TestEmbedder e;
  EXPECT_EQ(select_styles("relaxed", 1, e, &p), std::vector{StyleLabel::kRelaxed});
}

}  // namespace
}  // namespace stylescene
