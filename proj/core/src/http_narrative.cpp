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

#include <cstdlib>
#include <set>

#include <nlohmann/json.hpp>

#include "http_util.hpp"
#include "stylescene/error.hpp"
#include "stylescene/planner.hpp"

namespace stylescene {
namespace {

using nlohmann::json;

std::string join_url(const std::string& base, const char* path) {
  if (!base.empty() && base.back() == '/') return base.substr(0, base.size() - 1) + path;
  return base + path;
}

json styles_json(std::span<const StyleLabel> styles) {
  json out = json::array();
  for (StyleLabel s : styles) out.push_back(to_string(s));
  return out;
}

}  // namespace

HttpNarrativeProvider::HttpNarrativeProvider(HttpNarrativeOptions options)
    : options_(std::move(options)) {
  if (options_.url.empty()) throw ValidationError("narrative provider url is empty");
  detail::split_url(options_.url);
}

std::vector<StyleLabel> HttpNarrativeProvider::select_styles(
    const std::string& theme, std::span<const StyleLabel> styles, std::size_t m) const {
  const json body = {{"theme", theme}, {"styles", styles_json(styles)}, {"m", m}};
  const json reply = detail::post_json(join_url(options_.url, "/styles"), body,
                                       options_.timeout_seconds, options_.retries);
  const auto it = reply.find("styles");
  if (it == reply.end() || !it->is_array()) {
    throw IoError("narrative provider: reply lacks a styles array");
  }
  std::vector<StyleLabel> out;
  for (const auto& s : *it) {
    const auto parsed = s.is_string() ? parse_style(s.get<std::string>()) : std::nullopt;
    if (!parsed) throw IoError("narrative provider: unknown style " + s.dump());
    out.push_back(*parsed);
  }
  return out;
}

Composition HttpNarrativeProvider::compose(const std::string& theme,
                                           std::span<const StyleLabel> styles,
                                           std::span<const Candidate> candidates,
                                           std::span<const SynopsisEntry> synopsis) const {
  json summaries = json::array();
  for (const auto& c : candidates) {
    summaries.push_back({{"id", c.id},
                         {"summary", c.summary},
                         {"style", to_string(c.style)},
                         {"similarity", c.similarity}});
  }
  json scene = json::array();
  for (const auto& e : synopsis) {
    scene.push_back({{"category", e.category}, {"count", e.count}, {"room", e.room}});
  }
  const json body = {{"theme", theme},
                     {"styles", styles_json(styles)},
                     {"summaries", std::move(summaries)},
                     {"scene_synopsis", std::move(scene)}};
  const json reply = detail::post_json(join_url(options_.url, "/compose"), body,
                                       options_.timeout_seconds, options_.retries);
  const auto ids = reply.find("selected_ids");
  if (ids == reply.end() || !ids->is_array()) {
    throw IoError("narrative provider: reply lacks selected_ids");
  }
  std::vector<std::string> selected;
  for (const auto& id : *ids) {
    if (!id.is_string()) throw IoError("narrative provider: non-string id");
    selected.push_back(id.get<std::string>());
  }
  Composition out;
  const auto order = reply.find("order");
  if (order == reply.end() || order->is_null()) {
    out.ordered_ids = selected;
  } else {
    if (!order->is_array()) throw IoError("narrative provider: order must be an array");
    std::set<std::size_t> used;
    for (const auto& o : *order) {
      if (!o.is_number_unsigned() || o.get<std::size_t>() >= selected.size() ||
          !used.insert(o.get<std::size_t>()).second) {
        throw IoError("narrative provider: bad order entry " + o.dump());
      }
      out.ordered_ids.push_back(selected[o.get<std::size_t>()]);
    }
  }
  if (const auto prose = reply.find("prose"); prose != reply.end() && prose->is_string()) {
    out.prose = prose->get<std::string>();
  }
  return out;
}

std::optional<HttpNarrativeOptions> narrative_options_from_env() {
  const char* url = std::getenv(kLlmUrlEnv);
  if (url == nullptr || *url == '\0') return std::nullopt;
  HttpNarrativeOptions options;
  options.url = url;
  return options;
}

}  // namespace stylescene
