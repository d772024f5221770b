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

#ifndef STYLESCENE_SRC_HTTP_UTIL_HPP_
#define STYLESCENE_SRC_HTTP_UTIL_HPP_

#include <string>

#include <nlohmann/json.hpp>

namespace stylescene::detail {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // always starts with '/'
};

SplitUrl split_url(const std::string& url);

// POSTs `body` as JSON, retrying transport failures and 5xx responses up to
// `retries` extra times. Throws IoError on final failure or non-JSON reply.
nlohmann::json post_json(const std::string& url, const nlohmann::json& body,
                         double timeout_seconds, int retries);

}  // namespace stylescene::detail

#endif  // STYLESCENE_SRC_HTTP_UTIL_HPP_
