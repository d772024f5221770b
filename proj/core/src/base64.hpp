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

#ifndef STYLESCENE_SRC_BASE64_HPP_
#define STYLESCENE_SRC_BASE64_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stylescene::detail {

std::string base64_encode(std::span<const std::uint8_t> bytes);
// nullopt on any character outside the standard alphabet or bad padding.
std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text);

// Little-endian IEEE-754 doubles, bit-exact.
std::string doubles_to_base64(std::span<const double> values);
std::optional<std::vector<double>> doubles_from_base64(std::string_view text);

}  // namespace stylescene::detail

#endif  // STYLESCENE_SRC_BASE64_HPP_
