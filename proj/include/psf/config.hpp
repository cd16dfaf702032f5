/*
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "psf/gabor.hpp"
#include "psf/synth.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace psf {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything the pipeline stages share. Serialized as a JSON object with the
/// sections "gabor", "threshold", "layout" and "paths"; absent keys keep
/// their defaults, unknown keys are rejected.
struct Config {
  GaborParams gabor{};
  double threshold = kDefaultThreshold;
  NoteLayout layout{};
  std::string store_path = "notes.jsonl";

  void validate() const;
  friend bool operator==(const Config&, const Config&) = default;
};

Config parse_config(const std::string& text);
Config load_config(const std::filesystem::path& path);
std::string dump_config(const Config& c);

}  // namespace psf
