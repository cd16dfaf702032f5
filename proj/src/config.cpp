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

#include "psf/config.hpp"

#include "json.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace psf {
namespace {

using nlohmann::ordered_json;

void reject_unknown(const ordered_json& obj, std::string_view section, const std::set<std::string>& known) {
  if (!obj.is_object()) throw ConfigError(std::string(section) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!known.contains(key)) throw ConfigError("unknown key " + std::string(section) + "." + key);
  }
}

template <typename T>
void read(const ordered_json& obj, const char* key, T& out) {
  if (const auto it = obj.find(key); it != obj.end()) {
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string("bad value for ") + key);
    }
  }
}

}  // namespace

void Config::validate() const {
  gabor.validate();
  if (gabor.kernel_size > 2 * SampleGrid{}.origin + 1) throw ConfigError("gabor.kernel_size must not exceed 101");
  if (!(threshold > 0.0 && threshold < 0.5)) throw ConfigError("threshold must lie in (0, 0.5)");
  if (layout.feature.size != kFeatureSize) throw ConfigError("layout.feature_size must be " + std::to_string(kFeatureSize));
  if (!(layout.marker_threshold > 0.0 && layout.marker_threshold < 1.0)) {
    throw ConfigError("layout.marker_threshold must lie in (0, 1)");
  }
  if (layout.marker_min_area < 1) throw ConfigError("layout.marker_min_area must be positive");
}

Config parse_config(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j, "config", {"gabor", "threshold", "layout", "paths"});
  Config c;
  if (j.contains("gabor")) {
    const auto& g = j["gabor"];
    reject_unknown(g, "gabor", {"f_max", "gamma", "eta", "u", "U", "v", "V", "kernel_size"});
    read(g, "f_max", c.gabor.f_max);
    read(g, "gamma", c.gabor.gamma);
    read(g, "eta", c.gabor.eta);
    read(g, "u", c.gabor.u);
    read(g, "U", c.gabor.scales);
    read(g, "v", c.gabor.v);
    read(g, "V", c.gabor.orientations);
    read(g, "kernel_size", c.gabor.kernel_size);
  }
  read(j, "threshold", c.threshold);
  if (j.contains("layout")) {
    const auto& l = j["layout"];
    reject_unknown(l, "layout",
                   {"marker_half", "pad_half", "marker_margin", "marker_threshold", "marker_min_area", "feature_offset_x",
                    "feature_offset_y", "feature_size"});
    read(l, "marker_half", c.layout.marker_half);
    read(l, "pad_half", c.layout.pad_half);
    read(l, "marker_margin", c.layout.marker_margin);
    read(l, "marker_threshold", c.layout.marker_threshold);
    read(l, "marker_min_area", c.layout.marker_min_area);
    read(l, "feature_offset_x", c.layout.feature.offset_x);
    read(l, "feature_offset_y", c.layout.feature.offset_y);
    read(l, "feature_size", c.layout.feature.size);
  }
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    reject_unknown(p, "paths", {"store"});
    read(p, "store", c.store_path);
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const Config& c) {
  ordered_json j;
  j["gabor"] = {{"f_max", c.gabor.f_max}, {"gamma", c.gabor.gamma}, {"eta", c.gabor.eta},
                {"u", c.gabor.u},         {"U", c.gabor.scales},     {"v", c.gabor.v},
                {"V", c.gabor.orientations}, {"kernel_size", c.gabor.kernel_size}};
  j["threshold"] = c.threshold;
  j["layout"] = {{"marker_half", c.layout.marker_half},
                 {"pad_half", c.layout.pad_half},
                 {"marker_margin", c.layout.marker_margin},
                 {"marker_threshold", c.layout.marker_threshold},
                 {"marker_min_area", c.layout.marker_min_area},
                 {"feature_offset_x", c.layout.feature.offset_x},
                 {"feature_offset_y", c.layout.feature.offset_y},
                 {"feature_size", c.layout.feature.size}};
  j["paths"] = {{"store", c.store_path}};
  return j.dump(2) + "\n";
}

}  // namespace psf
