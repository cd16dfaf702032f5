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

#include "doctest.h"

using namespace psf;

TEST_CASE("defaults are the polymer-note filter") {
  const Config c;
  CHECK(c.gabor.f_max == 0.25);
  CHECK(c.gabor.u == 5);
  CHECK(c.gabor.scales == 6);
  CHECK(c.gabor.v == 11);
  CHECK(c.gabor.orientations == 30);
  CHECK(c.threshold == 0.33);
  const auto text = dump_config(c);
  CHECK(text.find("\"gamma\": 1.4142135623730951") != std::string::npos);
  CHECK(text.find("\"eta\": 1.4142135623730951") != std::string::npos);
}

TEST_CASE("dump and parse round trip") {
  Config c;
  c.gabor.u = 4;
  c.gabor.v = 22;
  c.gabor.orientations = 25;
  c.gabor.gamma = 1.1;
  c.threshold = 0.31;
  c.layout.marker_threshold = 0.15;
  c.layout.feature.offset_y = 51.5;
  c.store_path = "/tmp/x.jsonl";
  const auto back = parse_config(dump_config(c));
  CHECK(back == c);
  CHECK(dump_config(back) == dump_config(c));
}

TEST_CASE("partial configs keep defaults") {
  const auto c = parse_config(R"({"threshold": 0.3, "gabor": {"v": 3}})");
  CHECK(c.threshold == 0.3);
  CHECK(c.gabor.v == 3);
  CHECK(c.gabor.u == 5);
  CHECK(parse_config("{}") == Config{});
}

TEST_CASE("bad configs are rejected") {
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"thresh": 0.3})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"gabor": {"w": 1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"threshold": 0.6})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"threshold": "high"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"gabor": {"u": 9}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"gabor": {"kernel_size": 103}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"layout": {"feature_size": 500}})"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}
