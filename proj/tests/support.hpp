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

#include "psf/fingerprint.hpp"
#include "psf/image.hpp"
#include "psf/rng.hpp"

#include <filesystem>
#include <string>

namespace psf::test {

/// Fresh empty directory under the build tree, removed by the destructor.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& name) : path_(std::filesystem::path(PSF_TEST_DATA_DIR) / name) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline Fingerprint random_fingerprint(Rng& rng) {
  Fingerprint f;
  for (std::size_t l = 0; l < kFingerprintBits; ++l) f.set(l, (rng.next() >> 63) != 0);
  return f;
}

inline GrayImage random_image(Rng& rng, int rows, int cols) {
  GrayImage img(rows, cols);
  for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = rng.uniform();
  return img;
}

/// White canvas with black squares of side 2 * half + 1 centred on the given points.
inline GrayImage canvas_with_squares(int rows, int cols, const std::vector<Point>& centres, int half) {
  GrayImage img = GrayImage::Ones(rows, cols);
  for (const auto& c : centres) {
    const int cx = static_cast<int>(c.x), cy = static_cast<int>(c.y);
    img.block(cy - half, cx - half, 2 * half + 1, 2 * half + 1) = 0.0;
  }
  return img;
}

}  // namespace psf::test
