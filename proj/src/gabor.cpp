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

#include "psf/gabor.hpp"

#include "psf/biometric.hpp"

#include <algorithm>

namespace psf {

void GaborParams::validate() const {
  if (!(f_max > 0.0)) throw std::invalid_argument("f_max must be positive");
  if (!(gamma > 0.0) || !(eta > 0.0)) throw std::invalid_argument("gamma and eta must be positive");
  if (u < 1 || u > scales) throw std::invalid_argument("scale index u must lie in [1, U]");
  if (v < 1 || v > orientations) throw std::invalid_argument("orientation index v must lie in [1, V]");
  if (kernel_size < 3 || kernel_size % 2 == 0) throw std::invalid_argument("kernel size must be odd and >= 3");
}

double scale_frequency(const GaborParams& p) { return p.f_max / std::sqrt(std::exp2(p.u - 1)); }

double orientation_angle(const GaborParams& p) {
  return static_cast<double>(p.v - 1) / static_cast<double>(p.orientations) * std::numbers::pi;
}

Fingerprint quantize(const ResponseGrid& grid) {
  if (static_cast<std::size_t>(grid.size()) * 2 != kFingerprintBits) {
    throw std::invalid_argument("response grid must hold 1024 entries");
  }
  Fingerprint f;
  std::size_t l = 0;
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
      f.set(l++, grid(r, c).real() >= 0.0);
      f.set(l++, grid(r, c).imag() >= 0.0);
    }
  }
  return f;
}

Fingerprint extract(const GrayImage& crop, const GaborKernel<double>& kernel) {
  return quantize(filter_response(crop, kernel));
}

Fingerprint extract(const GrayImage& crop, const GaborParams& p) { return extract(crop, build_kernel(p)); }

TuneResult tune_filter(const NoteImages& crops, const std::vector<std::pair<int, int>>& search_space,
                       const GaborParams& base) {
  if (search_space.empty()) throw std::invalid_argument("empty search space");
  if (crops.size() < 2) throw std::invalid_argument("tuning needs at least two notes");
  for (const auto& note : crops) {
    if (note.size() < 2) throw std::invalid_argument("tuning needs at least two samples per note");
  }

  auto candidates = search_space;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  TuneResult result;
  bool have_best = false;
  for (const auto& [u, v] : candidates) {
    GaborParams p = base;
    p.u = u;
    p.v = v;
    const auto kernel = build_kernel(p);
    std::vector<std::vector<Fingerprint>> codes(crops.size());
    for (std::size_t s = 0; s < crops.size(); ++s) {
      for (const auto& img : crops[s]) codes[s].push_back(extract(img, kernel));
    }
    ScoreSet scores;
    for (std::size_t s = 0; s < codes.size(); ++s) {
      for (std::size_t t = 0; t < codes[s].size(); ++t) {
        for (std::size_t t2 = t + 1; t2 < codes[s].size(); ++t2) scores.intra.push_back(hamming(codes[s][t], codes[s][t2]));
        for (std::size_t o = s + 1; o < codes.size(); ++o) {
          for (const auto& g : codes[o]) scores.inter.push_back(hamming(codes[s][t], g));
        }
      }
    }
    const double dp = decidability(scores);
    result.evaluated.emplace_back(p, dp);
    if (!have_best || dp > result.d_prime) {
      result.params = p;
      result.d_prime = dp;
      have_best = true;
    }
  }
  return result;
}

}  // namespace psf
