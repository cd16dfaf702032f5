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

#include <stdexcept>
#include <string>
#include <vector>

namespace psf {

/// Complete S x T grid of fingerprints. Indices here are zero-based.
class NoteDataset {
 public:
  NoteDataset() = default;

  /// rows[s][t]; every row must hold the same number of samples.
  explicit NoteDataset(std::vector<std::vector<Fingerprint>> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw std::invalid_argument("dataset needs at least one note");
    const auto t = rows_.front().size();
    if (t == 0) throw std::invalid_argument("dataset needs at least one sample per note");
    for (const auto& r : rows_) {
      if (r.size() != t) throw std::invalid_argument("dataset is not rectangular: every note needs the same sample count");
    }
  }

  std::size_t notes() const { return rows_.size(); }
  std::size_t samples() const { return rows_.empty() ? 0 : rows_.front().size(); }

  const Fingerprint& at(std::size_t s, std::size_t t) const {
    if (s >= notes() || t >= samples()) {
      throw std::out_of_range("no fingerprint at (" + std::to_string(s) + ", " + std::to_string(t) + ")");
    }
    return rows_[s][t];
  }
  const std::vector<Fingerprint>& note(std::size_t s) const {
    if (s >= notes()) throw std::out_of_range("no note " + std::to_string(s));
    return rows_[s];
  }

 private:
  std::vector<std::vector<Fingerprint>> rows_;
};

}  // namespace psf
