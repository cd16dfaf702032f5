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

#include "psf/biometric.hpp"
#include "psf/dataset.hpp"

#include <vector>

namespace psf {

// Metrics over a (note s, sample t, bit l) tensor; all indices zero-based.

double uniformity(const NoteDataset& d, std::size_t s, std::size_t t);
double randomness(const NoteDataset& d, std::size_t s);
double reliability(const NoteDataset& d, std::size_t s);
double steadiness(const NoteDataset& d, std::size_t s);

/// As printed: 2 / (T^2 S (S-1) L) times the XOR count over every (t, s' != s, t').
double uniqueness(const NoteDataset& d, std::size_t s);

/// Mean fractional distance from note s to all samples of the other notes.
double uniqueness_mean_hd(const NoteDataset& d, std::size_t s);

double bit_aliasing(const NoteDataset& d, std::size_t l);

struct MetricSummary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> per_item;
};

MetricSummary summarize(std::vector<double> per_item);

struct PufReport {
  MetricSummary uniformity;      // per (s, t), row-major
  MetricSummary randomness;      // per s
  MetricSummary steadiness;      // per s
  MetricSummary reliability;     // per s; empty when T < 2
  MetricSummary uniqueness;      // per s, formula as printed
  MetricSummary uniqueness_mean_hd;  // per s, mean cross-note distance
  MetricSummary bit_aliasing;    // per l
  bool has_reliability = false;
};

/// Needs S >= 2. With T == 1, reliability is left out (has_reliability false).
PufReport puf_report(const NoteDataset& d);

}  // namespace psf
