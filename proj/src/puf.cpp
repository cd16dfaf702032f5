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

#include "psf/puf.hpp"

#include <algorithm>
#include <cmath>

namespace psf {
namespace {

constexpr double kL = static_cast<double>(kFingerprintBits);

double neg_log2_max(double p) { return -std::log2(std::max(p, 1.0 - p)); }

std::vector<std::size_t> bit_counts(const std::vector<Fingerprint>& samples) {
  std::vector<std::size_t> counts(kFingerprintBits, 0);
  for (const auto& f : samples) {
    for (std::size_t l = 0; l < kFingerprintBits; ++l) counts[l] += f[l];
  }
  return counts;
}

}  // namespace

double uniformity(const NoteDataset& d, std::size_t s, std::size_t t) {
  return static_cast<double>(d.at(s, t).popcount()) / kL;
}

double randomness(const NoteDataset& d, std::size_t s) {
  std::size_t ones = 0;
  for (const auto& f : d.note(s)) ones += f.popcount();
  const double p = static_cast<double>(ones) / (static_cast<double>(d.samples()) * kL);
  return neg_log2_max(p);
}

double reliability(const NoteDataset& d, std::size_t s) {
  const auto& samples = d.note(s);
  const std::size_t T = samples.size();
  if (T < 2) throw MetricError("reliability needs at least two samples per note");
  std::size_t diff = 0;
  for (std::size_t t = 0; t + 1 < T; ++t) {
    for (std::size_t u = t + 1; u < T; ++u) diff += hamming_count(samples[t], samples[u]);
  }
  return 1.0 - 2.0 * static_cast<double>(diff) / (static_cast<double>(T * (T - 1)) * kL);
}

double steadiness(const NoteDataset& d, std::size_t s) {
  const auto counts = bit_counts(d.note(s));
  const double T = static_cast<double>(d.samples());
  double acc = 0.0;
  for (const auto c : counts) acc += std::log2(std::max(c / T, 1.0 - c / T));
  return 1.0 + acc / kL;
}

namespace {

std::size_t cross_note_xor(const NoteDataset& d, std::size_t s) {
  if (d.notes() < 2) throw MetricError("uniqueness needs at least two notes");
  std::size_t diff = 0;
  for (const auto& f : d.note(s)) {
    for (std::size_t o = 0; o < d.notes(); ++o) {
      if (o == s) continue;
      for (const auto& g : d.note(o)) diff += hamming_count(f, g);
    }
  }
  return diff;
}

}  // namespace

double uniqueness(const NoteDataset& d, std::size_t s) {
  const double S = static_cast<double>(d.notes());
  const double T = static_cast<double>(d.samples());
  return 2.0 * static_cast<double>(cross_note_xor(d, s)) / (T * T * S * (S - 1.0) * kL);
}

double uniqueness_mean_hd(const NoteDataset& d, std::size_t s) {
  const double S = static_cast<double>(d.notes());
  const double T = static_cast<double>(d.samples());
  return static_cast<double>(cross_note_xor(d, s)) / (T * T * (S - 1.0) * kL);
}

double bit_aliasing(const NoteDataset& d, std::size_t l) {
  if (l >= kFingerprintBits) throw std::out_of_range("bit index " + std::to_string(l) + " out of range");
  std::size_t ones = 0;
  for (std::size_t s = 0; s < d.notes(); ++s) {
    for (const auto& f : d.note(s)) ones += f[l];
  }
  return static_cast<double>(ones) / static_cast<double>(d.notes() * d.samples());
}

MetricSummary summarize(std::vector<double> per_item) {
  MetricSummary m;
  if (!per_item.empty()) {
    double sum = 0.0;
    for (double x : per_item) sum += x;
    m.mean = sum / static_cast<double>(per_item.size());
    const auto [lo, hi] = std::minmax_element(per_item.begin(), per_item.end());
    m.min = *lo;
    m.max = *hi;
  }
  m.per_item = std::move(per_item);
  return m;
}

PufReport puf_report(const NoteDataset& d) {
  if (d.notes() < 2) throw MetricError("PUF report needs at least two notes");
  const std::size_t S = d.notes(), T = d.samples();
  std::vector<double> uni, rnd, std_, rel, uq, uq_hd, alias;
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t t = 0; t < T; ++t) uni.push_back(uniformity(d, s, t));
    rnd.push_back(randomness(d, s));
    std_.push_back(steadiness(d, s));
    if (T >= 2) rel.push_back(reliability(d, s));
    const double xor_bits = static_cast<double>(cross_note_xor(d, s));
    uq.push_back(2.0 * xor_bits / (double(T) * double(T) * double(S) * double(S - 1) * kL));
    uq_hd.push_back(xor_bits / (double(T) * double(T) * double(S - 1) * kL));
  }
  std::vector<std::size_t> ones(kFingerprintBits, 0);
  for (std::size_t s = 0; s < S; ++s) {
    const auto counts = bit_counts(d.note(s));
    for (std::size_t l = 0; l < kFingerprintBits; ++l) ones[l] += counts[l];
  }
  for (const auto c : ones) alias.push_back(static_cast<double>(c) / static_cast<double>(S * T));

  PufReport r;
  r.uniformity = summarize(std::move(uni));
  r.randomness = summarize(std::move(rnd));
  r.steadiness = summarize(std::move(std_));
  r.has_reliability = T >= 2;
  r.reliability = summarize(std::move(rel));
  r.uniqueness = summarize(std::move(uq));
  r.uniqueness_mean_hd = summarize(std::move(uq_hd));
  r.bit_aliasing = summarize(std::move(alias));
  return r;
}

}  // namespace psf
