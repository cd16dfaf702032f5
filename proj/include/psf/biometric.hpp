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

#include "psf/dataset.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace psf {

class MetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Genuine (same note) and impostor (different note) fractional distances.
struct ScoreSet {
  std::vector<double> intra;
  std::vector<double> inter;
};

struct ErrorCurve {
  std::vector<double> thresholds;
  std::vector<double> frr;
  std::vector<double> far;
  double eer = 0.0;
  double eer_threshold = 0.0;
};

struct SampleStats {
  double mean = 0.0;
  double std = 0.0;  // n - 1 denominator
  std::size_t n = 0;
};

SampleStats sample_stats(const std::vector<double>& xs);

/// Intra: every unordered sample pair inside a note. Inter: first sample of
/// every unordered note pair. Both in lexicographic (s, t, s', t') order.
ScoreSet score_set(const NoteDataset& d);

/// |mu1 - mu2| / sqrt((s1^2 + s2^2) / 2).
double decidability(const ScoreSet& s);

/// mu (1 - mu) / sigma^2 over the impostor distances.
double degrees_of_freedom(const std::vector<double>& inter);

/// FRR = share of intra > threshold, FAR = share of inter <= threshold. The
/// EER sits at the first threshold minimising |FRR - FAR|.
ErrorCurve error_curves(const ScoreSet& s, const std::vector<double>& thresholds);

/// 0, 0.005, ..., 1.
std::vector<double> default_thresholds();

/// Successes that still count as a match: floor(theta N), tolerant of the
/// representation error in theta (0.3 * 900 must give 270).
std::uint64_t match_budget(std::uint64_t n, double theta);

/// Exact sum_{i<=w} C(n, i).
boost::multiprecision::cpp_int binomial_prefix_sum(std::uint64_t n, std::uint64_t w);

/// P[Binomial(n, 1/2) <= floor(theta n)], computed exactly then rounded.
double binomial_false_match(std::uint64_t n, double theta);

struct SpherePacking {
  boost::multiprecision::cpp_int space;  // 2^n
  boost::multiprecision::cpp_int ball;   // sum_{i<=w} C(n, i)
  double attempts = 0.0;                 // space / ball
  double log10_attempts = 0.0;
};

SpherePacking sphere_packing_attempts(std::uint64_t n, std::uint64_t w);

struct HistogramBin {
  double center = 0.0;
  std::size_t count = 0;
  double binomial_expected = 0.0;
};

struct BinomialFit {
  double n_hat = 0.0;
  double mean = 0.0;
  double skewness = 0.0;
  std::vector<HistogramBin> bins;
};

/// Fits Binomial(N, 1/2)/N to the impostor distances with N from
/// degrees_of_freedom and tabulates both on a fixed-width histogram.
BinomialFit binomial_fit(const std::vector<double>& inter, double bin_width = 0.005);

/// Density (per unit distance) of Binomial(n, 1/2)/n at hd, with the
/// factorials continued through lgamma so n need not be an integer.
double binomial_density(double n, double hd);

}  // namespace psf
