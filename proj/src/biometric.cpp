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

#include "psf/biometric.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace psf {

namespace mp = boost::multiprecision;

SampleStats sample_stats(const std::vector<double>& xs) {
  SampleStats st;
  st.n = xs.size();
  if (xs.empty()) return st;
  double sum = 0.0;
  for (double x : xs) sum += x;
  st.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - st.mean) * (x - st.mean);
    st.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return st;
}

ScoreSet score_set(const NoteDataset& d) {
  ScoreSet s;
  for (std::size_t n = 0; n < d.notes(); ++n) {
    const auto& samples = d.note(n);
    for (std::size_t t = 0; t < samples.size(); ++t) {
      for (std::size_t u = t + 1; u < samples.size(); ++u) s.intra.push_back(hamming(samples[t], samples[u]));
    }
  }
  for (std::size_t n = 0; n < d.notes(); ++n) {
    for (std::size_t m = n + 1; m < d.notes(); ++m) s.inter.push_back(hamming(d.at(n, 0), d.at(m, 0)));
  }
  return s;
}

double decidability(const ScoreSet& s) {
  if (s.intra.size() < 2 || s.inter.size() < 2) throw MetricError("decidability needs at least two scores per group");
  const auto a = sample_stats(s.intra);
  const auto b = sample_stats(s.inter);
  const double pooled = (a.std * a.std + b.std * b.std) / 2.0;
  if (!(pooled > 0.0)) throw MetricError("decidability undefined: zero pooled variance");
  return std::abs(a.mean - b.mean) / std::sqrt(pooled);
}

double degrees_of_freedom(const std::vector<double>& inter) {
  if (inter.size() < 2) throw MetricError("degrees of freedom need at least two scores");
  const auto st = sample_stats(inter);
  if (!(st.std > 0.0)) throw MetricError("degrees of freedom undefined: zero variance");
  return st.mean * (1.0 - st.mean) / (st.std * st.std);
}

ErrorCurve error_curves(const ScoreSet& s, const std::vector<double>& thresholds) {
  if (s.intra.empty() || s.inter.empty() || thresholds.empty()) {
    throw MetricError("error curves need scores in both groups and at least one threshold");
  }
  std::vector<double> intra = s.intra, inter = s.inter;
  std::sort(intra.begin(), intra.end());
  std::sort(inter.begin(), inter.end());
  ErrorCurve c;
  c.thresholds = thresholds;
  std::sort(c.thresholds.begin(), c.thresholds.end());
  double best = 2.0;
  for (double th : c.thresholds) {
    const auto rejected = intra.end() - std::upper_bound(intra.begin(), intra.end(), th);
    const auto accepted = std::upper_bound(inter.begin(), inter.end(), th) - inter.begin();
    const double frr = static_cast<double>(rejected) / static_cast<double>(intra.size());
    const double far = static_cast<double>(accepted) / static_cast<double>(inter.size());
    c.frr.push_back(frr);
    c.far.push_back(far);
    if (std::abs(frr - far) < best) {
      best = std::abs(frr - far);
      c.eer = 0.5 * (frr + far);
      c.eer_threshold = th;
    }
  }
  return c;
}

std::vector<double> default_thresholds() {
  std::vector<double> out;
  for (int i = 0; i <= 200; ++i) out.push_back(i / 200.0);
  return out;
}

std::uint64_t match_budget(std::uint64_t n, double theta) {
  const double m = theta * static_cast<double>(n);
  return static_cast<std::uint64_t>(std::floor(m + 1e-9 * std::max(1.0, m)));
}

mp::cpp_int binomial_prefix_sum(std::uint64_t n, std::uint64_t w) {
  w = std::min(w, n);
  mp::cpp_int term = 1;
  mp::cpp_int sum = 1;
  for (std::uint64_t i = 0; i < w; ++i) {
    term = term * (n - i) / (i + 1);
    sum += term;
  }
  return sum;
}

namespace {

using Wide = mp::cpp_bin_float_50;

Wide ratio(const mp::cpp_int& num, const mp::cpp_int& den) { return Wide(num) / Wide(den); }

}  // namespace

double binomial_false_match(std::uint64_t n, double theta) {
  if (n < 1) throw MetricError("binomial model needs at least one trial");
  if (!(theta > 0.0 && theta < 1.0)) throw MetricError("threshold must lie in (0, 1)");
  const mp::cpp_int space = mp::cpp_int(1) << n;
  return ratio(binomial_prefix_sum(n, match_budget(n, theta)), space).convert_to<double>();
}

SpherePacking sphere_packing_attempts(std::uint64_t n, std::uint64_t w) {
  if (w > n) throw MetricError("radius must not exceed the bit count");
  SpherePacking sp;
  sp.space = mp::cpp_int(1) << n;
  sp.ball = binomial_prefix_sum(n, w);
  const Wide q = ratio(sp.space, sp.ball);
  sp.attempts = q.convert_to<double>();
  sp.log10_attempts = mp::log10(q).convert_to<double>();
  return sp;
}

double binomial_density(double n, double hd) {
  const double k = hd * n;
  if (k < 0.0 || k > n) return 0.0;
  const double log_pmf = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::numbers::ln2;
  return n * std::exp(log_pmf);
}

BinomialFit binomial_fit(const std::vector<double>& inter, double bin_width) {
  if (inter.size() < 100) throw MetricError("binomial fit needs at least 100 impostor scores");
  if (!(bin_width > 0.0 && bin_width <= 1.0)) throw MetricError("bin width must lie in (0, 1]");
  BinomialFit fit;
  fit.n_hat = degrees_of_freedom(inter);
  const auto st = sample_stats(inter);
  fit.mean = st.mean;
  double m2 = 0.0, m3 = 0.0;
  for (double x : inter) {
    const double d = x - st.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(inter.size());
  m3 /= static_cast<double>(inter.size());
  fit.skewness = m3 / std::pow(m2, 1.5);

  const auto nbins = static_cast<std::size_t>(std::ceil(1.0 / bin_width - 1e-9));
  fit.bins.resize(nbins);
  const double total = static_cast<double>(inter.size());
  for (std::size_t b = 0; b < nbins; ++b) {
    fit.bins[b].center = (static_cast<double>(b) + 0.5) * bin_width;
    fit.bins[b].binomial_expected = total * bin_width * binomial_density(fit.n_hat, fit.bins[b].center);
  }
  for (double x : inter) {
    const auto b = std::min(nbins - 1, static_cast<std::size_t>(std::max(0.0, x) / bin_width));
    ++fit.bins[b].count;
  }
  return fit;
}

}  // namespace psf
