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
#include "psf/gabor.hpp"
#include "psf/pipeline.hpp"
#include "psf/synth.hpp"

#include "doctest.h"
#include "support.hpp"

#include <cmath>
#include <complex>
#include <numbers>

using namespace psf;
using cd = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

// Direct transcription of the filter formula, independent of build_kernel.
cd psi(double x, double y, double F, double theta, double gamma, double eta) {
  const double xr = x * std::cos(theta) + y * std::sin(theta);
  const double yr = -x * std::sin(theta) + y * std::cos(theta);
  const double env = F * F / (kPi * gamma * eta) * std::exp(-F * F * (xr * xr / (gamma * gamma) + yr * yr / (eta * eta)));
  return env * std::exp(cd(0.0, 2.0 * kPi * F * xr));
}

// Correlation sum_a sum_b I(a, b) conj(psi(x - a, y - b)) over the kernel support.
cd correlate_at(const GrayImage& img, int x, int y, int h, const GaborParams& p) {
  const double F = p.f_max / std::sqrt(std::pow(2.0, p.u - 1));
  const double theta = (p.v - 1) * kPi / p.orientations;
  cd acc = 0.0;
  for (int b = y - h; b <= y + h; ++b) {
    for (int a = x - h; a <= x + h; ++a) acc += img(b, a) * std::conj(psi(x - a, y - b, F, theta, p.gamma, p.eta));
  }
  return acc;
}

GrayImage grating(double F, double theta) {
  GrayImage img(kFeatureSize, kFeatureSize);
  for (int y = 0; y < kFeatureSize; ++y) {
    for (int x = 0; x < kFeatureSize; ++x) {
      img(y, x) = 0.5 + 0.5 * std::cos(2.0 * kPi * F * (x * std::cos(theta) + y * std::sin(theta)));
    }
  }
  return img;
}

double mean_magnitude(const ResponseGrid& g) { return g.abs().mean(); }

}  // namespace

TEST_CASE("scale frequency") {
  GaborParams p;
  CHECK(scale_frequency(p) == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(1.0 / scale_frequency(p) == doctest::Approx(16.0));
  p.u = 1;
  CHECK(scale_frequency(p) == p.f_max);
  p.u = 3;
  CHECK(scale_frequency(p) == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("orientation angle") {
  GaborParams p;
  CHECK(orientation_angle(p) == doctest::Approx(kPi / 3.0).epsilon(1e-15));
  p.v = 1;
  CHECK(orientation_angle(p) == 0.0);
  p.v = 22;
  p.orientations = 25;
  CHECK(orientation_angle(p) == doctest::Approx(21.0 * kPi / 25.0).epsilon(1e-15));
}

TEST_CASE("parameter validation") {
  GaborParams p;
  p.u = 7;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.v = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.kernel_size = 100;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.gamma = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("kernel origin value is real F^2 / (pi gamma eta)") {
  const GaborParams p;
  const auto k = build_kernel(p);
  const double F = 0.0625;
  CHECK(k(50, 50).real() == doctest::Approx(F * F / (kPi * 2.0)).epsilon(1e-14));
  CHECK(k(50, 50).imag() == 0.0);
  REQUIRE(k.rows() == 101);
}

TEST_CASE("kernel matches the formula at every tap") {
  GaborParams p;
  p.gamma = 1.3;
  p.eta = 2.1;
  p.v = 4;
  const auto k = build_kernel(p);
  const double F = scale_frequency(p), theta = orientation_angle(p);
  double worst = 0.0;
  for (int row = 0; row < 101; ++row) {
    for (int col = 0; col < 101; ++col) worst = std::max(worst, std::abs(k(row, col) - psi(col - 50, row - 50, F, theta, p.gamma, p.eta)));
  }
  CHECK(worst <= 1e-15);
}

TEST_CASE("envelope is even and a quarter turn swaps the axes") {
  GaborParams p;
  p.gamma = 1.2;
  p.eta = 2.3;
  p.orientations = 4;
  p.v = 2;  // pi / 4
  const auto a = build_kernel(p);
  p.v = 4;  // pi / 4 + pi / 2
  const auto b = build_kernel(p);
  const int h = 50;
  for (int y = -h; y <= h; ++y) {
    for (int x = -h; x <= h; ++x) {
      REQUIRE(std::abs(a(y + h, x + h)) == doctest::Approx(std::abs(a(-y + h, -x + h))).epsilon(1e-12));
      // |psi_theta(x, y)| = |psi_{theta + pi/2}(-y, x)|
      REQUIRE(std::abs(a(y + h, x + h)) == doctest::Approx(std::abs(b(x + h, -y + h))).epsilon(1e-12));
    }
  }
}

TEST_CASE("kernel spectrum peaks at 1/16 cycle per pixel") {
  const auto k = build_kernel(GaborParams{});
  const int n = static_cast<int>(k.rows());
  // Separable DFT: rows first, then columns.
  Image<cd> tmp(n, n), spec(n, n);
  for (int r = 0; r < n; ++r) {
    for (int f = 0; f < n; ++f) {
      cd acc = 0.0;
      for (int c = 0; c < n; ++c) acc += k(r, c) * std::exp(cd(0.0, -2.0 * kPi * f * c / n));
      tmp(r, f) = acc;
    }
  }
  for (int f = 0; f < n; ++f) {
    for (int g = 0; g < n; ++g) {
      cd acc = 0.0;
      for (int r = 0; r < n; ++r) acc += tmp(r, f) * std::exp(cd(0.0, -2.0 * kPi * g * r / n));
      spec(g, f) = acc;
    }
  }
  Eigen::Index gy = 0, fx = 0;
  spec.abs().maxCoeff(&gy, &fx);
  auto signed_bin = [n](Eigen::Index b) { return static_cast<double>(b > n / 2 ? b - n : b); };
  const double freq = std::hypot(signed_bin(fx), signed_bin(gy)) / n;
  CHECK(std::abs(freq - 0.0625) <= 1.0 / n);
}

TEST_CASE("grid response equals brute-force correlation") {
  Rng rng(2024);
  GaborParams p;
  p.v = 7;
  const auto k = build_kernel(p);
  const SampleGrid grid{50, 20, 5};
  for (int trial = 0; trial < 20; ++trial) {
    const auto img = test::random_image(rng, 200, 200);
    const auto got = filter_response(img, k, grid);
    double diff = 0.0, ref_norm = 0.0;
    for (int r = 0; r < grid.count; ++r) {
      for (int c = 0; c < grid.count; ++c) {
        const cd want = correlate_at(img, 50 + 20 * c, 50 + 20 * r, 50, p);
        diff = std::max(diff, std::abs(got(r, c) - want));
        ref_norm = std::max(ref_norm, std::abs(want));
      }
    }
    REQUIRE(ref_norm > 0.0);
    CHECK(diff / ref_norm <= 1e-9);
  }
}

TEST_CASE("response is linear") {
  Rng rng(7);
  const auto k = build_kernel(GaborParams{});
  const auto i1 = test::random_image(rng, kFeatureSize, kFeatureSize);
  const auto i2 = test::random_image(rng, kFeatureSize, kFeatureSize);
  CHECK((filter_response(GrayImage::Zero(kFeatureSize, kFeatureSize), k).abs() == 0.0).all());
  const double a = 0.7, b = -1.9;
  const GrayImage mix = a * i1 + b * i2;
  const ResponseGrid lhs = filter_response(mix, k);
  const ResponseGrid rhs = a * filter_response(i1, k) + b * filter_response(i2, k);
  CHECK((lhs - rhs).abs().maxCoeff() <= 1e-9 * rhs.abs().maxCoeff());
}

TEST_CASE("response needs the canonical crop") {
  const auto k = build_kernel(GaborParams{});
  CHECK_THROWS_WITH(filter_response(GrayImage::Zero(720, 721), k), doctest::Contains("wrong image dimensions"));
  CHECK_THROWS_AS(extract(GrayImage::Zero(900, 900), GaborParams{}), std::invalid_argument);
}

TEST_CASE("a grating at the tuned frequency and orientation dominates") {
  const GaborParams p;
  const auto k = build_kernel(p);
  const double F = scale_frequency(p), theta = orientation_angle(p);
  const double tuned = mean_magnitude(filter_response(grating(F, theta), k));
  CHECK(tuned >= 5.0 * mean_magnitude(filter_response(grating(2.0 * F, theta), k)));
  CHECK(tuned >= 5.0 * mean_magnitude(filter_response(grating(F, theta + kPi / 2.0), k)));
}

TEST_CASE("quantization by quadrant") {
  ResponseGrid g = ResponseGrid::Constant(32, 32, cd(1.0, 1.0));
  g(0, 1) = cd(-1.0, -1.0);
  g(0, 2) = cd(-1.0, 1.0);
  g(0, 3) = cd(1.0, -1.0);
  g(0, 4) = cd(0.0, 0.0);
  const auto f = quantize(g);
  CHECK(f[0]);
  CHECK(f[1]);
  CHECK_FALSE(f[2]);
  CHECK_FALSE(f[3]);
  CHECK_FALSE(f[4]);
  CHECK(f[5]);
  CHECK(f[6]);
  CHECK_FALSE(f[7]);
  CHECK(f[8]);  // zero maps to 1
  CHECK(f[9]);
  CHECK_THROWS_AS(quantize(ResponseGrid::Zero(31, 32)), std::invalid_argument);
}

TEST_CASE("alternating real signs give 11, 01, 11, 01, ...") {
  ResponseGrid g(32, 32);
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 32; ++c) g(r, c) = cd((r * 32 + c) % 2 == 0 ? 1.0 : -1.0, 1.0);
  }
  const auto f = quantize(g);
  for (std::size_t e = 0; e < 1024; ++e) {
    REQUIRE(f[2 * e] == (e % 2 == 0));
    REQUIRE(f[2 * e + 1]);
  }
}

TEST_CASE("negating the grid complements the fingerprint") {
  Rng rng(9);
  ResponseGrid g(32, 32);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = cd(rng.uniform(-1, 1), rng.uniform(-1, 1));
  CHECK(quantize(-g) == quantize(g).complement());
}

TEST_CASE("fingerprint is invariant to positive scaling of the image") {
  Rng rng(10);
  const auto k = build_kernel(GaborParams{});
  const auto img = gaussian_blur(test::random_image(rng, kFeatureSize, kFeatureSize), 1.5);
  const auto f = extract(img, k);
  for (double c : {0.5, 2.0, 3.0}) CHECK(extract((c * img).eval(), k) == f);
  CHECK(extract(img, k) == f);
}

TEST_CASE("fingerprints of distinct notes are far, noisy copies are near") {
  const Extractor ex;
  SubstrateModel m;
  m.seed = 1;
  const auto a = generate_note(m).feature();
  m.seed = 2;
  const auto b = generate_note(m).feature();
  const double inter = hamming(ex.from_crop(a), ex.from_crop(b));
  CHECK(inter >= 0.45);
  CHECK(inter <= 0.55);
  Rng rng(77);
  GrayImage noisy = a;
  for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy.data()[i] += 0.02 * rng.normal();
  CHECK(hamming(ex.from_crop(a), ex.from_crop(noisy)) <= 0.2);
}

TEST_CASE("tuning picks a scale near the texture wavelength") {
  DatasetSpec spec;
  spec.notes = 5;
  spec.samples = 3;
  spec.master_seed = 31;
  const NoteLayout layout;
  NoteImages crops;
  for (std::size_t s = 0; s < spec.notes; ++s) {
    auto& row = crops.emplace_back();
    for (const auto& img : render_note_samples(spec, s)) row.push_back(align_and_crop(img, layout));
  }
  std::vector<std::pair<int, int>> space;
  for (int u = 1; u <= 6; ++u) {
    for (int v : {1, 11, 21}) space.emplace_back(u, v);
  }
  const auto result = tune_filter(crops, space);
  CHECK(result.evaluated.size() == space.size());
  // One scale step either side of u = 5, the 16 px wavelength.
  GaborParams lo, hi;
  lo.u = 6;
  hi.u = 4;
  const double f = scale_frequency(result.params);
  CHECK(f >= scale_frequency(lo));
  CHECK(f <= scale_frequency(hi));

  const auto single = tune_filter(crops, {{4, 9}});
  CHECK(single.params.u == 4);
  CHECK(single.params.v == 9);
  CHECK_THROWS_AS(tune_filter(crops, {}), std::invalid_argument);
}

TEST_CASE("tuning on indistinguishable notes is an error") {
  SubstrateModel m;
  m.seed = 5;
  const auto crop = generate_note(m).feature();
  const NoteImages same{{crop, crop}, {crop, crop}, {crop, crop}};
  CHECK_THROWS_AS(tune_filter(same, {{5, 11}}), MetricError);
}
