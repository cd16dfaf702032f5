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

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace psf {

/// Gabor filter selection. Defaults are the polymer-note setting.
struct GaborParams {
  double f_max = 0.25;
  double gamma = std::numbers::sqrt2;
  double eta = std::numbers::sqrt2;
  int u = 5;
  int scales = 6;  // U
  int v = 11;
  int orientations = 30;  // V
  int kernel_size = 101;

  void validate() const;
  friend bool operator==(const GaborParams&, const GaborParams&) = default;
};

/// Spatial kernel; element (row, col) holds psi(x = col - h, y = row - h), h = (size - 1) / 2.
template <typename Scalar>
using GaborKernel = Image<std::complex<Scalar>>;

/// Complex responses at the sample lattice; element (r, c) belongs to pixel
/// (x = origin + stride c, y = origin + stride r).
using ResponseGrid = Image<std::complex<double>>;

/// Square sampling lattice over the feature crop.
struct SampleGrid {
  int origin = 50;
  int stride = 20;
  int count = 32;
};

inline constexpr int kFeatureSize = 721;

/// Central frequency of scale u: f_max / sqrt(2^(u-1)).
double scale_frequency(const GaborParams& p);

/// Orientation of index v: (v - 1) pi / V.
double orientation_angle(const GaborParams& p);

template <typename Scalar = double>
GaborKernel<Scalar> build_kernel(const GaborParams& p) {
  p.validate();
  const double f = scale_frequency(p);
  const double theta = orientation_angle(p);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double norm = f * f / (std::numbers::pi * p.gamma * p.eta);
  const int h = (p.kernel_size - 1) / 2;
  GaborKernel<Scalar> k(p.kernel_size, p.kernel_size);
  for (int row = 0; row < p.kernel_size; ++row) {
    const double y = row - h;
    for (int col = 0; col < p.kernel_size; ++col) {
      const double x = col - h;
      const double xr = x * ct + y * st;
      const double yr = -x * st + y * ct;
      const double envelope = norm * std::exp(-f * f * ((xr / p.gamma) * (xr / p.gamma) + (yr / p.eta) * (yr / p.eta)));
      const double phase = 2.0 * std::numbers::pi * f * xr;
      k(row, col) = std::complex<Scalar>(static_cast<Scalar>(envelope * std::cos(phase)),
                                         static_cast<Scalar>(envelope * std::sin(phase)));
    }
  }
  return k;
}

/// Sum_a Sum_b I(a, b) conj(psi(x - a, y - b)) evaluated only at the lattice
/// points. Since conj(psi(u, v)) = psi(-u, -v), each entry is the elementwise
/// product of the kernel with the image patch centred on the lattice point.
template <typename Derived, typename Scalar>
ResponseGrid filter_response(const Eigen::ArrayBase<Derived>& img, const GaborKernel<Scalar>& kernel,
                             const SampleGrid& grid) {
  const Eigen::Index n = kernel.rows();
  if (kernel.cols() != n || n % 2 == 0) throw std::invalid_argument("kernel must be square with odd size");
  const Eigen::Index h = (n - 1) / 2;
  const Eigen::Index last = grid.origin + static_cast<Eigen::Index>(grid.stride) * (grid.count - 1);
  if (grid.count < 1 || grid.origin - h < 0 || last + h >= img.rows() || last + h >= img.cols()) {
    throw std::invalid_argument("wrong image dimensions: kernel leaves the image at the sample lattice");
  }
  const Image<double> re = kernel.real().template cast<double>();
  const Image<double> im = kernel.imag().template cast<double>();
  ResponseGrid out(grid.count, grid.count);
  for (int r = 0; r < grid.count; ++r) {
    const Eigen::Index y = grid.origin + static_cast<Eigen::Index>(grid.stride) * r;
    for (int c = 0; c < grid.count; ++c) {
      const Eigen::Index x = grid.origin + static_cast<Eigen::Index>(grid.stride) * c;
      const auto patch = img.derived().block(y - h, x - h, n, n).template cast<double>();
      out(r, c) = {(patch * re).sum(), (patch * im).sum()};
    }
  }
  return out;
}

/// Canonical form: 721x721 crop, lattice 50 + 20k, k = 0..31.
template <typename Derived, typename Scalar>
ResponseGrid filter_response(const Eigen::ArrayBase<Derived>& img, const GaborKernel<Scalar>& kernel) {
  if (img.rows() != kFeatureSize || img.cols() != kFeatureSize) {
    throw std::invalid_argument("wrong image dimensions: expected 721x721 feature crop, got " +
                                std::to_string(img.cols()) + "x" + std::to_string(img.rows()));
  }
  return filter_response(img, kernel, SampleGrid{});
}

/// Two bits per entry in row-major order: (Re >= 0) then (Im >= 0).
Fingerprint quantize(const ResponseGrid& grid);

Fingerprint extract(const GrayImage& crop, const GaborParams& p);
Fingerprint extract(const GrayImage& crop, const GaborKernel<double>& kernel);

/// Crops grouped by note: images[s][t].
using NoteImages = std::vector<std::vector<GrayImage>>;

struct TuneResult {
  GaborParams params;
  double d_prime = 0.0;
  std::vector<std::pair<GaborParams, double>> evaluated;
};

/// Exhaustive search over (u, v) maximising decidability; ties prefer lower u,
/// then lower v. Other fields of `base` are kept.
TuneResult tune_filter(const NoteImages& crops, const std::vector<std::pair<int, int>>& search_space,
                       const GaborParams& base = {});

}  // namespace psf
