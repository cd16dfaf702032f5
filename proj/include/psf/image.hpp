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

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace psf {

/// Dense row-major raster; element (row, col) is the pixel at (y, x).
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Grayscale intensities in [0, 1].
using GrayImage = Image<double>;

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Two fiducial centroids. m1 is the upper marker (smaller y; ties: smaller x).
struct MarkerPair {
  Point m1;
  Point m2;
};

/// Placement of the canonical feature rectangle relative to the upper marker.
struct FeatureLayout {
  double offset_x = -360.0;
  double offset_y = 50.0;
  int size = 721;

  friend bool operator==(const FeatureLayout&, const FeatureLayout&) = default;
};

// PGM I/O. Reads P5 (and P6, converted with Rec. 601 luma); writes P5 only.
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
GrayImage load_pgm(const std::filesystem::path& path);
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

/// Rec. 601 luma of an RGB triple of planes.
template <typename DerivedR, typename DerivedG, typename DerivedB>
GrayImage luma(const Eigen::ArrayBase<DerivedR>& r, const Eigen::ArrayBase<DerivedG>& g,
               const Eigen::ArrayBase<DerivedB>& b) {
  return (0.299 * r + 0.587 * g + 0.114 * b).template cast<double>();
}

/// Bilinear sample at sub-pixel (x, y); neighbours outside the raster read as `fill`.
double sample_bilinear(const GrayImage& img, double x, double y, double fill);

/// Finds the two dark blobs (pixels < threshold, 8-connected, area >= min_area).
/// Centroids are weighted by darkness (1 - intensity).
MarkerPair detect_markers(const GrayImage& img, double threshold, int min_area = 9);

/// Signed tilt of the marker axis in degrees; positive means the content is
/// rotated clockwise as displayed (y pointing down).
double rotation_angle(const MarkerPair& m);

/// Rotates content clockwise by alpha_deg about the raster center, bilinear,
/// white fill. |alpha_deg| must not exceed 15.
GrayImage rotate(const GrayImage& img, double alpha_deg);

/// Feature rectangle whose top-left corner sits at m1 + layout offset,
/// resampled bilinearly when the corner is not on the pixel lattice.
GrayImage crop_feature_area(const GrayImage& img, const MarkerPair& m,
                            const FeatureLayout& layout = {});

/// Separable Gaussian blur with edge clamping. sigma <= 0 returns a copy.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

/// Normalised 1-D Gaussian taps truncated at ceil(4 sigma).
Eigen::VectorXd gaussian_taps(double sigma);

}  // namespace psf
