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

#include "psf/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>

namespace psf {
namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint() {
    skip_space_and_comments();
    long value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) throw ImageError("malformed header: dimension too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw ImageError("malformed header");
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void expect_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw ImageError("malformed header");
    ++pos_;
  }

  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw ImageError("malformed header: missing magic");
  const char kind = static_cast<char>(bytes[1]);
  if (kind != '5' && kind != '6') throw ImageError("unsupported format: P" + std::string(1, kind));
  const int channels = kind == '5' ? 1 : 3;

  HeaderReader header(bytes.subspan(2));
  const long width = header.read_uint();
  const long height = header.read_uint();
  const long maxval = header.read_uint();
  header.expect_single_space();
  if (width < 1 || height < 1) throw ImageError("malformed header: empty image");
  if (maxval != 255) throw ImageError("unsupported maxval: " + std::to_string(maxval));

  const std::size_t offset = 2 + header.pos();
  const std::size_t needed = static_cast<std::size_t>(width * height * channels);
  if (bytes.size() < offset + needed) throw ImageError("truncated pixel data");
  const std::uint8_t* data = bytes.data() + offset;

  GrayImage img(height, width);
  if (channels == 1) {
    for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = data[i] / 255.0;
    return img;
  }
  Eigen::Map<const Eigen::Array<std::uint8_t, Eigen::Dynamic, 3, Eigen::RowMajor>> rgb(data, width * height, 3);
  const Eigen::ArrayXd y = luma(rgb.col(0).cast<double>(), rgb.col(1).cast<double>(), rgb.col(2).cast<double>()) / 255.0;
  std::copy(y.data(), y.data() + y.size(), img.data());
  return img;
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  if (img.rows() < 1 || img.cols() < 1) throw ImageError("cannot encode an empty image");
  const std::string header = "P5\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + static_cast<std::size_t>(img.size()));
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    const double v = std::clamp(img.data()[i], 0.0, 1.0);
    out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
  }
  return out;
}

GrayImage load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pgm(bytes);
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
  const auto bytes = encode_pgm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ImageError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ImageError("write failed: " + path.string());
}

double sample_bilinear(const GrayImage& img, double x, double y, double fill) {
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const double fx = x - fx0;
  const double fy = y - fy0;
  const auto x0 = static_cast<Eigen::Index>(fx0);
  const auto y0 = static_cast<Eigen::Index>(fy0);
  auto at = [&](Eigen::Index r, Eigen::Index c) {
    return (r >= 0 && r < img.rows() && c >= 0 && c < img.cols()) ? img(r, c) : fill;
  };
  return (1.0 - fy) * ((1.0 - fx) * at(y0, x0) + fx * at(y0, x0 + 1)) +
         fy * ((1.0 - fx) * at(y0 + 1, x0) + fx * at(y0 + 1, x0 + 1));
}

MarkerPair detect_markers(const GrayImage& img, double threshold, int min_area) {
  const Eigen::Index rows = img.rows();
  const Eigen::Index cols = img.cols();
  Image<std::uint8_t> visited = Image<std::uint8_t>::Zero(rows, cols);

  struct Blob {
    Point centroid;
    long area;
  };
  std::vector<Blob> blobs;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> stack;

  for (Eigen::Index r0 = 0; r0 < rows; ++r0) {
    for (Eigen::Index c0 = 0; c0 < cols; ++c0) {
      if (visited(r0, c0) || img(r0, c0) >= threshold) continue;
      double sw = 0.0, sx = 0.0, sy = 0.0;
      long area = 0;
      visited(r0, c0) = 1;
      stack.assign(1, {r0, c0});
      while (!stack.empty()) {
        const auto [r, c] = stack.back();
        stack.pop_back();
        const double w = 1.0 - img(r, c);
        sw += w;
        sx += w * static_cast<double>(c);
        sy += w * static_cast<double>(r);
        ++area;
        for (Eigen::Index dr = -1; dr <= 1; ++dr) {
          for (Eigen::Index dc = -1; dc <= 1; ++dc) {
            const Eigen::Index rr = r + dr, cc = c + dc;
            if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
            if (visited(rr, cc) || img(rr, cc) >= threshold) continue;
            visited(rr, cc) = 1;
            stack.emplace_back(rr, cc);
          }
        }
      }
      if (area >= min_area) blobs.push_back({{sx / sw, sy / sw}, area});
    }
  }

  if (blobs.size() != 2) {
    throw ImageError("marker detection failed: found " + std::to_string(blobs.size()) + " qualifying blobs");
  }
  auto upper_first = [](const Point& a, const Point& b) { return a.y < b.y || (a.y == b.y && a.x < b.x); };
  MarkerPair m{blobs[0].centroid, blobs[1].centroid};
  if (upper_first(m.m2, m.m1)) std::swap(m.m1, m.m2);
  return m;
}

double rotation_angle(const MarkerPair& m) {
  const double dy = m.m2.y - m.m1.y;
  if (dy == 0.0) throw ImageError("vertical baseline required");
  return std::atan((m.m1.x - m.m2.x) / dy) * 180.0 / std::numbers::pi;
}

GrayImage rotate(const GrayImage& img, double alpha_deg) {
  if (!(std::abs(alpha_deg) <= 15.0)) throw std::invalid_argument("rotation angle outside [-15, 15] degrees");
  if (alpha_deg == 0.0) return img;
  const double a = alpha_deg * std::numbers::pi / 180.0;
  const double c = std::cos(a);
  const double s = std::sin(a);
  const double cx = 0.5 * static_cast<double>(img.cols() - 1);
  const double cy = 0.5 * static_cast<double>(img.rows() - 1);
  GrayImage out(img.rows(), img.cols());
  for (Eigen::Index r = 0; r < img.rows(); ++r) {
    const double dy = static_cast<double>(r) - cy;
    for (Eigen::Index col = 0; col < img.cols(); ++col) {
      const double dx = static_cast<double>(col) - cx;
      out(r, col) = sample_bilinear(img, cx + dx * c + dy * s, cy - dx * s + dy * c, 1.0);
    }
  }
  return out;
}

GrayImage crop_feature_area(const GrayImage& img, const MarkerPair& m, const FeatureLayout& layout) {
  const double ox = m.m1.x + layout.offset_x;
  const double oy = m.m1.y + layout.offset_y;
  const double last = static_cast<double>(layout.size - 1);
  if (layout.size < 1 || ox < 0.0 || oy < 0.0 || ox + last > static_cast<double>(img.cols() - 1) ||
      oy + last > static_cast<double>(img.rows() - 1)) {
    throw ImageError("feature area out of bounds");
  }
  GrayImage out(layout.size, layout.size);
  const double rx = std::round(ox);
  const double ry = std::round(oy);
  if (rx == ox && ry == oy) {
    out = img.block(static_cast<Eigen::Index>(ry), static_cast<Eigen::Index>(rx), layout.size, layout.size);
    return out;
  }
  for (int r = 0; r < layout.size; ++r) {
    for (int c = 0; c < layout.size; ++c) out(r, c) = sample_bilinear(img, ox + c, oy + r, 1.0);
  }
  return out;
}

Eigen::VectorXd gaussian_taps(double sigma) {
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  Eigen::VectorXd taps(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) taps(i + radius) = std::exp(-0.5 * i * i / (sigma * sigma));
  return taps / taps.sum();
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  if (sigma <= 0.0) return img;
  const Eigen::VectorXd taps = gaussian_taps(sigma);
  const auto radius = (taps.size() - 1) / 2;
  const Eigen::Index rows = img.rows(), cols = img.cols();
  GrayImage tmp(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (Eigen::Index k = -radius; k <= radius; ++k) acc += taps(k + radius) * img(r, std::clamp<Eigen::Index>(c + k, 0, cols - 1));
      tmp(r, c) = acc;
    }
  }
  GrayImage out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (Eigen::Index k = -radius; k <= radius; ++k) acc += taps(k + radius) * tmp(std::clamp<Eigen::Index>(r + k, 0, rows - 1), c);
      out(r, c) = acc;
    }
  }
  return out;
}

}  // namespace psf
