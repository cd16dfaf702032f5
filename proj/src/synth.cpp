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

#include "psf/synth.hpp"

#include "psf/parallel.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace psf {
namespace {

constexpr double kBaseTransmittance = 0.6;
constexpr double kBandRatio = 1.25;
constexpr double kImpurityDropMin = 0.3;
constexpr double kImpurityDropMax = 0.8;
constexpr double kStreakTransmittance = 0.45;
constexpr double kCreaseTransmittance = 0.85;

// Convolution along columns then rows, keeping only fully supported outputs.
GrayImage smooth_valid(const GrayImage& in, const Eigen::VectorXd& taps) {
  const Eigen::Index k = taps.size();
  const Eigen::Index rows = in.rows(), cols = in.cols() - k + 1;
  GrayImage h = GrayImage::Zero(rows, cols);
  for (Eigen::Index i = 0; i < k; ++i) h += taps(i) * in.block(0, i, rows, cols);
  GrayImage out = GrayImage::Zero(rows - k + 1, cols);
  for (Eigen::Index i = 0; i < k; ++i) out += taps(i) * h.block(i, 0, rows - k + 1, cols);
  return out;
}

void stamp_square(GrayImage& img, const Point& c, int half, double value) {
  const auto x0 = static_cast<Eigen::Index>(std::lround(c.x)) - half;
  const auto y0 = static_cast<Eigen::Index>(std::lround(c.y)) - half;
  img.block(y0, x0, 2 * half + 1, 2 * half + 1).setConstant(value);
}

std::string hex64(std::uint64_t v) {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(v));
  return buf.data();
}

void write_atomic(const std::filesystem::path& path, const void* data, std::size_t size) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void SubstrateModel::validate() const {
  if (size < 64) throw std::invalid_argument("note canvas must be at least 64 px");
  if (!(thickness_corr_length >= 1.0)) throw std::invalid_argument("correlation length must be >= 1 px");
  if (!(thickness_contrast > 0.0 && thickness_contrast < 1.0)) throw std::invalid_argument("contrast must lie in (0, 1)");
  if (!(impurity_density >= 0.0)) throw std::invalid_argument("impurity density must be >= 0");
  if (!(impurity_radius_min >= 1.0 && impurity_radius_max >= impurity_radius_min)) {
    throw std::invalid_argument("impurity radius range must be nonempty with min >= 1");
  }
}

MarkerPair NoteLayout::markers(int canvas) const {
  const double cx = static_cast<double>(canvas / 2);
  return {{cx, static_cast<double>(marker_margin)}, {cx, static_cast<double>(canvas - marker_margin)}};
}

GrayImage thickness_field(Rng& rng, int size, double corr_length) {
  // DoG(sigma, k sigma) peaks where f^2 = ln(k^2) / (2 pi^2 sigma^2 (k^2 - 1)).
  const double k = kBandRatio;
  const double peak = 1.0 / (2.0 * corr_length);
  const double sigma =
      std::sqrt(std::log(k * k) / (2.0 * std::numbers::pi * std::numbers::pi * (k * k - 1.0))) / peak;
  const auto fine = gaussian_taps(sigma);
  const auto coarse = gaussian_taps(k * sigma);
  const Eigen::Index pad = (coarse.size() - 1) / 2;
  const Eigen::Index n = size + 2 * pad;
  GrayImage noise(n, n);
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = rng.normal();

  const Eigen::Index trim = pad - (fine.size() - 1) / 2;
  GrayImage field = smooth_valid(noise, fine).block(trim, trim, size, size) - smooth_valid(noise, coarse);
  field -= field.mean();
  const double sd = std::sqrt(field.square().mean());
  return field / sd;
}

GeneratedNote generate_note(const SubstrateModel& m, const NoteLayout& layout) {
  m.validate();
  Rng rng(m.seed);
  GeneratedNote note;
  const GrayImage z = thickness_field(rng, m.size, m.thickness_corr_length);
  note.image = (kBaseTransmittance + (m.thickness_contrast / 3.0) * z).cwiseMax(0.0).cwiseMin(1.0);

  const double area_mp = static_cast<double>(m.size) * m.size / 1e6;
  const auto count = rng.poisson(m.impurity_density * area_mp);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double cx = rng.uniform(0.0, m.size);
    const double cy = rng.uniform(0.0, m.size);
    const double radius = rng.uniform(m.impurity_radius_min, m.impurity_radius_max);
    const double keep = 1.0 - rng.uniform(kImpurityDropMin, kImpurityDropMax);
    const auto r = static_cast<int>(std::ceil(radius));
    for (int y = static_cast<int>(cy) - r; y <= static_cast<int>(cy) + r; ++y) {
      for (int x = static_cast<int>(cx) - r; x <= static_cast<int>(cx) + r; ++x) {
        if (x < 0 || y < 0 || x >= m.size || y >= m.size) continue;
        const double dx = x - cx, dy = y - cy;
        if (dx * dx + dy * dy <= radius * radius) note.image(y, x) *= keep;
      }
    }
  }

  note.markers = layout.markers(m.size);
  for (const auto& c : {note.markers.m1, note.markers.m2}) {
    stamp_square(note.image, c, layout.pad_half, 1.0);
    stamp_square(note.image, c, layout.marker_half, 0.0);
  }
  note.feature_x = static_cast<int>(note.markers.m1.x + layout.feature.offset_x);
  note.feature_y = static_cast<int>(note.markers.m1.y + layout.feature.offset_y);
  note.feature_size = layout.feature.size;
  if (note.feature_x < 0 || note.feature_y < 0 || note.feature_x + note.feature_size > m.size ||
      note.feature_y + note.feature_size > m.size) {
    throw std::invalid_argument("feature area does not fit on the note canvas");
  }
  return note;
}

void CaptureModel::validate() const {
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  if (!(std::abs(rotation) <= 10.0)) throw std::invalid_argument("capture rotation must lie in [-10, 10] degrees");
  if (!(brightness_jitter >= 0.0 && brightness_jitter < 1.0)) throw std::invalid_argument("brightness jitter must lie in [0, 1)");
  if (occlusions < 0) throw std::invalid_argument("occlusion count must be >= 0");
  if (!(blur_sigma >= 0.0)) throw std::invalid_argument("blur sigma must be >= 0");
}

GrayImage capture(const GrayImage& note, const CaptureModel& c) {
  c.validate();
  Rng rng(c.seed);
  GrayImage img = rotate(note, c.rotation);
  const auto rows = img.rows(), cols = img.cols();

  // Scribbles and fibres: random-walk curves 1-3 px wide.
  std::vector<Eigen::Index> touched;
  for (int k = 0; k < c.occlusions; ++k) {
    double x = rng.uniform(0.0, static_cast<double>(cols));
    double y = rng.uniform(0.0, static_cast<double>(rows));
    double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const int steps = rng.uniform_int(150, 400);
    const double radius = 0.5 * rng.uniform_int(1, 3);
    touched.clear();
    for (int i = 0; i < steps; ++i) {
      heading += 0.15 * rng.normal();
      x += std::cos(heading);
      y += std::sin(heading);
      const auto r = static_cast<int>(std::ceil(radius));
      for (int yy = static_cast<int>(std::lround(y)) - r; yy <= static_cast<int>(std::lround(y)) + r; ++yy) {
        for (int xx = static_cast<int>(std::lround(x)) - r; xx <= static_cast<int>(std::lround(x)) + r; ++xx) {
          if (xx < 0 || yy < 0 || xx >= cols || yy >= rows) continue;
          const double dx = xx - x, dy = yy - y;
          if (dx * dx + dy * dy <= radius * radius + 0.25) touched.push_back(yy * cols + xx);
        }
      }
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (const auto idx : touched) img.data()[idx] *= kStreakTransmittance;
  }

  if (c.crease) {
    const double px = rng.uniform(0.3, 0.7) * static_cast<double>(cols);
    const double py = 0.5 * static_cast<double>(rows);
    const double angle = rng.uniform(-20.0, 20.0) * std::numbers::pi / 180.0;
    const double nx = std::cos(angle), ny = -std::sin(angle);  // normal of a near-vertical line
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index col = 0; col < cols; ++col) {
        if (std::abs((col - px) * nx + (r - py) * ny) <= 0.5) img(r, col) *= kCreaseTransmittance;
      }
    }
  }

  img = gaussian_blur(img, c.blur_sigma);
  img *= 1.0 + rng.uniform(-c.brightness_jitter, c.brightness_jitter);
  if (c.noise_sigma > 0.0) {
    for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] += c.noise_sigma * rng.normal();
  }
  return img.cwiseMax(0.0).cwiseMin(1.0);
}

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::benchmark: return "benchmark";
    case Condition::rotated: return "rotated";
    case Condition::scribbled: return "scribbled";
    case Condition::soaked: return "soaked";
    case Condition::folded: return "folded";
    case Condition::camera: return "camera";
  }
  return "benchmark";
}

std::optional<Condition> parse_condition(std::string_view s) {
  for (auto c : {Condition::benchmark, Condition::rotated, Condition::scribbled, Condition::soaked, Condition::folded,
                 Condition::camera}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

CaptureModel capture_preset(Condition condition, std::uint64_t seed) {
  CaptureModel c;
  c.seed = seed;
  // Condition-specific draws come from an independent stream so that the
  // capture stream itself stays the same across conditions.
  Rng draw(hash_seed(seed, 0x636f6e64ULL));
  switch (condition) {
    case Condition::benchmark: break;
    case Condition::rotated: c.rotation = draw.uniform(-10.0, 10.0); break;
    case Condition::scribbled: c.occlusions = 8; break;
    case Condition::soaked: c.brightness_jitter = 0.03; break;
    case Condition::folded: c.crease = true; break;
    case Condition::camera:
      c.noise_sigma = 0.07;
      c.blur_sigma = 0.8;
      c.brightness_jitter = 0.03;
      break;
  }
  return c;
}

std::uint64_t note_seed(std::uint64_t master, std::size_t s) { return hash_seed(master, s); }

std::uint64_t capture_seed(std::uint64_t master, std::size_t s, std::size_t t) {
  return hash_seed(note_seed(master, s), 0x8000000000000000ULL | t);
}

std::string note_id(std::size_t s) {
  std::array<char, 16> buf{};
  std::snprintf(buf.data(), buf.size(), "note-%04zu", s + 1);
  return buf.data();
}

std::vector<GrayImage> render_note_samples(const DatasetSpec& spec, std::size_t s) {
  SubstrateModel m = spec.substrate;
  m.seed = note_seed(spec.master_seed, s);
  const GeneratedNote note = generate_note(m, spec.layout);
  std::vector<GrayImage> out;
  out.reserve(spec.samples);
  for (std::size_t t = 0; t < spec.samples; ++t) {
    out.push_back(capture(note.image, capture_preset(spec.condition, capture_seed(spec.master_seed, s, t))));
  }
  return out;
}

std::vector<ManifestEntry> generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir) {
  if (spec.notes < 1 || spec.samples < 1) throw std::invalid_argument("dataset needs at least one note and one sample");
  std::filesystem::create_directories(out_dir);
  std::vector<ManifestEntry> manifest(spec.notes * spec.samples);

  parallel_for(spec.notes, [&](std::size_t s) {
    const auto images = render_note_samples(spec, s);
    for (std::size_t t = 0; t < spec.samples; ++t) {
      ManifestEntry& e = manifest[s * spec.samples + t];
      e.note_id = note_id(s);
      e.sample_id = static_cast<int>(t + 1);
      e.path = e.note_id + "_" + std::to_string(t + 1) + ".pgm";
      e.condition = spec.condition;
      e.seed = capture_seed(spec.master_seed, s, t);
      const auto bytes = encode_pgm(images[t]);
      write_atomic(out_dir / e.path, bytes.data(), bytes.size());
    }
  });

  std::string text;
  for (const auto& e : manifest) text += manifest_line(e) + "\n";
  write_atomic(out_dir / kManifestName, text.data(), text.size());
  return manifest;
}

std::string manifest_line(const ManifestEntry& e) {
  nlohmann::ordered_json j;
  j["note_id"] = e.note_id;
  j["sample_id"] = e.sample_id;
  j["path"] = e.path;
  j["condition"] = std::string(to_string(e.condition));
  j["seed"] = hex64(e.seed);
  return j.dump();
}

ManifestEntry parse_manifest_line(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  ManifestEntry e;
  e.note_id = j.at("note_id").get<std::string>();
  e.sample_id = j.at("sample_id").get<int>();
  e.path = j.at("path").get<std::string>();
  const auto cond = parse_condition(j.at("condition").get<std::string>());
  if (!cond) throw std::invalid_argument("unknown condition in manifest: " + j.at("condition").get<std::string>());
  e.condition = *cond;
  e.seed = std::stoull(j.at("seed").get<std::string>(), nullptr, 16);
  return e;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_manifest_line(line));
  }
  return out;
}

}  // namespace psf
