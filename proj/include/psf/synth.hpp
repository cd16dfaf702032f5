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

#include "psf/image.hpp"
#include "psf/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace psf {

/// Back-lit substrate: band-limited thickness texture plus dark impurities.
struct SubstrateModel {
  std::uint64_t seed = 0;
  int size = 900;
  double thickness_corr_length = 8.0;  // half the dominant texture wavelength, px
  double thickness_contrast = 0.35;    // three-sigma swing of transmittance
  double impurity_density = 300.0;     // per megapixel
  double impurity_radius_min = 1.0;
  double impurity_radius_max = 4.0;

  void validate() const;
};

/// Where the fiducials and the feature rectangle sit on a generated note.
struct NoteLayout {
  int marker_half = 7;   // dark square is (2 * half + 1) px wide
  int pad_half = 14;     // clear surround, same convention
  int marker_margin = 40;
  FeatureLayout feature{};
  double marker_threshold = 0.1;
  int marker_min_area = 100;

  /// Centres of the upper and lower fiducials on a square canvas.
  MarkerPair markers(int canvas) const;

  friend bool operator==(const NoteLayout&, const NoteLayout&) = default;
};

struct GeneratedNote {
  GrayImage image;
  MarkerPair markers;
  int feature_x = 0;
  int feature_y = 0;
  int feature_size = 0;

  /// Ground-truth feature patch.
  GrayImage feature() const { return image.block(feature_y, feature_x, feature_size, feature_size); }
};

/// Fully determined by m.seed.
GeneratedNote generate_note(const SubstrateModel& m, const NoteLayout& layout = {});

/// Zero-mean, unit-variance band-pass noise peaking at 1 / (2 corr_length)
/// cycles/px: a narrow difference of Gaussians at sigma and 1.25 sigma.
GrayImage thickness_field(Rng& rng, int size, double corr_length);

struct CaptureModel {
  double noise_sigma = 0.045;
  double rotation = 0.0;  // degrees, clockwise
  double brightness_jitter = 0.01;
  int occlusions = 0;
  double blur_sigma = 0.0;
  bool crease = false;
  std::uint64_t seed = 0;

  void validate() const;
};

GrayImage capture(const GrayImage& note, const CaptureModel& c);

enum class Condition { benchmark, rotated, scribbled, soaked, folded, camera };

std::string_view to_string(Condition c);
std::optional<Condition> parse_condition(std::string_view s);

/// Capture settings for one sample of a condition, drawn from the capture seed.
CaptureModel capture_preset(Condition c, std::uint64_t capture_seed);

std::uint64_t note_seed(std::uint64_t master, std::size_t s);
std::uint64_t capture_seed(std::uint64_t master, std::size_t s, std::size_t t);

struct DatasetSpec {
  std::size_t notes = 100;
  std::size_t samples = 10;
  Condition condition = Condition::benchmark;
  std::uint64_t master_seed = 0;
  SubstrateModel substrate{};  // seed is replaced per note
  NoteLayout layout{};
};

struct ManifestEntry {
  std::string note_id;
  int sample_id = 0;
  std::string path;  // relative to the manifest directory
  Condition condition = Condition::benchmark;
  std::uint64_t seed = 0;
};

inline constexpr std::string_view kManifestName = "manifest.jsonl";

std::string note_id(std::size_t s);

/// Generates every capture of note s (zero-based) in memory.
std::vector<GrayImage> render_note_samples(const DatasetSpec& spec, std::size_t s);

/// Writes S x T PGM files plus manifest.jsonl into out_dir.
std::vector<ManifestEntry> generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir);

std::string manifest_line(const ManifestEntry& e);
ManifestEntry parse_manifest_line(std::string_view line);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

}  // namespace psf
