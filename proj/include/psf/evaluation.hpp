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
#include "psf/pipeline.hpp"
#include "psf/puf.hpp"
#include "psf/synth.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace psf {

/// Extracts every manifest entry (paths relative to base_dir) and arranges
/// the fingerprints by note id then sample id, both ascending.
NoteDataset extract_dataset(const std::vector<ManifestEntry>& manifest, const std::filesystem::path& base_dir,
                            const Extractor& extractor);

struct Evaluation {
  ScoreSet scores;
  SampleStats intra;
  SampleStats inter;
  double dof = 0.0;
  double threshold = kDefaultThreshold;
  double far = 0.0;  // at threshold
  // Need intra scores, so absent when every note has one sample.
  std::optional<double> d_prime;
  std::optional<ErrorCurve> curve;
  std::optional<double> frr;
  std::optional<BinomialFit> fit;  // needs at least 100 impostor scores
  PufReport puf;
  std::vector<std::string> warnings;
};

/// Needs at least two notes. Omitted quantities are listed in warnings.
Evaluation evaluate(const NoteDataset& d, double threshold = kDefaultThreshold);

/// Thresholds 0.30, 0.31, ..., 0.40.
std::vector<double> table_vi_thresholds();

/// Fixed key order; doubles in shortest round-trip form.
std::string report_json(const Evaluation& e);
/// bin_center,intra_count,inter_count,binomial_expected
std::string histogram_csv(const Evaluation& e);
/// One row per note: randomness, steadiness, reliability, uniqueness variants.
std::string puf_csv(const Evaluation& e);
/// "theta=0.30 p=3.5e-34" lines for thresholds 0.30..0.40 at N = 900.
std::string table_vi_text();

}  // namespace psf
