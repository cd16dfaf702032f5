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

#include "psf/evaluation.hpp"

#include "psf/parallel.hpp"

#include "json.hpp"

#include <cstdio>
#include <map>
#include <sstream>

namespace psf {

using nlohmann::ordered_json;

NoteDataset extract_dataset(const std::vector<ManifestEntry>& manifest, const std::filesystem::path& base_dir,
                            const Extractor& extractor) {
  if (manifest.empty()) throw std::invalid_argument("manifest is empty");
  std::map<std::string, std::map<int, std::size_t>> index;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& e = manifest[i];
    if (!index[e.note_id].emplace(e.sample_id, i).second) {
      throw std::invalid_argument("manifest lists " + e.note_id + " sample " + std::to_string(e.sample_id) + " twice");
    }
  }
  std::vector<Fingerprint> prints(manifest.size());
  parallel_for(manifest.size(), [&](std::size_t i) {
    prints[i] = extractor.from_capture(load_pgm(base_dir / manifest[i].path));
  });
  std::vector<std::vector<Fingerprint>> rows;
  for (const auto& [note, samples] : index) {
    auto& row = rows.emplace_back();
    for (const auto& [sample, i] : samples) row.push_back(prints[i]);
  }
  return NoteDataset(std::move(rows));
}

Evaluation evaluate(const NoteDataset& d, double threshold) {
  if (d.notes() < 2) throw MetricError("evaluation needs at least two notes");
  Evaluation e;
  e.threshold = threshold;
  e.scores = score_set(d);
  e.intra = sample_stats(e.scores.intra);
  e.inter = sample_stats(e.scores.inter);
  e.dof = degrees_of_freedom(e.scores.inter);
  const auto far = error_curves({{threshold}, e.scores.inter}, {threshold});
  e.far = far.far.front();
  if (e.scores.intra.size() >= 2) {
    e.d_prime = decidability(e.scores);
    e.curve = error_curves(e.scores, default_thresholds());
    e.frr = error_curves(e.scores, {threshold}).frr.front();
  } else {
    e.warnings.push_back("one sample per note: intra-note scores, d', FRR, EER and reliability are omitted");
  }
  if (e.scores.inter.size() >= 100) {
    e.fit = binomial_fit(e.scores.inter);
  } else {
    e.warnings.push_back("fewer than 100 impostor scores: binomial fit omitted");
  }
  e.puf = puf_report(d);
  return e;
}

std::vector<double> table_vi_thresholds() {
  std::vector<double> out;
  for (int i = 30; i <= 40; ++i) out.push_back(i / 100.0);
  return out;
}

namespace {

constexpr std::uint64_t kPaperBits = 900;
constexpr std::uint64_t kPaperRadius = 297;

ordered_json stats_json(const SampleStats& s) {
  ordered_json j;
  j["mean"] = s.n > 0 ? ordered_json(s.mean) : ordered_json(nullptr);
  j["std"] = s.n > 1 ? ordered_json(s.std) : ordered_json(nullptr);
  j["n"] = s.n;
  return j;
}

ordered_json summary_json(const MetricSummary& m) {
  return {{"mean", m.mean}, {"min", m.min}, {"max", m.max}, {"per_item", m.per_item}};
}

template <typename T>
ordered_json maybe(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

std::string report_json(const Evaluation& e) {
  ordered_json j;
  j["intra"] = stats_json(e.intra);
  j["inter"] = stats_json(e.inter);
  j["d_prime"] = maybe(e.d_prime);
  j["dof"] = e.dof;
  j["eer"] = e.curve ? ordered_json(e.curve->eer) : ordered_json(nullptr);
  j["eer_threshold"] = e.curve ? ordered_json(e.curve->eer_threshold) : ordered_json(nullptr);
  j["threshold"] = e.threshold;
  j["frr"] = maybe(e.frr);
  j["far"] = e.far;
  auto& table = j["table_vi"] = ordered_json::array();
  for (double theta : table_vi_thresholds()) {
    table.push_back({{"theta", theta}, {"p", binomial_false_match(kPaperBits, theta)}});
  }
  const auto sp = sphere_packing_attempts(kPaperBits, kPaperRadius);
  j["sphere_packing"] = {{"N", kPaperBits}, {"w", kPaperRadius}, {"attempts", sp.attempts}};
  if (e.fit) {
    j["binomial_fit"] = {{"n_hat", e.fit->n_hat}, {"mean", e.fit->mean}, {"skewness", e.fit->skewness}};
  }
  auto& puf = j["puf"];
  puf["uniformity"] = summary_json(e.puf.uniformity);
  puf["randomness"] = summary_json(e.puf.randomness);
  puf["steadiness"] = summary_json(e.puf.steadiness);
  if (e.puf.has_reliability) puf["reliability"] = summary_json(e.puf.reliability);
  puf["uniqueness"] = summary_json(e.puf.uniqueness);
  puf["uniqueness_mean_hd"] = summary_json(e.puf.uniqueness_mean_hd);
  puf["bit_aliasing"] = summary_json(e.puf.bit_aliasing);
  j["warnings"] = e.warnings;
  return j.dump(2) + "\n";
}

std::string histogram_csv(const Evaluation& e) {
  constexpr double kWidth = 0.005;
  const auto fit = e.fit ? *e.fit : BinomialFit{};
  const std::size_t nbins = 200;
  std::vector<std::size_t> intra(nbins, 0), inter(nbins, 0);
  auto bin = [&](double x) { return std::min(nbins - 1, static_cast<std::size_t>(std::max(0.0, x) / kWidth)); };
  for (double x : e.scores.intra) ++intra[bin(x)];
  for (double x : e.scores.inter) ++inter[bin(x)];
  std::ostringstream out;
  out << "bin_center,intra_count,inter_count,binomial_expected\n";
  char line[128];
  for (std::size_t b = 0; b < nbins; ++b) {
    const double expected = e.fit ? fit.bins[b].binomial_expected : 0.0;
    std::snprintf(line, sizeof line, "%.4f,%zu,%zu,%.6g\n", (static_cast<double>(b) + 0.5) * kWidth, intra[b], inter[b],
                  expected);
    out << line;
  }
  return out.str();
}

std::string puf_csv(const Evaluation& e) {
  const auto& p = e.puf;
  std::ostringstream out;
  out << "note,randomness,steadiness,reliability,uniqueness,uniqueness_mean_hd\n";
  char line[160];
  for (std::size_t s = 0; s < p.randomness.per_item.size(); ++s) {
    char rel[32] = "";
    if (p.has_reliability) std::snprintf(rel, sizeof rel, "%.6f", p.reliability.per_item[s]);
    std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%s,%.6f,%.6f\n", note_id(s).c_str(), p.randomness.per_item[s],
                  p.steadiness.per_item[s], rel, p.uniqueness.per_item[s], p.uniqueness_mean_hd.per_item[s]);
    out << line;
  }
  return out.str();
}

std::string table_vi_text() {
  std::ostringstream out;
  char line[64];
  for (double theta : table_vi_thresholds()) {
    std::snprintf(line, sizeof line, "theta=%.2f p=%.1e\n", theta, binomial_false_match(kPaperBits, theta));
    out << line;
  }
  return out.str();
}

}  // namespace psf
