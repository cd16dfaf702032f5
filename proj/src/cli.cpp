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

#include "psf/cli.hpp"

#include "psf/config.hpp"
#include "psf/evaluation.hpp"
#include "psf/pipeline.hpp"
#include "psf/protocol.hpp"
#include "psf/synth.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace psf {
namespace {

constexpr int kAccept = 0;
constexpr int kReject = 1;
constexpr int kError = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) throw std::runtime_error("cannot write " + path.string());
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

Fingerprint read_fingerprint(const std::filesystem::path& path) { return Fingerprint::from_hex(trim(slurp(path))); }

std::string verdict_line(const MatchResult& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "HD=%.6f %s", m.hd, m.accepted ? "ACCEPT" : "REJECT");
  return buf;
}

/// Where a command gets its probe fingerprint from.
struct ProbeArgs {
  std::string image;
  std::string fingerprint;
  bool no_align = false;

  void add_to(CLI::App* cmd) {
    auto* img = cmd->add_option("--image", image, "PGM capture of the note")->check(CLI::ExistingFile);
    auto* fp = cmd->add_option("--fingerprint", fingerprint, "file holding 512 hex characters")->check(CLI::ExistingFile);
    img->excludes(fp);
    cmd->add_flag("--no-align", no_align, "image is already the 721x721 feature crop");
  }

  Fingerprint load(const Config& cfg) const {
    if (!fingerprint.empty()) return read_fingerprint(fingerprint);
    if (image.empty()) throw UsageError("one of --image or --fingerprint is required");
    const Extractor ex(cfg.gabor, cfg.layout);
    const auto img = load_pgm(image);
    return no_align ? ex.from_crop(img) : ex.from_capture(img);
  }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polymer substrate fingerprinting: synthesis, extraction, evaluation and note verification", "psf"};
  app.fallthrough();
  app.require_subcommand(0, 1);

  std::string config_path;
  bool dump = false;
  double threshold_flag = -1.0;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_flag("--dump-config", dump, "print the effective configuration and exit");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a seeded synthetic dataset");
  DatasetSpec spec;
  std::string condition = "benchmark";
  std::string synth_out;
  synth->add_option("--notes", spec.notes, "number of notes")->check(CLI::PositiveNumber);
  synth->add_option("--samples", spec.samples, "captures per note")->check(CLI::PositiveNumber);
  synth->add_option("--condition", condition, "benchmark|rotated|scribbled|soaked|folded|camera")
      ->check(CLI::IsMember({"benchmark", "rotated", "scribbled", "soaked", "folded", "camera"}));
  synth->add_option("--seed", spec.master_seed, "master seed");
  synth->add_option("--out", synth_out, "output directory")->required();

  // extract
  auto* extract = app.add_subcommand("extract", "print the fingerprint of one image");
  std::string extract_image, extract_out;
  bool extract_no_align = false;
  extract->add_option("image", extract_image, "PGM image")->required()->check(CLI::ExistingFile);
  extract->add_flag("--no-align", extract_no_align, "image is already the 721x721 feature crop");
  extract->add_option("--out", extract_out, "write the hex here instead of stdout");

  // match
  auto* match = app.add_subcommand("match", "compare two fingerprint files");
  std::string match_a, match_b;
  match->add_option("a", match_a, "fingerprint file")->required()->check(CLI::ExistingFile);
  match->add_option("b", match_b, "fingerprint file")->required()->check(CLI::ExistingFile);
  match->add_option("--threshold", threshold_flag, "acceptance threshold");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a dataset described by a manifest");
  std::string manifest, eval_out, histogram, puf_out;
  bool table_vi = false;
  eval->add_option("--manifest", manifest, "manifest.jsonl of a dataset")->check(CLI::ExistingFile);
  eval->add_option("--out", eval_out, "metrics JSON (stdout when absent)");
  eval->add_option("--histogram", histogram, "histogram CSV");
  eval->add_option("--puf-csv", puf_out, "per-note PUF metrics CSV");
  eval->add_option("--threshold", threshold_flag, "operating threshold");
  eval->add_flag("--table-vi", table_vi, "print false-match odds for thresholds 0.30..0.40 at N = 900");

  // keygen
  auto* kg = app.add_subcommand("keygen", "create an issuer key pair (ECDSA P-521)");
  std::string priv_path, pub_path;
  kg->add_option("--private", priv_path, "private key PEM (written with mode 0600)")->required();
  kg->add_option("--public", pub_path, "public key PEM")->required();

  // enroll / verify
  auto* enroll = app.add_subcommand("enroll", "register a note");
  enroll->require_subcommand(1);
  auto* verify = app.add_subcommand("verify", "verify a note");
  verify->require_subcommand(1);

  std::string serial, store_path, key_path, payload_path, payload_out;
  int denomination = 0;
  ProbeArgs probe;

  auto* enroll_online = enroll->add_subcommand("online", "append the note to a store");
  auto* enroll_offline = enroll->add_subcommand("offline", "produce a signed Base64 payload");
  auto* verify_online = verify->add_subcommand("online", "match against the enrolled fingerprint");
  auto* verify_offline_cmd = verify->add_subcommand("offline", "check a signed payload and match");
  for (auto* cmd : {enroll_online, enroll_offline}) {
    cmd->add_option("--serial", serial, "serial number")->required();
    cmd->add_option("--denomination", denomination, "value in minor units")
        ->required()
        ->check(CLI::Range(0, 65535));
    probe.add_to(cmd);
  }
  enroll_online->add_option("--store", store_path, "JSON-lines store (config paths.store when absent)");
  enroll_offline->add_option("--key", key_path, "issuer private key PEM")->required()->check(CLI::ExistingFile);
  enroll_offline->add_option("--out", payload_out, "write the Base64 payload here instead of stdout");

  verify_online->add_option("--serial", serial, "serial number")->required();
  verify_online->add_option("--store", store_path, "JSON-lines store (config paths.store when absent)");
  verify_offline_cmd->add_option("--payload", payload_path, "file holding the Base64 payload")
      ->required()
      ->check(CLI::ExistingFile);
  verify_offline_cmd->add_option("--key", key_path, "issuer public key PEM")->required()->check(CLI::ExistingFile);
  for (auto* cmd : {verify_online, verify_offline_cmd}) {
    probe.add_to(cmd);
    cmd->add_option("--threshold", threshold_flag, "acceptance threshold");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kError;
  }

  try {
    Config cfg = config_path.empty() ? Config{} : load_config(config_path);
    if (threshold_flag >= 0.0) {
      cfg.threshold = threshold_flag;
      cfg.validate();
    }
    if (dump) {
      out << dump_config(cfg);
      return kAccept;
    }
    if (app.get_subcommands().empty()) {
      err << app.help();
      return kError;
    }

    if (*synth) {
      const auto parsed = parse_condition(condition);
      spec.condition = *parsed;
      spec.layout = cfg.layout;
      const auto entries = generate_dataset(spec, synth_out);
      nlohmann::ordered_json j;
      j["files"] = entries.size();
      j["manifest"] = (std::filesystem::path(synth_out) / kManifestName).string();
      out << j.dump() << '\n';
      return kAccept;
    }

    if (*extract) {
      const Extractor ex(cfg.gabor, cfg.layout);
      const auto img = load_pgm(extract_image);
      const auto hex = (extract_no_align ? ex.from_crop(img) : ex.from_capture(img)).to_hex();
      if (extract_out.empty()) {
        out << hex << '\n';
      } else {
        spit(extract_out, hex + "\n");
      }
      return kAccept;
    }

    if (*match) {
      const auto m = decide(read_fingerprint(match_a), read_fingerprint(match_b), cfg.threshold);
      out << verdict_line(m) << '\n';
      return m.accepted ? kAccept : kReject;
    }

    if (*eval) {
      if (manifest.empty() && !table_vi) throw UsageError("eval needs --manifest or --table-vi");
      if (table_vi) out << table_vi_text();
      if (manifest.empty()) return kAccept;
      if (table_vi && eval_out.empty()) throw UsageError("--table-vi with --manifest needs --out for the report");
      const std::filesystem::path mpath(manifest);
      const Extractor ex(cfg.gabor, cfg.layout);
      const auto dataset = extract_dataset(read_manifest(mpath), mpath.parent_path(), ex);
      const auto result = evaluate(dataset, cfg.threshold);
      for (const auto& w : result.warnings) err << "warning: " << w << '\n';
      const auto report = report_json(result);
      if (eval_out.empty()) {
        out << report;
      } else {
        spit(eval_out, report);
      }
      if (!histogram.empty()) spit(histogram, histogram_csv(result));
      if (!puf_out.empty()) spit(puf_out, puf_csv(result));
      return kAccept;
    }

    if (*kg) {
      keygen(priv_path, pub_path);
      return kAccept;
    }

    if (*enroll_online || *enroll_offline) {
      const NoteRecord record{serial, static_cast<std::uint16_t>(denomination), probe.load(cfg)};
      if (*enroll_online) {
        NoteStore store(store_path.empty() ? cfg.store_path : store_path);
        store.enroll(record);
        out << "ENROLLED " << serial << '\n';
      } else {
        const auto reg = register_offline(record, SigningKey::load(key_path));
        if (payload_out.empty()) {
          out << reg.text << '\n';
        } else {
          spit(payload_out, reg.text + "\n");
        }
      }
      return kAccept;
    }

    if (*verify_online) {
      const NoteStore store(store_path.empty() ? cfg.store_path : store_path);
      if (!store.contains(serial)) {
        err << "error: not enrolled: " << serial << '\n';
        return kError;
      }
      const auto m = store.verify(serial, probe.load(cfg), cfg.threshold);
      out << verdict_line(m) << (m.accepted ? "" : " fingerprint mismatch") << '\n';
      return m.accepted ? kAccept : kReject;
    }

    if (*verify_offline_cmd) {
      const auto key = VerifyingKey::load(key_path);
      const auto verdict = verify_offline(trim(slurp(payload_path)), probe.load(cfg), key, cfg.threshold);
      if (!verdict.signature_valid) {
        out << "REJECT signature invalid\n";
        return kReject;
      }
      out << verdict_line(*verdict.match) << (verdict.match->accepted ? "" : " fingerprint mismatch") << " serial="
          << verdict.record->serial << '\n';
      return verdict.match->accepted ? kAccept : kReject;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}

}  // namespace psf
