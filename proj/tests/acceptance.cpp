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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Usage: psf_acceptance WORK_DIR

#include "psf/biometric.hpp"
#include "psf/cli.hpp"
#include "psf/evaluation.hpp"
#include "psf/gabor.hpp"
#include "psf/pipeline.hpp"
#include "psf/protocol.hpp"
#include "psf/puf.hpp"
#include "psf/synth.hpp"

#include "json.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace psf;
namespace fs = std::filesystem;
using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;
using cd = std::complex<double>;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "psf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << "psf " << args[1] << " failed (" << code << "): " << err.str();
  return code;
}

// synth then eval through the command line; returns the report path.
fs::path run_condition(const fs::path& work, const std::string& name, const std::string& condition) {
  const fs::path dir = work / name;
  fs::remove_all(dir);
  if (cli({"synth", "--notes", "100", "--samples", "10", "--condition", condition, "--seed", "42", "--out", dir.string()}) != 0) {
    throw std::runtime_error("synth failed for " + name);
  }
  const fs::path report = work / (name + ".json");
  if (cli({"eval", "--manifest", (dir / "manifest.jsonl").string(), "--out", report.string()}) != 0) {
    throw std::runtime_error("eval failed for " + name);
  }
  return report;
}

nlohmann::json load_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

// ---------------------------------------------------------------------------

Outcome false_match_odds() {
  // Odds of false match at N = 900 as printed.
  const double printed[] = {3.5e-34, 6.0e-31, 6.7e-28, 5.0e-25, 2.5e-22, 8.2e-20,
                            1.9e-17, 2.9e-15, 3.0e-13, 2.2e-11, 1.1e-9};
  Outcome o;
  const auto t0 = Clock::now();
  const auto thetas = table_vi_thresholds();
  std::vector<double> got;
  for (double th : thetas) got.push_back(binomial_false_match(900, th));
  const double elapsed = seconds_since(t0);
  o.require(thetas.size() == 11, "expected 11 thresholds");
  double worst = 1.0;
  for (std::size_t i = 0; i < got.size() && i < 11; ++i) {
    const double ratio = got[i] > printed[i] ? got[i] / printed[i] : printed[i] / got[i];
    worst = std::max(worst, ratio);
    o.require(ratio <= 3.0, fmt("theta=%.2f off by more than 3x", thetas[i]));
  }
  o.require(elapsed < 1.0, fmt("took %.3f s", elapsed));
  o.detail = fmt("worst ratio %.3f", worst) + fmt(", %.4f s", elapsed) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome sphere_packing() {
  Outcome o;
  const auto sp = sphere_packing_attempts(900, 297);
  o.require(sp.attempts >= 2e24 && sp.attempts <= 8e24, "attempts outside [2e24, 8e24]");
  // Ball volume from Pascal's row, independent of the library's running product.
  std::vector<cpp_int> row{1};
  for (unsigned k = 1; k <= 900; ++k) {
    std::vector<cpp_int> next(k + 1);
    next[0] = next[k] = 1;
    for (unsigned i = 1; i < k; ++i) next[i] = row[i - 1] + row[i];
    row = std::move(next);
  }
  cpp_int ball = 0;
  for (unsigned i = 0; i <= 297; ++i) ball += row[i];
  const cpp_int space = cpp_int(1) << 900;
  o.require(sp.space == space, "space is not 2^900");
  o.require(sp.ball == ball, "ball differs from Pascal sum");
  const cpp_rational attempts(sp.space, sp.ball);
  o.require(attempts * cpp_rational(ball) == cpp_rational(space), "2^N != N' * sum C(N, i)");
  o.detail = fmt("N'=%.4g", sp.attempts) + (o.detail.empty() ? ", identity exact" : "; " + o.detail);
  return o;
}

struct Benchmark {
  fs::path report;
  double seconds = 0.0;
};

Outcome benchmark(const Benchmark& b) {
  Outcome o;
  const auto j = load_json(b.report);
  const double inter = j["inter"]["mean"], dof = j["dof"], dp = j["d_prime"], frr = j["frr"], far = j["far"];
  const int n_inter = j["inter"]["n"], n_intra = j["intra"]["n"];
  o.require(inter >= 0.49 && inter <= 0.51, "inter mean outside [0.49, 0.51]");
  o.require(dof >= 500.0, "DoF below 500");
  o.require(dp >= 10.0, "d' below 10");
  o.require(j["threshold"] == 0.33, "threshold is not 0.33");
  o.require(frr == 0.0 && far == 0.0, "nonzero FRR or FAR");
  o.require(n_inter == 4950 && n_intra == 4500, "unexpected pair counts");
  o.require(b.seconds < 300.0, "slower than 5 min");
  o.detail = fmt("inter %.4f", inter) + fmt(", DoF %.0f", dof) + fmt(", d' %.1f", dp) + fmt(", FRR %g", frr) +
             fmt(" FAR %g", far) + ", pairs " + std::to_string(n_inter) + "/" + std::to_string(n_intra) +
             fmt(", %.0f s", b.seconds) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome puf_directionality(const Benchmark& b) {
  Outcome o;
  const auto p = load_json(b.report)["puf"];
  const double uni = p["uniformity"]["mean"], rnd = p["randomness"]["mean"], std_ = p["steadiness"]["mean"],
               rel = p["reliability"]["mean"], unq = p["uniqueness_mean_hd"]["mean"], ali = p["bit_aliasing"]["mean"];
  auto within = [](double x) { return x >= 0.48 && x <= 0.52; };
  o.require(within(uni), "uniformity");
  o.require(rnd >= 0.95, "randomness");
  o.require(std_ >= 0.90, "steadiness");
  o.require(rel >= 0.90, "reliability");
  o.require(within(unq), "uniqueness");
  o.require(within(ali), "bit-aliasing");
  o.detail = fmt("uniformity %.3f", uni) + fmt(", randomness %.3f", rnd) + fmt(", steadiness %.3f", std_) +
             fmt(", reliability %.3f", rel) + fmt(", uniqueness %.3f", unq) + fmt(", bit-aliasing %.3f", ali) +
             (o.detail.empty() ? "" : "; failed: " + o.detail);
  return o;
}

Outcome robustness(const fs::path& work, const Benchmark& b) {
  Outcome o;
  const double base_intra = load_json(b.report)["intra"]["mean"];
  double scribbled_intra = 0.0;
  for (const std::string condition : {"rotated", "scribbled"}) {
    const auto j = load_json(run_condition(work, condition, condition));
    const double frr = j["frr"], far = j["far"], intra = j["intra"]["mean"];
    o.require(frr == 0.0 && far == 0.0, condition + " has nonzero FRR or FAR");
    if (condition == "scribbled") scribbled_intra = intra;
    o.detail += condition + fmt(" intra %.4f", intra) + fmt(" FRR %g", frr) + fmt(" FAR %g, ", far);
  }
  o.require(scribbled_intra > base_intra, "scribbling did not raise the intra mean");
  o.detail += fmt("benchmark intra %.4f", base_intra);
  return o;
}

Outcome gabor() {
  Outcome o;
  GaborParams p;
  p.v = 7;
  const auto k = build_kernel(p);
  const double F = p.f_max / std::sqrt(std::pow(2.0, p.u - 1)), theta = (p.v - 1) * kPi / p.orientations;
  auto psi = [&](double x, double y) {
    const double xr = x * std::cos(theta) + y * std::sin(theta);
    const double yr = -x * std::sin(theta) + y * std::cos(theta);
    const double env =
        F * F / (kPi * p.gamma * p.eta) * std::exp(-F * F * (xr * xr / (p.gamma * p.gamma) + yr * yr / (p.eta * p.eta)));
    return env * std::exp(cd(0.0, 2.0 * kPi * F * xr));
  };
  const SampleGrid grid{50, 20, 5};
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    GrayImage img(200, 200);
    for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = rng.uniform();
    const auto got = filter_response(img, k, grid);
    double diff = 0.0, norm = 0.0;
    for (int r = 0; r < grid.count; ++r) {
      for (int c = 0; c < grid.count; ++c) {
        const int x = 50 + 20 * c, y = 50 + 20 * r;
        cd want = 0.0;
        for (int b = y - 50; b <= y + 50; ++b) {
          for (int a = x - 50; a <= x + 50; ++a) want += img(b, a) * std::conj(psi(x - a, y - b));
        }
        diff = std::max(diff, std::abs(got(r, c) - want));
        norm = std::max(norm, std::abs(want));
      }
    }
    worst = std::max(worst, diff / norm);
  }
  o.require(worst <= 1e-9, "response differs from brute force");

  // Spectral peak of the default kernel by a direct 2-D DFT.
  const auto kd = build_kernel(GaborParams{});
  const int n = static_cast<int>(kd.rows());
  Image<cd> rows(n, n), spec(n, n);
  for (int r = 0; r < n; ++r) {
    for (int f = 0; f < n; ++f) {
      cd acc = 0.0;
      for (int c = 0; c < n; ++c) acc += kd(r, c) * std::exp(cd(0.0, -2.0 * kPi * f * c / n));
      rows(r, f) = acc;
    }
  }
  for (int f = 0; f < n; ++f) {
    for (int g = 0; g < n; ++g) {
      cd acc = 0.0;
      for (int r = 0; r < n; ++r) acc += rows(r, f) * std::exp(cd(0.0, -2.0 * kPi * g * r / n));
      spec(g, f) = acc;
    }
  }
  Eigen::Index gy = 0, fx = 0;
  spec.abs().maxCoeff(&gy, &fx);
  auto signed_bin = [n](Eigen::Index b) { return static_cast<double>(b > n / 2 ? b - n : b); };
  const double peak = std::hypot(signed_bin(fx), signed_bin(gy)) / n;
  o.require(std::abs(peak - 0.0625) <= 1.0 / n, "kernel peak not at 1/16");
  o.detail = fmt("max relative error %.2e", worst) + fmt(", peak %.4f cycles/px", peak) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome equations() {
  Outcome o;
  auto near = [&](double got, double want, const std::string& what) {
    o.require(std::abs(got - want) <= 1e-12, what + fmt(" = %.15g", got));
  };
  near(decidability({{0.0, 0.1, 0.2}, {0.4, 0.5, 0.6}}), 4.0, "d'");
  near(degrees_of_freedom({0.0, 0.5, 1.0}), 1.0, "DoF(sd 0.5)");
  near(degrees_of_freedom({0.45, 0.5, 0.55}), 100.0, "DoF(sd 0.05)");

  const Fingerprint zeros, ones = zeros.complement();
  Fingerprint half, quarter_ones;
  for (std::size_t l = 0; l < kFingerprintBits; l += 2) half.set(l);
  for (std::size_t l = 0; l < kFingerprintBits; l += 4) quarter_ones.set(l);
  Fingerprint off204 = zeros;
  for (std::size_t l = 0; l < 204; ++l) off204.set(l);

  near(uniformity(NoteDataset({{ones}}), 0, 0), 1.0, "uniformity(all ones)");
  near(uniformity(NoteDataset({{half}}), 0, 0), 0.5, "uniformity(1024 ones)");
  near(randomness(NoteDataset({{half}}), 0), 1.0, "randomness(p=0.5)");
  near(randomness(NoteDataset({{ones}}), 0), 0.0, "randomness(p=1)");
  near(randomness(NoteDataset({{quarter_ones}}), 0), -std::log2(0.75), "randomness(p=0.75)");
  near(reliability(NoteDataset({{half, half, half}}), 0), 1.0, "reliability(identical)");
  near(reliability(NoteDataset({{zeros, ones}}), 0), 0.0, "reliability(complements)");
  near(reliability(NoteDataset({{zeros, off204}}), 0), 1.0 - 204.0 / 2048.0, "reliability(204 bits)");
  near(steadiness(NoteDataset({{half, half, half}}), 0), 1.0, "steadiness(identical)");
  near(steadiness(NoteDataset({{zeros, ones}}), 0), 0.0, "steadiness(p=0.5)");
  const NoteDataset same({{half, half}, {half, half}});
  near(uniqueness(same, 0), 0.0, "uniqueness(shared)");
  near(uniqueness_mean_hd(same, 0), 0.0, "uniqueness mean-HD(shared)");
  const NoteDataset opposite({{zeros, zeros, zeros}, {ones, ones, ones}});
  near(uniqueness(opposite, 0), 1.0, "uniqueness(complementary)");
  near(uniqueness_mean_hd(opposite, 1), 1.0, "uniqueness mean-HD(complementary)");
  near(bit_aliasing(NoteDataset({{ones, ones}, {ones, ones}}), 5), 1.0, "bit-aliasing(always 1)");
  near(bit_aliasing(NoteDataset({{ones, zeros}, {zeros, ones}}), 5), 0.5, "bit-aliasing(half)");
  if (o.pass) o.detail = "decidability, DoF and six PUF metrics exact to 1e-12";
  return o;
}

Outcome protocol() {
  Outcome o;
  const auto key = SigningKey::generate();
  const auto pub = key.public_key();
  const Extractor ex;
  SubstrateModel m;
  m.seed = 9001;
  const auto note = generate_note(m);
  m.seed = 9002;
  const auto other = generate_note(m);
  auto capture_of = [&](const GeneratedNote& n, std::uint64_t seed) {
    CaptureModel c;
    c.seed = seed;
    return ex.from_capture(capture(n.image, c));
  };

  const NoteRecord record{"AK47120983", 1000, capture_of(note, 1)};
  const auto reg = register_offline(record, key);
  o.require(reg.text.size() <= kQrCapacityBytes, "payload exceeds QR capacity");

  const auto genuine = verify_offline(reg.text, capture_of(note, 2), pub);
  o.require(genuine.status == VerifyStatus::accepted, "second capture not accepted");
  const auto impostor = verify_offline(reg.text, capture_of(other, 3), pub);
  o.require(impostor.status == VerifyStatus::fingerprint_mismatch && impostor.signature_valid,
            "different note not rejected as a fingerprint mismatch");

  const auto bytes = base64_decode(reg.text);
  Rng rng(77);
  int caught = 0;
  for (int i = 0; i < 1000; ++i) {
    auto tampered = bytes;
    const auto bit = rng.next() % (tampered.size() * 8);
    tampered[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    const auto v = verify_offline(base64_encode(tampered), record.fingerprint, pub);
    caught += v.status == VerifyStatus::signature_invalid;
  }
  o.require(caught == 1000, "a tampered payload passed the signature check");
  o.detail = "payload " + std::to_string(reg.text.size()) + "/" + std::to_string(kQrCapacityBytes) + " chars" +
             fmt(", genuine HD %.3f", genuine.match ? genuine.match->hd : -1.0) +
             fmt(", impostor HD %.3f", impostor.match ? impostor.match->hd : -1.0) + ", " + std::to_string(caught) +
             "/1000 flips rejected" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome determinism(const fs::path& work, const Benchmark& first) {
  Outcome o;
  const auto second = run_condition(work, "benchmark_again", "benchmark");
  const bool manifest_same =
      slurp(work / "benchmark" / "manifest.jsonl") == slurp(work / "benchmark_again" / "manifest.jsonl");
  const bool report_same = slurp(first.report) == slurp(second);
  o.require(manifest_same, "manifests differ");
  o.require(report_same, "metric reports differ");
  if (o.pass) o.detail = "manifest and metric JSON byte-identical across two runs";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: psf_acceptance WORK_DIR\n";
    return 2;
  }
  const fs::path work = argv[1];
  fs::create_directories(work);

  bool all = true;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << name << ": " << o.detail << std::endl;
  };

  Benchmark bench;
  report(1, "false-match odds", false_match_odds);
  report(2, "sphere-packing bound", sphere_packing);
  report(3, "benchmark reproduction", [&] {
    const auto t0 = Clock::now();
    bench.report = run_condition(work, "benchmark", "benchmark");
    bench.seconds = seconds_since(t0);
    return benchmark(bench);
  });
  report(4, "PUF metric directionality", [&] { return puf_directionality(bench); });
  report(5, "robustness", [&] { return robustness(work, bench); });
  report(6, "Gabor correctness", gabor);
  report(7, "equation oracles", equations);
  report(8, "offline protocol", protocol);
  report(9, "determinism", [&] { return determinism(work, bench); });
  return all ? 0 : 1;
}
