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

#include "psf/fingerprint.hpp"

namespace psf {

std::array<std::uint8_t, kFingerprintBytes> Fingerprint::to_bytes() const {
  std::array<std::uint8_t, kFingerprintBytes> out{};
  for (std::size_t l = 0; l < kFingerprintBits; ++l) {
    if (bits_[l]) out[l / 8] |= static_cast<std::uint8_t>(0x80u >> (l % 8));
  }
  return out;
}

Fingerprint Fingerprint::from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kFingerprintBytes) {
    throw std::invalid_argument("fingerprint needs " + std::to_string(kFingerprintBytes) + " bytes, got " +
                                std::to_string(bytes.size()));
  }
  Fingerprint f;
  for (std::size_t l = 0; l < kFingerprintBits; ++l) f.bits_[l] = (bytes[l / 8] >> (7 - l % 8)) & 1u;
  return f;
}

std::string Fingerprint::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * kFingerprintBytes);
  for (const auto byte : to_bytes()) {
    hex.push_back(kDigits[byte >> 4]);
    hex.push_back(kDigits[byte & 0x0f]);
  }
  return hex;
}

Fingerprint Fingerprint::from_hex(std::string_view hex) {
  if (hex.size() != 2 * kFingerprintBytes) {
    throw std::invalid_argument("fingerprint hex must be 512 characters, got " + std::to_string(hex.size()));
  }
  auto nibble = [](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw std::invalid_argument(std::string("non-hex character '") + c + "' in fingerprint");
  };
  std::array<std::uint8_t, kFingerprintBytes> bytes{};
  for (std::size_t k = 0; k < kFingerprintBytes; ++k) {
    bytes[k] = static_cast<std::uint8_t>(nibble(hex[2 * k]) << 4 | nibble(hex[2 * k + 1]));
  }
  return from_bytes(bytes);
}

std::size_t hamming_count(const Fingerprint& a, const Fingerprint& b) { return (a ^ b).popcount(); }

double hamming(const Fingerprint& a, const Fingerprint& b) {
  return static_cast<double>(hamming_count(a, b)) / static_cast<double>(kFingerprintBits);
}

MatchResult decide(const Fingerprint& a, const Fingerprint& b, double threshold) {
  if (!(threshold > 0.0 && threshold < 0.5)) throw std::invalid_argument("threshold must lie in (0, 0.5)");
  const double hd = hamming(a, b);
  return {hd, threshold, hd <= threshold};
}

}  // namespace psf
