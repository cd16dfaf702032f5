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

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace psf {

inline constexpr std::size_t kFingerprintBits = 2048;
inline constexpr std::size_t kFingerprintBytes = kFingerprintBits / 8;
inline constexpr double kDefaultThreshold = 0.33;

/// Fixed-length 2048-bit code. Bit 0 is the first bit emitted by quantisation.
class Fingerprint {
 public:
  using Bits = std::bitset<kFingerprintBits>;

  Fingerprint() = default;
  explicit Fingerprint(const Bits& bits) : bits_(bits) {}

  bool operator[](std::size_t l) const { return bits_[l]; }
  void set(std::size_t l, bool value = true) { bits_.set(l, value); }
  void flip(std::size_t l) { bits_.flip(l); }

  std::size_t popcount() const { return bits_.count(); }
  const Bits& bits() const { return bits_; }

  Fingerprint complement() const { return Fingerprint(~bits_); }
  friend Fingerprint operator^(const Fingerprint& a, const Fingerprint& b) { return Fingerprint(a.bits_ ^ b.bits_); }
  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;

  // Byte k packs bits 8k..8k+7 with bit 8k in the most significant position.
  std::array<std::uint8_t, kFingerprintBytes> to_bytes() const;
  static Fingerprint from_bytes(std::span<const std::uint8_t> bytes);

  std::string to_hex() const;
  static Fingerprint from_hex(std::string_view hex);

 private:
  Bits bits_;
};

struct MatchResult {
  double hd = 0.0;
  double threshold = kDefaultThreshold;
  bool accepted = false;
};

/// Number of differing bits.
std::size_t hamming_count(const Fingerprint& a, const Fingerprint& b);

/// Fractional Hamming distance, popcount(a ^ b) / 2048.
double hamming(const Fingerprint& a, const Fingerprint& b);

/// Accepts when hd <= threshold. threshold must lie in (0, 0.5).
MatchResult decide(const Fingerprint& a, const Fingerprint& b, double threshold = kDefaultThreshold);

}  // namespace psf
