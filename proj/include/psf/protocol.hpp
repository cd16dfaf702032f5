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

#include "psf/fingerprint.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

typedef struct evp_pkey_st EVP_PKEY;

namespace psf {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NoteRecord {
  std::string serial;
  std::uint16_t denomination = 0;  // minor currency units
  Fingerprint fingerprint;

  friend bool operator==(const NoteRecord&, const NoteRecord&) = default;
};

/// Throws ProtocolError unless serial is 1..32 printable ASCII characters.
void validate_serial(std::string_view serial);

// --- keys -------------------------------------------------------------------
//
// ECDSA over NIST P-521 with SHA-512. Private keys are PKCS#8 PEM written
// with mode 0600; public keys are SubjectPublicKeyInfo PEM.

struct PkeyDeleter {
  void operator()(EVP_PKEY* k) const;
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;

class VerifyingKey {
 public:
  explicit VerifyingKey(PkeyPtr key) : key_(std::move(key)) {}
  static VerifyingKey load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  std::string pem() const;

  /// Raw signature is r || s, each left-padded to the curve byte length.
  bool verify(std::span<const std::uint8_t> message, std::span<const std::uint8_t> signature) const;
  std::size_t signature_size() const;

  EVP_PKEY* get() const { return key_.get(); }

 private:
  PkeyPtr key_;
};

class SigningKey {
 public:
  explicit SigningKey(PkeyPtr key) : key_(std::move(key)) {}
  static SigningKey generate();
  /// Big-endian private scalar.
  static SigningKey from_scalar(std::span<const std::uint8_t> scalar);
  static SigningKey load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  VerifyingKey public_key() const;

  /// Deterministic ECDSA: the nonce is derived from key and message digest
  /// by HMAC-DRBG (RFC 6979), so equal inputs give equal signatures.
  std::vector<std::uint8_t> sign(std::span<const std::uint8_t> message) const;

 private:
  PkeyPtr key_;
};

/// Writes a fresh key pair.
void keygen(const std::filesystem::path& private_path, const std::filesystem::path& public_path);

// --- offline payload ----------------------------------------------------------

/// QR version 18 at error-correction level M holds 4504 data bits; byte mode
/// spends 20 of them on mode and length headers, leaving 560 bytes.
inline constexpr std::size_t kQrCapacityBytes = 560;

inline constexpr std::uint8_t kPayloadVersion = 1;
inline constexpr std::string_view kPayloadMagic = "PSF1";

/// magic(4) | version(1) | denomination(2, BE) | serial_len(1) | serial |
/// fingerprint(256) | signature over every preceding byte.
struct SignedPayload {
  std::uint8_t version = kPayloadVersion;
  std::uint16_t denomination = 0;
  std::string serial;
  Fingerprint fingerprint;
  std::vector<std::uint8_t> signature;

  /// Signed portion, magic through fingerprint.
  std::vector<std::uint8_t> message() const;
  std::vector<std::uint8_t> encode() const;
  /// Splits off a signature of signature_size bytes and parses the rest.
  static SignedPayload decode(std::span<const std::uint8_t> bytes, std::size_t signature_size);
};

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

struct OfflineRegistration {
  SignedPayload payload;
  std::string text;  // Base64, standard alphabet, padded
};

/// Signs the record. Fails if the Base64 text would exceed the QR capacity.
OfflineRegistration register_offline(const NoteRecord& record, const SigningKey& key);

enum class VerifyStatus { accepted, fingerprint_mismatch, signature_invalid };

std::string_view to_string(VerifyStatus s);

struct OfflineVerdict {
  VerifyStatus status = VerifyStatus::signature_invalid;
  bool signature_valid = false;
  std::optional<MatchResult> match;  // present only when the signature verified
  std::optional<NoteRecord> record;  // decoded contents, signature-valid only
};

/// Signature first; only a verified payload is compared against `fresh`.
/// Throws ProtocolError for undecodable Base64 and for a correctly signed
/// payload with an unknown magic or version.
OfflineVerdict verify_offline(std::string_view payload_text, const Fingerprint& fresh, const VerifyingKey& key,
                              double threshold = kDefaultThreshold);

// --- online store -------------------------------------------------------------

/// Append-only JSON-lines file {serial, denomination, fingerprint_hex} indexed
/// by serial in memory. Writers take an exclusive advisory lock on the file.
class NoteStore {
 public:
  explicit NoteStore(std::filesystem::path path);

  void enroll(const NoteRecord& record);
  const NoteRecord& lookup(std::string_view serial) const;
  bool contains(std::string_view serial) const;
  std::size_t size() const { return records_.size(); }
  const std::filesystem::path& path() const { return path_; }

  /// One-to-one verification against the enrolled fingerprint.
  MatchResult verify(std::string_view serial, const Fingerprint& fresh, double threshold = kDefaultThreshold) const;

 private:
  void load();

  std::filesystem::path path_;
  std::unordered_map<std::string, NoteRecord> records_;
};

}  // namespace psf
