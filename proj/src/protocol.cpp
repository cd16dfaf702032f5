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

#include "psf/protocol.hpp"

#include "json.hpp"

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/obj_mac.h>
#include <openssl/param_build.h>
#include <openssl/pem.h>

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>

namespace psf {
namespace {

constexpr int kCurveNid = NID_secp521r1;
constexpr const char* kCurveName = "P-521";

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using BnPtr = std::unique_ptr<BIGNUM, Deleter<BIGNUM, BN_clear_free>>;
using BnCtxPtr = std::unique_ptr<BN_CTX, Deleter<BN_CTX, BN_CTX_free>>;
using GroupPtr = std::unique_ptr<EC_GROUP, Deleter<EC_GROUP, EC_GROUP_free>>;
using PointPtr = std::unique_ptr<EC_POINT, Deleter<EC_POINT, EC_POINT_free>>;
using BioPtr = std::unique_ptr<BIO, Deleter<BIO, BIO_free_all>>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, Deleter<EVP_MD_CTX, EVP_MD_CTX_free>>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, Deleter<EVP_PKEY_CTX, EVP_PKEY_CTX_free>>;
using ParamBldPtr = std::unique_ptr<OSSL_PARAM_BLD, Deleter<OSSL_PARAM_BLD, OSSL_PARAM_BLD_free>>;
using ParamPtr = std::unique_ptr<OSSL_PARAM, Deleter<OSSL_PARAM, OSSL_PARAM_free>>;
using SigPtr = std::unique_ptr<ECDSA_SIG, Deleter<ECDSA_SIG, ECDSA_SIG_free>>;

[[noreturn]] void fail(const std::string& what) { throw ProtocolError(what); }

void check(bool ok, const char* what) {
  if (!ok) fail(std::string("crypto failure: ") + what);
}

BnPtr bn_new() {
  BnPtr b(BN_new());
  check(b != nullptr, "BN_new");
  return b;
}

BnPtr bn_from(std::span<const std::uint8_t> bytes) {
  BnPtr b(BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), nullptr));
  check(b != nullptr, "BN_bin2bn");
  return b;
}

std::vector<std::uint8_t> bn_to_fixed(const BIGNUM* b, std::size_t len) {
  std::vector<std::uint8_t> out(len);
  check(BN_bn2binpad(b, out.data(), static_cast<int>(len)) == static_cast<int>(len), "BN_bn2binpad");
  return out;
}

GroupPtr curve_group() {
  GroupPtr g(EC_GROUP_new_by_curve_name(kCurveNid));
  check(g != nullptr, "EC_GROUP_new_by_curve_name");
  return g;
}

void require_p521(EVP_PKEY* k) {
  if (!EVP_PKEY_is_a(k, "EC") || EVP_PKEY_get_bits(k) != 521) fail("key is not an ECDSA P-521 key");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::string_view data, mode_t mode) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, mode);
  if (fd < 0) fail("cannot write " + path.string());
  ::fchmod(fd, mode);
  const auto written = ::write(fd, data.data(), data.size());
  ::close(fd);
  if (written != static_cast<ssize_t>(data.size())) fail("write failed: " + path.string());
}

std::string bio_string(BIO* bio) {
  char* data = nullptr;
  const long n = BIO_get_mem_data(bio, &data);
  return std::string(data, static_cast<std::size_t>(n));
}

std::array<std::uint8_t, 64> hmac512(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 64> out{};
  unsigned int len = 0;
  check(HMAC(EVP_sha512(), key.data(), static_cast<int>(key.size()), data.data(), data.size(), out.data(), &len) != nullptr,
        "HMAC");
  return out;
}

template <typename... Parts>
std::vector<std::uint8_t> concat(const Parts&... parts) {
  std::vector<std::uint8_t> out;
  (out.insert(out.end(), std::begin(parts), std::end(parts)), ...);
  return out;
}

// Leftmost qlen bits of a byte string as an integer.
BnPtr bits2int(std::span<const std::uint8_t> bytes, int qlen) {
  BnPtr v = bn_from(bytes);
  const int blen = static_cast<int>(bytes.size()) * 8;
  if (blen > qlen) check(BN_rshift(v.get(), v.get(), blen - qlen) == 1, "BN_rshift");
  return v;
}

}  // namespace

void PkeyDeleter::operator()(EVP_PKEY* k) const { EVP_PKEY_free(k); }

void validate_serial(std::string_view serial) {
  if (serial.empty() || serial.size() > 32) fail("serial must be 1 to 32 characters");
  for (const char c : serial) {
    if (c < 0x20 || c > 0x7e) fail("serial must be printable ASCII");
  }
}

// --- keys ---------------------------------------------------------------------

SigningKey SigningKey::generate() {
  PkeyPtr k(EVP_PKEY_Q_keygen(nullptr, nullptr, "EC", kCurveName));
  check(k != nullptr, "EVP_PKEY_Q_keygen");
  return SigningKey(std::move(k));
}

SigningKey SigningKey::from_scalar(std::span<const std::uint8_t> scalar) {
  const auto group = curve_group();
  BnCtxPtr ctx(BN_CTX_new());
  const BnPtr d = bn_from(scalar);
  if (BN_is_zero(d.get()) || BN_cmp(d.get(), EC_GROUP_get0_order(group.get())) >= 0) fail("private scalar out of range");
  PointPtr pub(EC_POINT_new(group.get()));
  check(EC_POINT_mul(group.get(), pub.get(), d.get(), nullptr, nullptr, ctx.get()) == 1, "EC_POINT_mul");
  std::array<std::uint8_t, 133> octets{};
  const auto len = EC_POINT_point2oct(group.get(), pub.get(), POINT_CONVERSION_UNCOMPRESSED, octets.data(), octets.size(),
                                      ctx.get());
  check(len > 0, "EC_POINT_point2oct");

  ParamBldPtr bld(OSSL_PARAM_BLD_new());
  check(OSSL_PARAM_BLD_push_utf8_string(bld.get(), OSSL_PKEY_PARAM_GROUP_NAME, kCurveName, 0) == 1 &&
            OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_PRIV_KEY, d.get()) == 1 &&
            OSSL_PARAM_BLD_push_octet_string(bld.get(), OSSL_PKEY_PARAM_PUB_KEY, octets.data(), len) == 1,
        "OSSL_PARAM_BLD");
  ParamPtr params(OSSL_PARAM_BLD_to_param(bld.get()));
  PkeyCtxPtr pctx(EVP_PKEY_CTX_new_from_name(nullptr, "EC", nullptr));
  EVP_PKEY* raw = nullptr;
  check(pctx && EVP_PKEY_fromdata_init(pctx.get()) == 1 &&
            EVP_PKEY_fromdata(pctx.get(), &raw, EVP_PKEY_KEYPAIR, params.get()) == 1,
        "EVP_PKEY_fromdata");
  return SigningKey(PkeyPtr(raw));
}

SigningKey SigningKey::load(const std::filesystem::path& path) {
  const auto pem = read_file(path);
  BioPtr bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
  PkeyPtr k(PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr));
  if (!k) fail("cannot parse private key " + path.string());
  require_p521(k.get());
  return SigningKey(std::move(k));
}

void SigningKey::save(const std::filesystem::path& path) const {
  BioPtr bio(BIO_new(BIO_s_mem()));
  check(PEM_write_bio_PrivateKey(bio.get(), key_.get(), nullptr, nullptr, 0, nullptr, nullptr) == 1,
        "PEM_write_bio_PrivateKey");
  write_file(path, bio_string(bio.get()), 0600);
}

VerifyingKey SigningKey::public_key() const {
  unsigned char* der = nullptr;
  const int len = i2d_PUBKEY(key_.get(), &der);
  check(len > 0, "i2d_PUBKEY");
  const unsigned char* p = der;
  PkeyPtr pub(d2i_PUBKEY(nullptr, &p, len));
  OPENSSL_free(der);
  check(pub != nullptr, "d2i_PUBKEY");
  return VerifyingKey(std::move(pub));
}

std::vector<std::uint8_t> SigningKey::sign(std::span<const std::uint8_t> message) const {
  const auto group = curve_group();
  BnCtxPtr ctx(BN_CTX_new());
  const BIGNUM* q = EC_GROUP_get0_order(group.get());
  const int qlen = BN_num_bits(q);
  const auto rlen = static_cast<std::size_t>((qlen + 7) / 8);

  BIGNUM* priv_raw = nullptr;
  check(EVP_PKEY_get_bn_param(key_.get(), OSSL_PKEY_PARAM_PRIV_KEY, &priv_raw) == 1, "private scalar");
  const BnPtr x(priv_raw);

  std::array<std::uint8_t, 64> h1{};
  unsigned int hlen = 0;
  check(EVP_Digest(message.data(), message.size(), h1.data(), &hlen, EVP_sha512(), nullptr) == 1, "SHA-512");

  // e = bits2int(h1); the nonce seed uses bits2octets(h1) = int2octets(e mod q).
  const BnPtr e = bits2int(h1, qlen);
  BnPtr e_mod = bn_new();
  check(BN_nnmod(e_mod.get(), e.get(), q, ctx.get()) == 1, "BN_nnmod");
  const auto x_oct = bn_to_fixed(x.get(), rlen);
  const auto h_oct = bn_to_fixed(e_mod.get(), rlen);

  std::vector<std::uint8_t> V(64, 0x01), K(64, 0x00);
  const std::array<std::uint8_t, 1> zero{0x00}, one{0x01};
  auto step = [&](const std::array<std::uint8_t, 1>& sep, bool with_seed) {
    const auto data = with_seed ? concat(V, sep, x_oct, h_oct) : concat(V, sep);
    const auto k = hmac512(K, data);
    K.assign(k.begin(), k.end());
    const auto v = hmac512(K, V);
    V.assign(v.begin(), v.end());
  };
  step(zero, true);
  step(one, true);

  PointPtr R(EC_POINT_new(group.get()));
  BnPtr rx = bn_new(), r = bn_new(), s = bn_new(), kinv = bn_new(), tmp = bn_new();
  for (;;) {
    std::vector<std::uint8_t> T;
    while (static_cast<int>(T.size()) * 8 < qlen) {
      const auto v = hmac512(K, V);
      V.assign(v.begin(), v.end());
      T.insert(T.end(), V.begin(), V.end());
    }
    const BnPtr k = bits2int(T, qlen);
    if (!BN_is_zero(k.get()) && BN_cmp(k.get(), q) < 0) {
      check(EC_POINT_mul(group.get(), R.get(), k.get(), nullptr, nullptr, ctx.get()) == 1, "EC_POINT_mul");
      check(EC_POINT_get_affine_coordinates(group.get(), R.get(), rx.get(), nullptr, ctx.get()) == 1, "affine");
      check(BN_nnmod(r.get(), rx.get(), q, ctx.get()) == 1, "BN_nnmod");
      if (!BN_is_zero(r.get())) {
        // s = k^-1 (e + x r) mod q
        check(BN_mod_inverse(kinv.get(), k.get(), q, ctx.get()) != nullptr, "BN_mod_inverse");
        check(BN_mod_mul(tmp.get(), x.get(), r.get(), q, ctx.get()) == 1, "BN_mod_mul");
        check(BN_mod_add(tmp.get(), tmp.get(), e.get(), q, ctx.get()) == 1, "BN_mod_add");
        check(BN_mod_mul(s.get(), kinv.get(), tmp.get(), q, ctx.get()) == 1, "BN_mod_mul");
        if (!BN_is_zero(s.get())) break;
      }
    }
    step(zero, false);
  }
  auto out = bn_to_fixed(r.get(), rlen);
  const auto s_oct = bn_to_fixed(s.get(), rlen);
  out.insert(out.end(), s_oct.begin(), s_oct.end());
  return out;
}

VerifyingKey VerifyingKey::load(const std::filesystem::path& path) {
  const auto pem = read_file(path);
  BioPtr bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
  PkeyPtr k(PEM_read_bio_PUBKEY(bio.get(), nullptr, nullptr, nullptr));
  if (!k) fail("cannot parse public key " + path.string());
  require_p521(k.get());
  return VerifyingKey(std::move(k));
}

std::string VerifyingKey::pem() const {
  BioPtr bio(BIO_new(BIO_s_mem()));
  check(PEM_write_bio_PUBKEY(bio.get(), key_.get()) == 1, "PEM_write_bio_PUBKEY");
  return bio_string(bio.get());
}

void VerifyingKey::save(const std::filesystem::path& path) const { write_file(path, pem(), 0644); }

std::size_t VerifyingKey::signature_size() const {
  return 2 * static_cast<std::size_t>((EVP_PKEY_get_bits(key_.get()) + 7) / 8);
}

bool VerifyingKey::verify(std::span<const std::uint8_t> message, std::span<const std::uint8_t> signature) const {
  const std::size_t half = signature_size() / 2;
  if (signature.size() != 2 * half) return false;
  SigPtr sig(ECDSA_SIG_new());
  BnPtr r = bn_from(signature.first(half));
  BnPtr s = bn_from(signature.subspan(half));
  check(ECDSA_SIG_set0(sig.get(), r.get(), s.get()) == 1, "ECDSA_SIG_set0");
  r.release();
  s.release();
  unsigned char* der = nullptr;
  const int der_len = i2d_ECDSA_SIG(sig.get(), &der);
  check(der_len > 0, "i2d_ECDSA_SIG");
  MdCtxPtr md(EVP_MD_CTX_new());
  const bool ok = EVP_DigestVerifyInit(md.get(), nullptr, EVP_sha512(), nullptr, key_.get()) == 1 &&
                  EVP_DigestVerify(md.get(), der, static_cast<std::size_t>(der_len), message.data(), message.size()) == 1;
  OPENSSL_free(der);
  return ok;
}

void keygen(const std::filesystem::path& private_path, const std::filesystem::path& public_path) {
  const auto key = SigningKey::generate();
  key.save(private_path);
  key.public_key().save(public_path);
}

// --- payload ------------------------------------------------------------------

std::vector<std::uint8_t> SignedPayload::message() const {
  validate_serial(serial);
  std::vector<std::uint8_t> out(kPayloadMagic.begin(), kPayloadMagic.end());
  out.push_back(version);
  out.push_back(static_cast<std::uint8_t>(denomination >> 8));
  out.push_back(static_cast<std::uint8_t>(denomination & 0xff));
  out.push_back(static_cast<std::uint8_t>(serial.size()));
  out.insert(out.end(), serial.begin(), serial.end());
  const auto fp = fingerprint.to_bytes();
  out.insert(out.end(), fp.begin(), fp.end());
  return out;
}

std::vector<std::uint8_t> SignedPayload::encode() const {
  auto out = message();
  out.insert(out.end(), signature.begin(), signature.end());
  return out;
}

SignedPayload SignedPayload::decode(std::span<const std::uint8_t> bytes, std::size_t signature_size) {
  constexpr std::size_t kFixed = 4 + 1 + 2 + 1 + kFingerprintBytes;
  if (bytes.size() < kFixed + signature_size) fail("payload too short");
  const auto msg = bytes.first(bytes.size() - signature_size);
  if (!std::equal(kPayloadMagic.begin(), kPayloadMagic.end(), msg.begin())) fail("bad magic");
  SignedPayload p;
  p.version = msg[4];
  if (p.version != kPayloadVersion) fail("unsupported payload version " + std::to_string(p.version));
  p.denomination = static_cast<std::uint16_t>(msg[5] << 8 | msg[6]);
  const std::size_t serial_len = msg[7];
  if (msg.size() != kFixed + serial_len) fail("payload length does not match serial length");
  p.serial.assign(msg.begin() + 8, msg.begin() + 8 + static_cast<std::ptrdiff_t>(serial_len));
  validate_serial(p.serial);
  p.fingerprint = Fingerprint::from_bytes(msg.subspan(8 + serial_len, kFingerprintBytes));
  p.signature.assign(bytes.end() - static_cast<std::ptrdiff_t>(signature_size), bytes.end());
  return p;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::string clean;
  for (const char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
  }
  if (clean.empty() || clean.size() % 4 != 0) fail("invalid Base64: length is not a multiple of 4");
  const auto body_end = clean.find('=');
  if (body_end != std::string::npos &&
      (clean.size() - body_end > 2 || clean.find_first_not_of('=', body_end) != std::string::npos)) {
    fail("invalid Base64: misplaced padding");
  }
  std::vector<std::uint8_t> out(3 * clean.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()), static_cast<int>(clean.size()));
  if (n < 0) fail("invalid Base64: bad character");
  const auto padding = body_end == std::string::npos ? 0 : clean.size() - body_end;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

OfflineRegistration register_offline(const NoteRecord& record, const SigningKey& key) {
  validate_serial(record.serial);
  OfflineRegistration reg;
  reg.payload.denomination = record.denomination;
  reg.payload.serial = record.serial;
  reg.payload.fingerprint = record.fingerprint;
  reg.payload.signature = key.sign(reg.payload.message());
  reg.text = base64_encode(reg.payload.encode());
  if (reg.text.size() > kQrCapacityBytes) {
    fail("payload of " + std::to_string(reg.text.size()) + " Base64 characters exceeds the QR capacity of " +
         std::to_string(kQrCapacityBytes));
  }
  return reg;
}

std::string_view to_string(VerifyStatus s) {
  switch (s) {
    case VerifyStatus::accepted: return "accepted";
    case VerifyStatus::fingerprint_mismatch: return "fingerprint mismatch";
    case VerifyStatus::signature_invalid: return "signature invalid";
  }
  return "signature invalid";
}

OfflineVerdict verify_offline(std::string_view payload_text, const Fingerprint& fresh, const VerifyingKey& key,
                              double threshold) {
  const auto bytes = base64_decode(payload_text);
  const std::size_t sig_size = key.signature_size();
  OfflineVerdict v;
  if (bytes.size() <= sig_size) return v;
  const std::span<const std::uint8_t> all(bytes);
  if (!key.verify(all.first(bytes.size() - sig_size), all.last(sig_size))) return v;
  v.signature_valid = true;
  const auto payload = SignedPayload::decode(bytes, sig_size);
  v.record = NoteRecord{payload.serial, payload.denomination, payload.fingerprint};
  v.match = decide(payload.fingerprint, fresh, threshold);
  v.status = v.match->accepted ? VerifyStatus::accepted : VerifyStatus::fingerprint_mismatch;
  return v;
}

// --- online store -------------------------------------------------------------

namespace {

std::string record_line(const NoteRecord& r) {
  nlohmann::ordered_json j;
  j["serial"] = r.serial;
  j["denomination"] = r.denomination;
  j["fingerprint_hex"] = r.fingerprint.to_hex();
  return j.dump() + "\n";
}

NoteRecord parse_record(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  NoteRecord r;
  r.serial = j.at("serial").get<std::string>();
  validate_serial(r.serial);
  r.denomination = j.at("denomination").get<std::uint16_t>();
  r.fingerprint = Fingerprint::from_hex(j.at("fingerprint_hex").get<std::string>());
  return r;
}

class FileLock {
 public:
  FileLock(const std::filesystem::path& path, int flags, int op) : fd_(::open(path.c_str(), flags, 0644)) {
    if (fd_ < 0) fail("cannot open store " + path.string());
    if (::flock(fd_, op) != 0) {
      ::close(fd_);
      fail("cannot lock store " + path.string());
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;
  int fd() const { return fd_; }

 private:
  int fd_;
};

}  // namespace

NoteStore::NoteStore(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) {
    FileLock lock(path_, O_RDONLY, LOCK_SH);
    load();
  }
}

void NoteStore::load() {
  records_.clear();
  std::ifstream in(path_);
  if (!in) fail("cannot read store " + path_.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto r = parse_record(line);
    if (records_.contains(r.serial)) fail("store is corrupt: serial " + r.serial + " appears twice");
    auto key = r.serial;
    records_.emplace(std::move(key), std::move(r));
  }
}

void NoteStore::enroll(const NoteRecord& record) {
  validate_serial(record.serial);
  FileLock lock(path_, O_WRONLY | O_CREAT | O_APPEND, LOCK_EX);
  load();  // pick up writes from other processes before checking for duplicates
  if (records_.contains(record.serial)) fail("duplicate serial: " + record.serial + " is already enrolled");
  const auto line = record_line(record);
  if (::write(lock.fd(), line.data(), line.size()) != static_cast<ssize_t>(line.size())) fail("store write failed");
  ::fsync(lock.fd());
  records_.emplace(record.serial, record);
}

bool NoteStore::contains(std::string_view serial) const { return records_.contains(std::string(serial)); }

const NoteRecord& NoteStore::lookup(std::string_view serial) const {
  const auto it = records_.find(std::string(serial));
  if (it == records_.end()) fail("not enrolled: " + std::string(serial));
  return it->second;
}

MatchResult NoteStore::verify(std::string_view serial, const Fingerprint& fresh, double threshold) const {
  return decide(lookup(serial).fingerprint, fresh, threshold);
}

}  // namespace psf
