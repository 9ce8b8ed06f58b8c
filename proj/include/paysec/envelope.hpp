// SPDX-License-Identifier: Apache-2.0
//
// The payload-security wire format. An envelope is carrier-agnostic: the
// same bytes ride inside a UDP datagram, an MQTT message body, or a serial
// frame. Layout (big-endian):
//
//   offset  size  field
//   0       2     magic 0x50 0x53
//   2       1     version 0x01
//   3       1     suite (cipher-mode nibble << 4 | mac nibble)
//   4       4     sender_id
//   8       1     class_id
//   9       1     key_epoch
//   10      8     sequence
//   18      2     payload_len
//   20      16    IV (present iff mode != MacOnly; GCM uses bytes 0-11,
//                 bytes 12-15 must be zero)
//   ..      n     payload (ciphertext if private, plaintext if MacOnly)
//   ..      t     tag (16/28/32/48/64 bytes per MacVariant)
//
// Encrypt-then-MAC: the HMAC tag covers header‖IV‖payload; for GCM the tag
// is the mode's own, with the header as associated data. Either way the
// entire header is authenticated, so sender/class/sequence substitution is
// detected before any decryption happens.
#pragma once

#include <cstdint>
#include <utility>

#include "paysec/bytes.hpp"
#include "paysec/crypto.hpp"
#include "paysec/errors.hpp"
#include "paysec/policy.hpp"

namespace paysec {

inline constexpr std::uint8_t kMagic0 = 0x50;
inline constexpr std::uint8_t kMagic1 = 0x53;
inline constexpr std::uint8_t kWireVersion = 0x01;
inline constexpr std::size_t kHeaderLen = 20;
// Largest plaintext whose CBC padding still fits the 16-bit payload_len.
inline constexpr std::size_t kMaxPlaintext = 65519;

// Symmetric key pair for one (device, epoch): a 16-byte AES-128 key and an
// independent 32-byte HMAC key.
struct KeyMaterial {
  Bytes enc_key;
  Bytes mac_key;

  friend bool operator==(const KeyMaterial&, const KeyMaterial&) = default;
};

inline void validate_keys(const KeyMaterial& k) {
  if (k.enc_key.size() != kAesKeyLen) throw Error(ErrorKind::Key, "enc_key must be 16 bytes");
  if (k.mac_key.size() != 32) throw Error(ErrorKind::Key, "mac_key must be 32 bytes");
  if (ct_equal(k.enc_key, ByteView(k.mac_key).first(kAesKeyLen)))
    throw Error(ErrorKind::Key, "mac_key must not start with enc_key");
}

inline KeyMaterial fresh_key_material() {
  KeyMaterial k;
  do {
    k.enc_key = random_bytes(kAesKeyLen);
    k.mac_key = random_bytes(32);
  } while (ct_equal(k.enc_key, ByteView(k.mac_key).first(kAesKeyLen)));
  return k;
}

struct EnvelopeHeader {
  Suite suite;
  std::uint32_t sender_id = 0;
  std::uint8_t class_id = 0;
  std::uint8_t key_epoch = 0;
  std::uint64_t sequence = 0;
  std::uint16_t payload_len = 0;

  friend bool operator==(const EnvelopeHeader&, const EnvelopeHeader&) = default;
};

struct Envelope {
  EnvelopeHeader header;
  Bytes iv;       // empty iff MacOnly
  Bytes payload;  // length == header.payload_len
  Bytes tag;

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

namespace detail {

inline void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u32(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8)
    out.push_back(static_cast<std::uint8_t>(v >> shift));
}

inline void put_u64(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8)
    out.push_back(static_cast<std::uint8_t>(v >> shift));
}

inline std::uint16_t get_u16(ByteView in, std::size_t at) {
  return static_cast<std::uint16_t>((in[at] << 8) | in[at + 1]);
}

inline std::uint32_t get_u32(ByteView in, std::size_t at) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | in[at + i];
  return v;
}

inline std::uint64_t get_u64(ByteView in, std::size_t at) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v = (v << 8) | in[at + i];
  return v;
}

}  // namespace detail

inline Bytes encode_header(const EnvelopeHeader& h) {
  Bytes out;
  out.reserve(kHeaderLen);
  out.push_back(kMagic0);
  out.push_back(kMagic1);
  out.push_back(kWireVersion);
  out.push_back(suite_byte(h.suite));
  detail::put_u32(out, h.sender_id);
  out.push_back(h.class_id);
  out.push_back(h.key_epoch);
  detail::put_u64(out, h.sequence);
  detail::put_u16(out, h.payload_len);
  return out;
}

inline Bytes encode(const Envelope& e) {
  Bytes out = encode_header(e.header);
  append(out, e.iv);
  append(out, e.payload);
  append(out, e.tag);
  return out;
}

/// Structural parse only — no key is touched. Everything decode accepts has
/// internally consistent lengths, so later stages can index freely.
inline Envelope decode(ByteView wire) {
  if (wire.size() < kHeaderLen)
    throw Error(ErrorKind::Format, "truncated: " + std::to_string(wire.size()) +
                                       " bytes is shorter than the 20-byte header");
  if (wire[0] != kMagic0 || wire[1] != kMagic1)
    throw Error(ErrorKind::Format, "bad magic");
  if (wire[2] != kWireVersion)
    throw Error(ErrorKind::Format, "unsupported version " + std::to_string(wire[2]));

  Envelope e;
  e.header.suite = parse_suite_byte(wire[3]);
  e.header.sender_id = detail::get_u32(wire, 4);
  e.header.class_id = wire[8];
  e.header.key_epoch = wire[9];
  e.header.sequence = detail::get_u64(wire, 10);
  e.header.payload_len = detail::get_u16(wire, 18);

  std::size_t iv_len = has_iv(e.header.suite.mode) ? kIvLen : 0;
  std::size_t expect =
      kHeaderLen + iv_len + e.header.payload_len + tag_length(e.header.suite.mac);
  if (wire.size() != expect)
    throw Error(ErrorKind::Format, "length mismatch: wire is " + std::to_string(wire.size()) +
                                       " bytes, header promises " + std::to_string(expect));
  if (e.header.suite.mode == CipherMode::Cbc &&
      (e.header.payload_len == 0 || e.header.payload_len % kAesBlock != 0))
    throw Error(ErrorKind::Format, "CBC payload must be a positive block multiple");

  std::size_t at = kHeaderLen;
  e.iv.assign(wire.begin() + at, wire.begin() + at + iv_len);
  at += iv_len;
  e.payload.assign(wire.begin() + at, wire.begin() + at + e.header.payload_len);
  at += e.header.payload_len;
  e.tag.assign(wire.begin() + at, wire.end());

  if (e.header.suite.mode == CipherMode::Gcm) {
    for (std::size_t i = kGcmNonceLen; i < kIvLen; ++i)
      if (e.iv[i] != 0) throw Error(ErrorKind::Format, "GCM IV padding bytes must be zero");
  }
  return e;
}

// --- Replay protection -----------------------------------------------------

/// Sliding window over the 64 sequence numbers below the highest seen.
/// peek() is pure; commit() is called only after the envelope fully verifies,
/// so a forged or truncated message can never burn a sequence number.
class ReplayWindow {
 public:
  enum class Check { Accept, Duplicate, Stale };

  Check peek(std::uint64_t seq) const {
    if (!any_ || seq > highest_) return Check::Accept;
    if (seq == highest_) return Check::Duplicate;
    std::uint64_t behind = highest_ - seq;
    if (behind > kSpan) return Check::Stale;
    return ((bitmap_ >> (behind - 1)) & 1) ? Check::Duplicate : Check::Accept;
  }

  /// Record seq as seen. Only meaningful after peek(seq) == Accept.
  void commit(std::uint64_t seq) {
    if (!any_) {
      any_ = true;
      highest_ = seq;
      bitmap_ = 0;
      return;
    }
    if (seq > highest_) {
      std::uint64_t shift = seq - highest_;
      bitmap_ = shift >= kSpan ? 0 : bitmap_ << shift;
      if (shift <= kSpan) bitmap_ |= 1ULL << (shift - 1);
      highest_ = seq;
    } else {
      std::uint64_t behind = highest_ - seq;
      if (behind >= 1 && behind <= kSpan) bitmap_ |= 1ULL << (behind - 1);
    }
  }

  std::uint64_t highest_seen() const { return highest_; }
  bool empty() const { return !any_; }

  static constexpr std::uint64_t kSpan = 64;

 private:
  std::uint64_t highest_ = 0;
  std::uint64_t bitmap_ = 0;  // bit i set => sequence highest_-1-i was seen
  bool any_ = false;
};

inline const char* to_string(ReplayWindow::Check c) {
  switch (c) {
    case ReplayWindow::Check::Accept: return "accept";
    case ReplayWindow::Check::Duplicate: return "reject-duplicate";
    case ReplayWindow::Check::Stale: return "reject-stale";
  }
  return "?";
}

/// Tri-state check-and-admit: Accept mutates the window, rejections do not.
inline ReplayWindow::Check check_replay(ReplayWindow& w, std::uint64_t seq) {
  ReplayWindow::Check r = w.peek(seq);
  if (r == ReplayWindow::Check::Accept) w.commit(seq);
  return r;
}

// --- Seal / open -------------------------------------------------------------

/// Builds the wire form of one message. The suite must agree with the policy
/// decision: MacOnly exactly when the class does not require privacy.
/// `iv_override` (16 bytes; for GCM the last 4 must be zero) pins the IV for
/// reproducible tests; production callers leave it empty and get a fresh
/// random IV per message.
inline Bytes seal(const KeyMaterial& keys, std::uint8_t key_epoch, std::uint32_t sender_id,
                  std::uint64_t sequence, std::uint8_t class_id, PrivacyDecision decision,
                  Suite suite, ByteView plaintext, ByteView iv_override = {}) {
  validate_keys(keys);
  if (!suite_valid(suite)) throw Error(ErrorKind::Format, "invalid suite combination");
  if (plaintext.size() > kMaxPlaintext)
    throw Error(ErrorKind::Validation,
                "plaintext exceeds " + std::to_string(kMaxPlaintext) + " bytes");
  bool mac_only = suite.mode == CipherMode::MacOnly;
  if (mac_only == decision.requires_privacy)
    throw Error(ErrorKind::Policy,
                mac_only ? "class requires privacy but suite is MAC-only"
                         : "class does not require privacy but suite encrypts");

  Bytes iv;
  if (has_iv(suite.mode)) {
    if (!iv_override.empty()) {
      if (iv_override.size() != kIvLen) throw Error(ErrorKind::Format, "IV must be 16 bytes");
      iv.assign(iv_override.begin(), iv_override.end());
    } else if (suite.mode == CipherMode::Gcm) {
      iv = random_bytes(kGcmNonceLen);
      iv.resize(kIvLen, 0);
    } else {
      iv = random_bytes(kIvLen);
    }
    if (suite.mode == CipherMode::Gcm)
      for (std::size_t i = kGcmNonceLen; i < kIvLen; ++i)
        if (iv[i] != 0) throw Error(ErrorKind::Format, "GCM IV padding bytes must be zero");
  }

  std::size_t payload_len = plaintext.size();
  if (suite.mode == CipherMode::Cbc) payload_len = plaintext.size() + kAesBlock - plaintext.size() % kAesBlock;

  EnvelopeHeader h;
  h.suite = suite;
  h.sender_id = sender_id;
  h.class_id = class_id;
  h.key_epoch = key_epoch;
  h.sequence = sequence;
  h.payload_len = static_cast<std::uint16_t>(payload_len);
  Bytes wire = encode_header(h);

  Bytes payload;
  Bytes tag;
  switch (suite.mode) {
    case CipherMode::MacOnly:
      payload.assign(plaintext.begin(), plaintext.end());
      break;
    case CipherMode::Gcm: {
      GcmSealed sealed = gcm_seal(keys.enc_key, ByteView(iv).first(kGcmNonceLen), wire, plaintext);
      payload = std::move(sealed.ciphertext);
      tag = std::move(sealed.tag);
      break;
    }
    case CipherMode::Cbc:
      payload = aes128_encrypt(CipherMode::Cbc, keys.enc_key, iv, pkcs7_pad(plaintext));
      break;
    case CipherMode::Ctr:
    case CipherMode::Cfb8:
    case CipherMode::Cfb128:
      payload = aes128_encrypt(suite.mode, keys.enc_key, iv, plaintext);
      break;
  }

  append(wire, iv);
  append(wire, payload);
  if (suite.mac != MacVariant::GcmTag)
    tag = hmac(suite.mac, keys.mac_key, wire);  // wire is header‖iv‖payload here
  append(wire, tag);
  return wire;
}

struct OpenResult {
  EnvelopeHeader header;
  Bytes plaintext;
  bool privacy_used = false;
};

/// Receives one wire message. `lookup(sender_id, key_epoch)` returns the
/// KeyMaterial* for that pair, or nullptr if unknown. Stage order is fixed:
/// structural parse, key lookup, tag verification, freshness peek, decrypt —
/// and the replay window is committed only after every stage has passed.
template <typename KeyLookup>
inline OpenResult open(KeyLookup&& lookup, ReplayWindow& window, ByteView wire) {
  Envelope e = decode(wire);

  const KeyMaterial* keys = lookup(e.header.sender_id, e.header.key_epoch);
  if (keys == nullptr)
    throw Error(ErrorKind::Key, "no key material for sender " +
                                    std::to_string(e.header.sender_id) + " epoch " +
                                    std::to_string(e.header.key_epoch));
  validate_keys(*keys);

  Bytes header_bytes = encode_header(e.header);
  Bytes plaintext;
  if (e.header.suite.mode == CipherMode::Gcm) {
    auto opened = gcm_open(keys->enc_key, ByteView(e.iv).first(kGcmNonceLen), header_bytes,
                           e.payload, e.tag);
    if (!opened) throw Error(ErrorKind::Auth, "authentication tag mismatch");
    plaintext = std::move(*opened);
  } else {
    Bytes preamble = header_bytes;
    append(preamble, e.iv);
    append(preamble, e.payload);
    Bytes expect = hmac(e.header.suite.mac, keys->mac_key, preamble);
    if (!ct_equal(expect, e.tag)) throw Error(ErrorKind::Auth, "authentication tag mismatch");
  }

  ReplayWindow::Check fresh = window.peek(e.header.sequence);
  if (fresh == ReplayWindow::Check::Duplicate)
    throw Error(ErrorKind::Freshness,
                "duplicate sequence " + std::to_string(e.header.sequence));
  if (fresh == ReplayWindow::Check::Stale)
    throw Error(ErrorKind::Freshness, "stale sequence " + std::to_string(e.header.sequence));

  switch (e.header.suite.mode) {
    case CipherMode::MacOnly:
      plaintext = e.payload;
      break;
    case CipherMode::Gcm:
      break;  // already decrypted by the fused verify
    case CipherMode::Cbc:
      plaintext = aes128_decrypt(CipherMode::Cbc, keys->enc_key, e.iv, e.payload);
      // Padding faults report exactly like tag faults (defense in depth; the
      // tag check above already rejected any tampered ciphertext).
      if (!pkcs7_unpad(plaintext)) throw Error(ErrorKind::Auth, "authentication tag mismatch");
      break;
    case CipherMode::Ctr:
    case CipherMode::Cfb8:
    case CipherMode::Cfb128:
      plaintext = aes128_decrypt(e.header.suite.mode, keys->enc_key, e.iv, e.payload);
      break;
  }

  window.commit(e.header.sequence);
  OpenResult r;
  r.header = e.header;
  r.plaintext = std::move(plaintext);
  r.privacy_used = e.header.suite.mode != CipherMode::MacOnly;
  return r;
}

}  // namespace paysec
