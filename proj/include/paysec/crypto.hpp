// SPDX-License-Identifier: Apache-2.0
//
// Thin, exception-throwing wrappers around libcrypto: AES-128 in the modes
// the envelope speaks, HMAC-SHA-2, AES-GCM, and the suite-byte codec that
// names a (cipher mode, authenticator) pair on the wire.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <openssl/evp.h>
#include <openssl/params.h>
#include <openssl/rand.h>

#include "paysec/bytes.hpp"
#include "paysec/errors.hpp"

namespace paysec {

inline constexpr std::size_t kAesKeyLen = 16;
inline constexpr std::size_t kAesBlock = 16;
inline constexpr std::size_t kIvLen = 16;
inline constexpr std::size_t kGcmNonceLen = 12;
inline constexpr std::size_t kGcmTagLen = 16;

// Wire nibble values. MacOnly sends plaintext and relies on the tag alone.
enum class CipherMode : std::uint8_t {
  MacOnly = 0x0,
  Gcm = 0x1,
  Cbc = 0x2,
  Ctr = 0x3,
  Cfb8 = 0x4,
  Cfb128 = 0x5,
};

enum class MacVariant : std::uint8_t {
  GcmTag = 0x0,
  HmacSha224 = 0x1,
  HmacSha256 = 0x2,
  HmacSha384 = 0x3,
  HmacSha512 = 0x4,
};

struct Suite {
  CipherMode mode = CipherMode::MacOnly;
  MacVariant mac = MacVariant::HmacSha256;

  friend bool operator==(const Suite&, const Suite&) = default;
};

inline std::size_t tag_length(MacVariant v) {
  switch (v) {
    case MacVariant::GcmTag: return 16;
    case MacVariant::HmacSha224: return 28;
    case MacVariant::HmacSha256: return 32;
    case MacVariant::HmacSha384: return 48;
    case MacVariant::HmacSha512: return 64;
  }
  throw Error(ErrorKind::Format, "unknown MAC variant");
}

inline bool has_iv(CipherMode m) { return m != CipherMode::MacOnly; }

/// GCM pairs only with its own tag; everything else pairs with any HMAC.
inline bool suite_valid(Suite s) {
  switch (s.mode) {
    case CipherMode::Gcm:
      return s.mac == MacVariant::GcmTag;
    case CipherMode::MacOnly:
    case CipherMode::Cbc:
    case CipherMode::Ctr:
    case CipherMode::Cfb8:
    case CipherMode::Cfb128:
      return s.mac != MacVariant::GcmTag;
  }
  return false;
}

inline std::uint8_t suite_byte(Suite s) {
  if (!suite_valid(s)) throw Error(ErrorKind::Format, "invalid suite combination");
  return static_cast<std::uint8_t>((static_cast<unsigned>(s.mode) << 4) |
                                   static_cast<unsigned>(s.mac));
}

inline Suite parse_suite_byte(std::uint8_t b) {
  unsigned mode = b >> 4;
  unsigned mac = b & 0x0F;
  if (mode > 0x5 || mac > 0x4)
    throw Error(ErrorKind::Format, "unknown suite byte " + to_hex(Bytes{b}));
  Suite s{static_cast<CipherMode>(mode), static_cast<MacVariant>(mac)};
  if (!suite_valid(s))
    throw Error(ErrorKind::Format, "invalid suite combination " + to_hex(Bytes{b}));
  return s;
}

inline std::string suite_name(Suite s) {
  if (!suite_valid(s)) throw Error(ErrorKind::Format, "invalid suite combination");
  auto mac_part = [&]() -> std::string {
    switch (s.mac) {
      case MacVariant::GcmTag: return "";
      case MacVariant::HmacSha224: return "sha224";
      case MacVariant::HmacSha256: return "sha256";
      case MacVariant::HmacSha384: return "sha384";
      case MacVariant::HmacSha512: return "sha512";
    }
    return "";
  };
  switch (s.mode) {
    case CipherMode::MacOnly: return "mac-only-" + mac_part();
    case CipherMode::Gcm: return "gcm";
    case CipherMode::Cbc: return "cbc-hmac-" + mac_part();
    case CipherMode::Ctr: return "ctr-hmac-" + mac_part();
    case CipherMode::Cfb8: return "cfb8-hmac-" + mac_part();
    case CipherMode::Cfb128: return "cfb128-hmac-" + mac_part();
  }
  throw Error(ErrorKind::Format, "invalid suite combination");
}

inline Suite parse_suite_name(const std::string& name) {
  for (CipherMode mode : {CipherMode::MacOnly, CipherMode::Gcm, CipherMode::Cbc, CipherMode::Ctr,
                          CipherMode::Cfb8, CipherMode::Cfb128}) {
    for (MacVariant mac : {MacVariant::GcmTag, MacVariant::HmacSha224, MacVariant::HmacSha256,
                           MacVariant::HmacSha384, MacVariant::HmacSha512}) {
      Suite s{mode, mac};
      if (suite_valid(s) && suite_name(s) == name) return s;
    }
  }
  throw Error(ErrorKind::Usage, "unknown suite: " + name);
}

namespace detail {

struct EvpCipherCtxFree {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, EvpCipherCtxFree>;

struct EvpMacCtxFree {
  void operator()(EVP_MAC_CTX* p) const { EVP_MAC_CTX_free(p); }
};
using MacCtx = std::unique_ptr<EVP_MAC_CTX, EvpMacCtxFree>;

[[noreturn]] inline void throw_openssl(const char* what) {
  throw Error(ErrorKind::Io, std::string("libcrypto failure in ") + what);
}

inline const EVP_CIPHER* evp_cipher(CipherMode m) {
  switch (m) {
    case CipherMode::Gcm: return EVP_aes_128_gcm();
    case CipherMode::Cbc: return EVP_aes_128_cbc();
    case CipherMode::Ctr: return EVP_aes_128_ctr();
    case CipherMode::Cfb8: return EVP_aes_128_cfb8();
    case CipherMode::Cfb128: return EVP_aes_128_cfb128();
    case CipherMode::MacOnly: break;
  }
  throw Error(ErrorKind::Format, "mode has no cipher");
}

inline const char* hmac_digest_name(MacVariant v) {
  switch (v) {
    case MacVariant::HmacSha224: return "SHA2-224";
    case MacVariant::HmacSha256: return "SHA2-256";
    case MacVariant::HmacSha384: return "SHA2-384";
    case MacVariant::HmacSha512: return "SHA2-512";
    case MacVariant::GcmTag: break;
  }
  throw Error(ErrorKind::Format, "GCM tag is not an HMAC variant");
}

inline EVP_MAC* hmac_algorithm() {
  static EVP_MAC* mac = EVP_MAC_fetch(nullptr, "HMAC", nullptr);
  if (mac == nullptr) throw_openssl("EVP_MAC_fetch");
  return mac;
}

}  // namespace detail

inline Bytes random_bytes(std::size_t n) {
  Bytes out(n);
  if (n > 0 && RAND_bytes(out.data(), static_cast<int>(n)) != 1)
    throw Error(ErrorKind::Entropy, "system entropy source failed");
  return out;
}

inline Bytes hmac(MacVariant v, ByteView key, ByteView data) {
  detail::MacCtx ctx(EVP_MAC_CTX_new(detail::hmac_algorithm()));
  if (!ctx) detail::throw_openssl("EVP_MAC_CTX_new");
  char* digest = const_cast<char*>(detail::hmac_digest_name(v));
  OSSL_PARAM params[] = {OSSL_PARAM_construct_utf8_string("digest", digest, 0),
                         OSSL_PARAM_construct_end()};
  if (EVP_MAC_init(ctx.get(), key.data(), key.size(), params) != 1)
    detail::throw_openssl("EVP_MAC_init");
  if (!data.empty() && EVP_MAC_update(ctx.get(), data.data(), data.size()) != 1)
    detail::throw_openssl("EVP_MAC_update");
  unsigned char out[EVP_MAX_MD_SIZE];
  std::size_t out_len = 0;
  if (EVP_MAC_final(ctx.get(), out, &out_len, sizeof(out)) != 1)
    detail::throw_openssl("EVP_MAC_final");
  return Bytes(out, out + out_len);
}

/// Appends 1..16 bytes of PKCS#7 padding, always producing a block multiple.
inline Bytes pkcs7_pad(ByteView data) {
  std::size_t pad = kAesBlock - (data.size() % kAesBlock);
  Bytes out(data.begin(), data.end());
  out.insert(out.end(), pad, static_cast<std::uint8_t>(pad));
  return out;
}

/// Strips PKCS#7 padding in place; returns false if the padding is malformed.
/// Runs in time independent of where the padding is wrong.
inline bool pkcs7_unpad(Bytes& data) {
  if (data.empty() || data.size() % kAesBlock != 0) return false;
  std::uint8_t pad = data.back();
  unsigned bad = (pad == 0) | (pad > kAesBlock);
  std::uint8_t checked = (bad != 0) ? 1 : pad;
  for (std::size_t i = 0; i < kAesBlock; ++i) {
    std::uint8_t byte = data[data.size() - 1 - i];
    bad |= (i < checked) & (byte != pad);
  }
  if (bad != 0) return false;
  data.resize(data.size() - pad);
  return true;
}

namespace detail {

inline Bytes aes128_run(CipherMode mode, bool encrypt, ByteView key, ByteView iv, ByteView in) {
  if (key.size() != kAesKeyLen) throw Error(ErrorKind::Key, "AES-128 key must be 16 bytes");
  if (iv.size() != kIvLen) throw Error(ErrorKind::Format, "IV must be 16 bytes");
  if (mode == CipherMode::Cbc && in.size() % kAesBlock != 0)
    throw Error(ErrorKind::Format, "CBC input must be a block multiple");
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw_openssl("EVP_CIPHER_CTX_new");
  if (EVP_CipherInit_ex(ctx.get(), evp_cipher(mode), nullptr, key.data(), iv.data(),
                        encrypt ? 1 : 0) != 1)
    throw_openssl("EVP_CipherInit_ex");
  EVP_CIPHER_CTX_set_padding(ctx.get(), 0);
  Bytes out(in.size() + kAesBlock);
  int len1 = 0;
  if (!in.empty() &&
      EVP_CipherUpdate(ctx.get(), out.data(), &len1, in.data(), static_cast<int>(in.size())) != 1)
    throw_openssl("EVP_CipherUpdate");
  int len2 = 0;
  if (EVP_CipherFinal_ex(ctx.get(), out.data() + len1, &len2) != 1)
    throw_openssl("EVP_CipherFinal_ex");
  out.resize(static_cast<std::size_t>(len1) + static_cast<std::size_t>(len2));
  return out;
}

}  // namespace detail

/// Raw AES-128 in CBC/CTR/CFB8/CFB128. CBC input must already be padded.
inline Bytes aes128_encrypt(CipherMode mode, ByteView key, ByteView iv, ByteView plaintext) {
  return detail::aes128_run(mode, true, key, iv, plaintext);
}

inline Bytes aes128_decrypt(CipherMode mode, ByteView key, ByteView iv, ByteView ciphertext) {
  return detail::aes128_run(mode, false, key, iv, ciphertext);
}

struct GcmSealed {
  Bytes ciphertext;
  Bytes tag;
};

inline GcmSealed gcm_seal(ByteView key, ByteView nonce, ByteView aad, ByteView plaintext) {
  if (key.size() != kAesKeyLen) throw Error(ErrorKind::Key, "AES-128 key must be 16 bytes");
  if (nonce.size() != kGcmNonceLen) throw Error(ErrorKind::Format, "GCM nonce must be 12 bytes");
  detail::CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) detail::throw_openssl("EVP_CIPHER_CTX_new");
  if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(), nonce.data()) != 1)
    detail::throw_openssl("EVP_EncryptInit_ex");
  int len = 0;
  if (!aad.empty() &&
      EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1)
    detail::throw_openssl("EVP_EncryptUpdate(aad)");
  GcmSealed out;
  out.ciphertext.resize(plaintext.size());
  if (!plaintext.empty() &&
      EVP_EncryptUpdate(ctx.get(), out.ciphertext.data(), &len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1)
    detail::throw_openssl("EVP_EncryptUpdate");
  if (EVP_EncryptFinal_ex(ctx.get(), out.ciphertext.data() + out.ciphertext.size(), &len) != 1)
    detail::throw_openssl("EVP_EncryptFinal_ex");
  out.tag.resize(kGcmTagLen);
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kGcmTagLen, out.tag.data()) != 1)
    detail::throw_openssl("EVP_CTRL_GCM_GET_TAG");
  return out;
}

/// Verifies and decrypts in one pass; nullopt means the tag did not check out.
inline std::optional<Bytes> gcm_open(ByteView key, ByteView nonce, ByteView aad,
                                     ByteView ciphertext, ByteView tag) {
  if (key.size() != kAesKeyLen) throw Error(ErrorKind::Key, "AES-128 key must be 16 bytes");
  if (nonce.size() != kGcmNonceLen) throw Error(ErrorKind::Format, "GCM nonce must be 12 bytes");
  if (tag.size() != kGcmTagLen) throw Error(ErrorKind::Format, "GCM tag must be 16 bytes");
  detail::CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) detail::throw_openssl("EVP_CIPHER_CTX_new");
  if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(), nonce.data()) != 1)
    detail::throw_openssl("EVP_DecryptInit_ex");
  int len = 0;
  if (!aad.empty() &&
      EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1)
    detail::throw_openssl("EVP_DecryptUpdate(aad)");
  Bytes plaintext(ciphertext.size());
  if (!ciphertext.empty() &&
      EVP_DecryptUpdate(ctx.get(), plaintext.data(), &len, ciphertext.data(),
                        static_cast<int>(ciphertext.size())) != 1)
    detail::throw_openssl("EVP_DecryptUpdate");
  Bytes tag_copy(tag.begin(), tag.end());
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kGcmTagLen, tag_copy.data()) != 1)
    detail::throw_openssl("EVP_CTRL_GCM_SET_TAG");
  if (EVP_DecryptFinal_ex(ctx.get(), plaintext.data() + plaintext.size(), &len) != 1)
    return std::nullopt;
  return plaintext;
}

}  // namespace paysec
