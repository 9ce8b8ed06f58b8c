// SPDX-License-Identifier: Apache-2.0
//
// Energy model core: the security attributes being costed (an integrity-only
// HMAC, or a full AEAD composition, at a given input size), timing samples,
// power models, and the exact μs × mW / 1000 = μJ arithmetic. All derived
// numbers are computed in fixed-point decimals so reports never drift.
#pragma once

#include <cctype>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "paysec/crypto.hpp"
#include "paysec/errors.hpp"
#include "paysec/fixed_decimal.hpp"

namespace paysec {

struct AttributeSpec {
  enum class Kind { IntegrityOnly, Aead };

  Kind kind = Kind::IntegrityOnly;
  CipherMode mode = CipherMode::MacOnly;  // meaningful only for Aead
  MacVariant mac = MacVariant::HmacSha256;
  std::size_t input_size = 64;

  friend auto operator<=>(const AttributeSpec&, const AttributeSpec&) = default;
};

inline void validate(const AttributeSpec& a) {
  if (a.input_size < 1) throw Error(ErrorKind::Validation, "attribute input_size must be >= 1");
  if (a.kind == AttributeSpec::Kind::IntegrityOnly) {
    if (a.mac == MacVariant::GcmTag)
      throw Error(ErrorKind::Validation, "integrity-only attribute needs an HMAC variant");
  } else {
    if (a.mode == CipherMode::MacOnly)
      throw Error(ErrorKind::Validation, "AEAD attribute needs a cipher mode");
    if (!suite_valid(Suite{a.mode, a.mac}))
      throw Error(ErrorKind::Validation, "AEAD attribute has an invalid cipher/MAC pairing");
  }
}

inline AttributeSpec integrity_attr(MacVariant mac, std::size_t size) {
  AttributeSpec a{AttributeSpec::Kind::IntegrityOnly, CipherMode::MacOnly, mac, size};
  validate(a);
  return a;
}

inline AttributeSpec aead_attr(CipherMode mode, MacVariant mac, std::size_t size) {
  AttributeSpec a{AttributeSpec::Kind::Aead, mode, mac, size};
  validate(a);
  return a;
}

/// Canonical identifier without the size, e.g. "hmac-sha256" or
/// "aes128-cbc-hmac-sha256".
inline std::string attribute_name(const AttributeSpec& a) {
  auto hmac_name = [](MacVariant m) -> std::string {
    switch (m) {
      case MacVariant::HmacSha224: return "hmac-sha224";
      case MacVariant::HmacSha256: return "hmac-sha256";
      case MacVariant::HmacSha384: return "hmac-sha384";
      case MacVariant::HmacSha512: return "hmac-sha512";
      case MacVariant::GcmTag: break;
    }
    throw Error(ErrorKind::Validation, "no HMAC name for GCM tag");
  };
  if (a.kind == AttributeSpec::Kind::IntegrityOnly) return hmac_name(a.mac);
  switch (a.mode) {
    case CipherMode::Gcm: return "aes128-gcm";
    case CipherMode::Cbc: return "aes128-cbc-" + hmac_name(a.mac);
    case CipherMode::Ctr: return "aes128-ctr-" + hmac_name(a.mac);
    case CipherMode::Cfb8: return "aes128-cfb8-" + hmac_name(a.mac);
    case CipherMode::Cfb128: return "aes128-cfb128-" + hmac_name(a.mac);
    case CipherMode::MacOnly: break;
  }
  throw Error(ErrorKind::Validation, "AEAD attribute has no cipher mode");
}

inline std::string attribute_label(const AttributeSpec& a) {
  std::string name = attribute_name(a);
  for (char& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name + " @ " + std::to_string(a.input_size) + " B";
}

inline AttributeSpec parse_attribute_name(const std::string& name, std::size_t size) {
  auto hmac_of = [](const std::string& s) -> MacVariant {
    if (s == "hmac-sha224") return MacVariant::HmacSha224;
    if (s == "hmac-sha256") return MacVariant::HmacSha256;
    if (s == "hmac-sha384") return MacVariant::HmacSha384;
    if (s == "hmac-sha512") return MacVariant::HmacSha512;
    throw Error(ErrorKind::Format, "unknown attribute: " + s);
  };
  if (name.rfind("hmac-", 0) == 0) return integrity_attr(hmac_of(name), size);
  if (name == "aes128-gcm") return aead_attr(CipherMode::Gcm, MacVariant::GcmTag, size);
  for (auto [prefix, mode] :
       {std::pair<const char*, CipherMode>{"aes128-cbc-", CipherMode::Cbc},
        {"aes128-ctr-", CipherMode::Ctr},
        {"aes128-cfb8-", CipherMode::Cfb8},
        {"aes128-cfb128-", CipherMode::Cfb128}}) {
    std::string p = prefix;
    if (name.rfind(p, 0) == 0) return aead_attr(mode, hmac_of(name.substr(p.size())), size);
  }
  throw Error(ErrorKind::Format, "unknown attribute: " + name);
}

struct TimingSample {
  AttributeSpec attribute;
  Micros per_op_micros;
  std::vector<std::uint64_t> iteration_counts;
  Percent dispersion;  // relative std dev across the per-count averages
};

using PowerModel = std::map<AttributeSpec, Milliwatts>;

/// E(μJ) = t(μs) × P(mW) / 1000, computed exactly in thousandth-μJ units.
inline MicroJoules energy_uj(Micros time_us, Milliwatts power_mw) {
  if (!time_us.positive()) throw Error(ErrorKind::Validation, "time must be positive");
  if (!power_mw.positive()) throw Error(ErrorKind::Validation, "power must be positive");
  __int128 product = static_cast<__int128>(time_us.units()) * power_mw.units();
  return MicroJoules::from_units(detail::div_round_half_away(product, 1'000'000));
}

/// 100 × (1 − candidate/baseline), to two decimals, half away from zero.
inline Percent savings_percent(MicroJoules candidate, MicroJoules baseline) {
  if (!baseline.positive()) throw Error(ErrorKind::Validation, "baseline must be positive");
  __int128 diff = static_cast<__int128>(baseline.units()) - candidate.units();
  return Percent::from_units(detail::div_round_half_away(diff * 10'000, baseline.units()));
}

}  // namespace paysec
