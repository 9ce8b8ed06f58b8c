// SPDX-License-Identifier: Apache-2.0
//
// Decentralised session keys: every node mints its own outgoing key pair and
// rotates it by sealing the next pair under the current one. The receiver
// keeps at most two epochs per sender (make-before-break) and drops the old
// epoch at the first successful open under the new one.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "paysec/bytes.hpp"
#include "paysec/crypto.hpp"
#include "paysec/envelope.hpp"
#include "paysec/errors.hpp"
#include "paysec/policy.hpp"

namespace paysec {

inline constexpr std::int64_t kDefaultKeyLifetimeSeconds = 30LL * 24 * 3600;
inline constexpr std::int64_t kMinKeyLifetimeSeconds = 3600;            // one hour
inline constexpr std::int64_t kMaxKeyLifetimeSeconds = 365LL * 24 * 3600;  // one year

struct SessionKeys {
  KeyMaterial keys;
  std::uint8_t epoch = 0;
  std::int64_t created_at = 0;  // unix seconds
  std::int64_t lifetime_seconds = kDefaultKeyLifetimeSeconds;

  bool due_for_rekey(std::int64_t now) const { return now >= created_at + lifetime_seconds; }
};

inline void validate_lifetime(std::int64_t seconds) {
  if (seconds < kMinKeyLifetimeSeconds || seconds > kMaxKeyLifetimeSeconds)
    throw Error(ErrorKind::Validation, "key lifetime must be between one hour and one year");
}

inline SessionKeys generate_session_keys(std::uint8_t epoch, std::int64_t now,
                                         std::int64_t lifetime_seconds = kDefaultKeyLifetimeSeconds) {
  validate_lifetime(lifetime_seconds);
  SessionKeys s;
  s.keys = fresh_key_material();
  s.epoch = epoch;
  s.created_at = now;
  s.lifetime_seconds = lifetime_seconds;
  return s;
}

/// Fresh keys for the next epoch; 255 wraps to 0.
inline SessionKeys rotate_session(const SessionKeys& current, std::int64_t now) {
  return generate_session_keys(static_cast<std::uint8_t>(current.epoch + 1), now,
                               current.lifetime_seconds);
}

// --- Rekey payload ----------------------------------------------------------

// Every rekey message is exactly 512 bytes before encryption: the new keys,
// the new epoch, and random fill. Constant size means a rekey is
// indistinguishable by length from any other 512-byte private exchange.
inline constexpr std::size_t kRekeyPayloadLen = 512;

struct RekeyPayload {
  KeyMaterial next_keys;
  std::uint8_t next_epoch = 0;
};

inline Bytes encode_rekey_payload(const RekeyPayload& p) {
  validate_keys(p.next_keys);
  Bytes out;
  out.reserve(kRekeyPayloadLen);
  append(out, p.next_keys.enc_key);
  append(out, p.next_keys.mac_key);
  out.push_back(p.next_epoch);
  append(out, random_bytes(kRekeyPayloadLen - out.size()));
  return out;
}

inline RekeyPayload decode_rekey_payload(ByteView data) {
  if (data.size() != kRekeyPayloadLen)
    throw Error(ErrorKind::Format, "rekey payload must be exactly 512 bytes");
  RekeyPayload p;
  p.next_keys.enc_key.assign(data.begin(), data.begin() + kAesKeyLen);
  p.next_keys.mac_key.assign(data.begin() + kAesKeyLen, data.begin() + kAesKeyLen + 32);
  p.next_epoch = data[kAesKeyLen + 32];
  validate_keys(p.next_keys);
  return p;
}

/// Seals next-epoch keys under the CURRENT epoch's keys with the session-keys
/// message class — always private, by Table-1 policy. MacOnly suites are a
/// policy violation here regardless of what the caller asks for.
inline Bytes build_rekey_envelope(const SessionKeys& current, const SessionKeys& next,
                                  std::uint32_t sender_id, std::uint64_t sequence,
                                  const PolicyTable& policy,
                                  Suite suite = Suite{CipherMode::Cbc, MacVariant::HmacSha256}) {
  if (next.epoch != static_cast<std::uint8_t>(current.epoch + 1))
    throw Error(ErrorKind::Policy, "epoch discontinuity: rekey must advance the epoch by one");
  PrivacyDecision decision = decide(policy, kClassSessionKeys);
  RekeyPayload p{next.keys, next.epoch};
  return seal(current.keys, current.epoch, sender_id, sequence, kClassSessionKeys, decision,
              suite, encode_rekey_payload(p));
}

// --- Key store ---------------------------------------------------------------

struct KeyRecord {
  std::uint32_t sender_id = 0;
  std::uint8_t epoch = 0;
  KeyMaterial keys;
  std::int64_t created_at = 0;

  friend bool operator==(const KeyRecord&, const KeyRecord&) = default;
};

/// Per-sender key history, newest epoch last, at most two epochs deep.
class KeyStore {
 public:
  /// Adds keys for a sender. A known sender may only advance one epoch at a
  /// time (mod 256); anything else is an epoch discontinuity.
  void install(KeyRecord rec) {
    validate_keys(rec.keys);
    auto& chain = by_sender_[rec.sender_id];
    if (!chain.empty()) {
      std::uint8_t expect = static_cast<std::uint8_t>(chain.back().epoch + 1);
      if (rec.epoch != expect)
        throw Error(ErrorKind::Policy,
                    "epoch discontinuity for sender " + std::to_string(rec.sender_id) +
                        ": have " + std::to_string(chain.back().epoch) + ", got " +
                        std::to_string(rec.epoch));
    }
    chain.push_back(std::move(rec));
    while (chain.size() > 2) chain.erase(chain.begin());
  }

  const KeyMaterial* find(std::uint32_t sender_id, std::uint8_t epoch) const {
    auto it = by_sender_.find(sender_id);
    if (it == by_sender_.end()) return nullptr;
    for (const auto& rec : it->second)
      if (rec.epoch == epoch) return &rec.keys;
    return nullptr;
  }

  const KeyRecord* newest(std::uint32_t sender_id) const {
    auto it = by_sender_.find(sender_id);
    if (it == by_sender_.end() || it->second.empty()) return nullptr;
    return &it->second.back();
  }

  /// Make-before-break: once the newest epoch has carried a verified message,
  /// the older epoch is retired.
  void note_success(std::uint32_t sender_id, std::uint8_t epoch) {
    auto it = by_sender_.find(sender_id);
    if (it == by_sender_.end() || it->second.empty()) return;
    if (it->second.back().epoch == epoch && it->second.size() > 1)
      it->second.erase(it->second.begin(), it->second.end() - 1);
  }

  std::size_t epoch_count(std::uint32_t sender_id) const {
    auto it = by_sender_.find(sender_id);
    return it == by_sender_.end() ? 0 : it->second.size();
  }

  std::vector<KeyRecord> records() const {
    std::vector<KeyRecord> out;
    for (const auto& [sender, chain] : by_sender_)
      out.insert(out.end(), chain.begin(), chain.end());
    return out;
  }

  std::vector<std::uint32_t> senders() const {
    std::vector<std::uint32_t> out;
    for (const auto& [sender, chain] : by_sender_) out.push_back(sender);
    return out;
  }

  bool empty() const { return by_sender_.empty(); }

  /// Adapter for open(): (sender_id, epoch) -> const KeyMaterial*.
  auto lookup_fn() const {
    return [this](std::uint32_t sender, std::uint8_t epoch) { return find(sender, epoch); };
  }

 private:
  std::map<std::uint32_t, std::vector<KeyRecord>> by_sender_;
};

/// Opens a rekey envelope against the store and installs the next epoch.
/// The old epoch stays valid until note_success() reports traffic under the
/// new one. Returns the installed epoch.
inline std::uint8_t apply_rekey(KeyStore& store, ReplayWindow& window, ByteView wire,
                                std::int64_t now) {
  OpenResult r = open(store.lookup_fn(), window, wire);
  if (r.header.class_id != kClassSessionKeys)
    throw Error(ErrorKind::Format, "not a rekey envelope: class_id " +
                                       std::to_string(r.header.class_id));
  RekeyPayload p = decode_rekey_payload(r.plaintext);
  if (p.next_epoch != static_cast<std::uint8_t>(r.header.key_epoch + 1))
    throw Error(ErrorKind::Policy, "epoch discontinuity: rekey must advance the epoch by one");
  store.install(KeyRecord{r.header.sender_id, p.next_epoch, p.next_keys, now});
  return p.next_epoch;
}

// --- Key store file ----------------------------------------------------------

/// JSON key store: {"version":1,"keys":[{"sender_id":..,"epoch":..,
/// "enc_key":"<hex>","mac_key":"<hex>","created_at":<unix>}]}.
inline KeyStore load_key_store(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, std::string("key store parse error: ") + e.what());
  }
  if (!doc.is_object() || doc.value("version", 0) != 1)
    throw Error(ErrorKind::Format, "key store must be a version-1 document");
  if (!doc.contains("keys") || !doc["keys"].is_array())
    throw Error(ErrorKind::Format, "key store must carry a \"keys\" list");
  KeyStore store;
  for (const auto& item : doc["keys"]) {
    try {
      KeyRecord rec;
      std::int64_t sender = item.at("sender_id").get<std::int64_t>();
      std::int64_t epoch = item.at("epoch").get<std::int64_t>();
      if (sender < 0 || sender > 0xFFFFFFFFLL)
        throw Error(ErrorKind::Format, "sender_id out of range");
      if (epoch < 0 || epoch > 255) throw Error(ErrorKind::Format, "epoch out of range");
      rec.sender_id = static_cast<std::uint32_t>(sender);
      rec.epoch = static_cast<std::uint8_t>(epoch);
      rec.keys.enc_key = from_hex(item.at("enc_key").get<std::string>());
      rec.keys.mac_key = from_hex(item.at("mac_key").get<std::string>());
      rec.created_at = item.at("created_at").get<std::int64_t>();
      try {
        store.install(std::move(rec));
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::Key || e.kind() == ErrorKind::Policy)
          throw Error(ErrorKind::Format, e.what());
        throw;
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Format, std::string("key store field error: ") + e.what());
    }
  }
  return store;
}

inline std::string serialize(const KeyStore& store) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["keys"] = nlohmann::ordered_json::array();
  for (const auto& rec : store.records()) {
    nlohmann::ordered_json item;
    item["sender_id"] = rec.sender_id;
    item["epoch"] = rec.epoch;
    item["enc_key"] = to_hex(rec.keys.enc_key);
    item["mac_key"] = to_hex(rec.keys.mac_key);
    item["created_at"] = rec.created_at;
    doc["keys"].push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

}  // namespace paysec
