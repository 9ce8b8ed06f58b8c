// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "paysec/envelope.hpp"

using namespace paysec;

namespace {

KeyMaterial test_keys(std::uint8_t fill_enc = 0x11, std::uint8_t fill_mac = 0x77) {
  KeyMaterial k;
  k.enc_key = Bytes(kAesKeyLen, fill_enc);
  k.mac_key = Bytes(32, fill_mac);
  return k;
}

const PrivacyDecision kPublic{false, RiskBand::None};
const PrivacyDecision kPrivate{true, RiskBand::High};

PrivacyDecision decision_for(Suite s) {
  return s.mode == CipherMode::MacOnly ? kPublic : kPrivate;
}

std::vector<Suite> all_suites() {
  std::vector<Suite> out;
  for (unsigned mode = 0; mode <= 0x5; ++mode)
    for (unsigned mac = 0; mac <= 0x4; ++mac) {
      Suite s{static_cast<CipherMode>(mode), static_cast<MacVariant>(mac)};
      if (suite_valid(s)) out.push_back(s);
    }
  return out;
}

ErrorKind open_error(const Bytes& wire, const KeyMaterial& keys) {
  ReplayWindow w;
  auto lookup = [&](std::uint32_t, std::uint8_t) { return &keys; };
  try {
    paysec::open(lookup, w, wire);
    throw std::logic_error("open unexpectedly succeeded");
  } catch (const Error& e) {
    return e.kind();
  }
}

}  // namespace

TEST_CASE("header encoding matches the documented example") {
  EnvelopeHeader h;
  h.suite = {CipherMode::MacOnly, MacVariant::HmacSha256};
  h.sender_id = 1;
  h.class_id = 0;
  h.key_epoch = 0;
  h.sequence = 1;
  h.payload_len = 0;
  Bytes enc = encode_header(h);
  REQUIRE(enc.size() == kHeaderLen);
  Bytes expect = {0x50, 0x53, 0x01, 0x02, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00,
                  0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00};
  CHECK(to_hex(enc) == to_hex(expect));
}

TEST_CASE("envelope codec round-trips random structures") {
  std::mt19937_64 rng(0xC0FFEE);
  std::vector<Suite> suites = all_suites();
  for (int trial = 0; trial < 1000; ++trial) {
    Envelope e;
    e.header.suite = suites[rng() % suites.size()];
    e.header.sender_id = static_cast<std::uint32_t>(rng());
    e.header.class_id = static_cast<std::uint8_t>(rng());
    e.header.key_epoch = static_cast<std::uint8_t>(rng());
    e.header.sequence = rng();
    std::size_t n = rng() % 700;
    if (e.header.suite.mode == CipherMode::Cbc) n = (n % 43 + 1) * kAesBlock;
    e.header.payload_len = static_cast<std::uint16_t>(n);
    e.payload.resize(n);
    for (auto& b : e.payload) b = static_cast<std::uint8_t>(rng());
    if (has_iv(e.header.suite.mode)) {
      e.iv.resize(kIvLen);
      for (auto& b : e.iv) b = static_cast<std::uint8_t>(rng());
      if (e.header.suite.mode == CipherMode::Gcm)
        std::fill(e.iv.begin() + kGcmNonceLen, e.iv.end(), 0);
    }
    e.tag.resize(tag_length(e.header.suite.mac));
    for (auto& b : e.tag) b = static_cast<std::uint8_t>(rng());

    Bytes wire = encode(e);
    Envelope back = decode(wire);
    CAPTURE(trial, suite_name(e.header.suite), n);
    REQUIRE(back == e);
    CHECK(encode(back) == wire);
  }
}

TEST_CASE("decode rejects structural damage") {
  auto fails = [](Bytes wire, const std::string& fragment) {
    try {
      decode(wire);
      return false;
    } catch (const Error& e) {
      return e.kind() == ErrorKind::Format &&
             std::string(e.what()).find(fragment) != std::string::npos;
    }
  };

  KeyMaterial keys = test_keys();
  Bytes good = seal(keys, 0, 1, 1, kClassTemperature, kPublic,
                    {CipherMode::MacOnly, MacVariant::HmacSha256}, to_bytes("t=24.50"));
  CHECK_NOTHROW(decode(good));

  Bytes nineteen(good.begin(), good.begin() + 19);
  CHECK(fails(nineteen, "shorter than the 20-byte header"));
  CHECK(fails(Bytes{}, "shorter"));

  Bytes bad_magic = good;
  bad_magic[0] = 0x51;
  CHECK(fails(bad_magic, "bad magic"));

  Bytes bad_version = good;
  bad_version[2] = 0x02;
  CHECK(fails(bad_version, "unsupported version 2"));

  Bytes bad_suite = good;
  bad_suite[3] = 0xFF;
  CHECK(fails(bad_suite, "suite"));

  Bytes truncated = good;
  truncated.pop_back();
  CHECK(fails(truncated, "length mismatch"));

  Bytes extended = good;
  extended.push_back(0);
  CHECK(fails(extended, "length mismatch"));

  // A CBC header may not promise zero or off-block payload bytes.
  EnvelopeHeader h;
  h.suite = {CipherMode::Cbc, MacVariant::HmacSha256};
  h.payload_len = 0;
  Envelope e{h, Bytes(kIvLen, 0), {}, Bytes(32, 0)};
  CHECK(fails(encode(e), "positive block multiple"));
  e.header.payload_len = 24;
  e.payload = Bytes(24, 0);
  CHECK(fails(encode(e), "positive block multiple"));

  // GCM IV tail bytes are reserved as zero.
  EnvelopeHeader g;
  g.suite = {CipherMode::Gcm, MacVariant::GcmTag};
  g.payload_len = 4;
  Envelope ge{g, Bytes(kIvLen, 0), Bytes(4, 0), Bytes(16, 0)};
  ge.iv[15] = 1;
  CHECK(fails(encode(ge), "GCM IV padding"));
}

TEST_CASE("seal and open round-trip every suite and size") {
  KeyMaterial keys = fresh_key_material();
  auto lookup = [&](std::uint32_t, std::uint8_t) { return &keys; };
  const std::size_t sizes[] = {0, 1, 15, 16, 17, 64, 511, 512, 1024};
  std::mt19937_64 rng(7);

  for (Suite suite : all_suites()) {
    ReplayWindow window;
    std::uint64_t seq = 0;
    for (std::size_t n : sizes) {
      Bytes pt(n);
      for (auto& b : pt) b = static_cast<std::uint8_t>(rng());
      Bytes wire = seal(keys, 3, 42, ++seq, 9, decision_for(suite), suite, pt);
      OpenResult r = paysec::open(lookup, window, wire);
      CAPTURE(suite_name(suite), n);
      CHECK(r.plaintext == pt);
      CHECK(r.header.sender_id == 42);
      CHECK(r.header.class_id == 9);
      CHECK(r.header.key_epoch == 3);
      CHECK(r.header.sequence == seq);
      CHECK(r.header.suite == suite);
      CHECK(r.privacy_used == (suite.mode != CipherMode::MacOnly));
    }
  }
}

TEST_CASE("wire sizes follow the layout arithmetic") {
  KeyMaterial keys = test_keys();

  // 20-byte header + 7-byte reading + 32-byte HMAC-SHA-256 tag.
  Bytes mac_only = seal(keys, 0, 1, 1, kClassTemperature, kPublic,
                        {CipherMode::MacOnly, MacVariant::HmacSha256}, to_bytes("t=24.50"));
  CHECK(mac_only.size() == 59);

  // 20 + 16 IV + 528 padded payload + 32 tag.
  Bytes cbc = seal(keys, 0, 1, 2, kClassSessionKeys, kPrivate,
                   {CipherMode::Cbc, MacVariant::HmacSha256}, Bytes(512, 0xAB));
  CHECK(cbc.size() == 596);

  for (Suite suite : all_suites()) {
    for (std::size_t n : {std::size_t{0}, std::size_t{7}, std::size_t{16}, std::size_t{100}}) {
      Bytes wire = seal(keys, 0, 1, 3, 9, decision_for(suite), suite, Bytes(n, 0x5A));
      std::size_t payload = suite.mode == CipherMode::Cbc ? n + 16 - n % 16 : n;
      std::size_t expect = kHeaderLen + (has_iv(suite.mode) ? kIvLen : 0) + payload +
                           tag_length(suite.mac);
      CAPTURE(suite_name(suite), n);
      CHECK(wire.size() == expect);
      CHECK(decode(wire).header.payload_len == payload);
    }
  }
}

TEST_CASE("plaintext size limit is enforced") {
  KeyMaterial keys = test_keys();
  Suite mac_only{CipherMode::MacOnly, MacVariant::HmacSha256};
  Suite cbc{CipherMode::Cbc, MacVariant::HmacSha256};
  CHECK_NOTHROW(seal(keys, 0, 1, 1, 9, kPublic, mac_only, Bytes(kMaxPlaintext, 0)));
  // The padded CBC payload at the limit still fits the 16-bit length field.
  Bytes wire = seal(keys, 0, 1, 1, 9, kPrivate, cbc, Bytes(kMaxPlaintext, 0));
  CHECK(decode(wire).header.payload_len == 65520);
  try {
    seal(keys, 0, 1, 1, 9, kPublic, mac_only, Bytes(kMaxPlaintext + 1, 0));
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
  }
}

TEST_CASE("suite choice must match the privacy decision") {
  KeyMaterial keys = test_keys();
  auto kind_of = [&](PrivacyDecision d, Suite s) {
    try {
      seal(keys, 0, 1, 1, 9, d, s, to_bytes("x"));
      return ErrorKind::Io;  // placeholder for "no error"
    } catch (const Error& e) {
      return e.kind();
    }
  };
  CHECK(kind_of(kPrivate, {CipherMode::MacOnly, MacVariant::HmacSha256}) == ErrorKind::Policy);
  CHECK(kind_of(kPublic, {CipherMode::Gcm, MacVariant::GcmTag}) == ErrorKind::Policy);
  CHECK(kind_of(kPublic, {CipherMode::Cbc, MacVariant::HmacSha512}) == ErrorKind::Policy);
}

TEST_CASE("MAC-only payload rides in clear; encrypted payloads do not") {
  KeyMaterial keys = test_keys();
  Bytes pt = to_bytes("temperature=24.37 C padded until it spans blocks....");

  Bytes wire = seal(keys, 0, 1, 1, 9, kPublic, {CipherMode::MacOnly, MacVariant::HmacSha256}, pt);
  Bytes visible(wire.begin() + kHeaderLen, wire.begin() + kHeaderLen + pt.size());
  CHECK(visible == pt);

  for (Suite s : all_suites()) {
    if (s.mode == CipherMode::MacOnly) continue;
    Bytes private_wire = seal(keys, 0, 1, 1, 9, kPrivate, s, pt);
    Envelope e = decode(private_wire);
    Bytes prefix(e.payload.begin(), e.payload.begin() + pt.size());
    CAPTURE(suite_name(s));
    CHECK(prefix != pt);
  }
}

TEST_CASE("fresh IV per message; override pins it for reproducibility") {
  KeyMaterial keys = test_keys();
  Suite ctr{CipherMode::Ctr, MacVariant::HmacSha256};
  Bytes a = seal(keys, 0, 1, 1, 9, kPrivate, ctr, to_bytes("hello"));
  Bytes b = seal(keys, 0, 1, 1, 9, kPrivate, ctr, to_bytes("hello"));
  CHECK(decode(a).iv != decode(b).iv);
  CHECK(a != b);

  Bytes iv = from_hex("0102030405060708090a0b0c0d0e0f10");
  Bytes c = seal(keys, 0, 1, 1, 9, kPrivate, ctr, to_bytes("hello"), iv);
  Bytes d = seal(keys, 0, 1, 1, 9, kPrivate, ctr, to_bytes("hello"), iv);
  CHECK(c == d);
  CHECK(decode(c).iv == iv);

  // GCM sealing draws only 12 nonce bytes; the tail stays zero on the wire.
  Bytes g = seal(keys, 0, 1, 1, 9, kPrivate, {CipherMode::Gcm, MacVariant::GcmTag},
                 to_bytes("hello"));
  Envelope ge = decode(g);
  for (std::size_t i = kGcmNonceLen; i < kIvLen; ++i) CHECK(ge.iv[i] == 0);
  Bytes bad_gcm_iv = iv;  // byte 15 nonzero
  CHECK_THROWS_AS(
      seal(keys, 0, 1, 1, 9, kPrivate, {CipherMode::Gcm, MacVariant::GcmTag},
           to_bytes("hello"), bad_gcm_iv),
      Error);
}

TEST_CASE("tampering anywhere is caught, sampled across suites") {
  KeyMaterial keys = fresh_key_material();
  std::mt19937_64 rng(99);
  for (Suite suite : all_suites()) {
    Bytes wire = seal(keys, 0, 7, 5, 9, decision_for(suite), suite, Bytes(48, 0x3C));
    for (int k = 0; k < 64; ++k) {
      Bytes mauled = wire;
      std::size_t bit = rng() % (mauled.size() * 8);
      mauled[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      ErrorKind kind = open_error(mauled, keys);
      CAPTURE(suite_name(suite), bit);
      CHECK((kind == ErrorKind::Auth || kind == ErrorKind::Format || kind == ErrorKind::Key));
    }
  }
}

TEST_CASE("header fields are bound to the tag") {
  KeyMaterial keys = test_keys();
  Bytes wire = seal(keys, 2, 7, 5, 9, kPublic, {CipherMode::MacOnly, MacVariant::HmacSha256},
                    to_bytes("reading"));

  Bytes sender_swap = wire;
  sender_swap[7] ^= 0x01;  // sender_id low byte
  CHECK(open_error(sender_swap, keys) == ErrorKind::Auth);

  Bytes class_swap = wire;
  class_swap[8] ^= 0x01;
  CHECK(open_error(class_swap, keys) == ErrorKind::Auth);

  Bytes seq_swap = wire;
  seq_swap[17] ^= 0x01;  // sequence low byte
  CHECK(open_error(seq_swap, keys) == ErrorKind::Auth);

  // Epoch flips change which key the receiver looks up. With a single-epoch
  // lookup the result is a Key error before any MAC work.
  Bytes epoch_swap = wire;
  epoch_swap[9] ^= 0x01;
  ReplayWindow w;
  auto strict = [&](std::uint32_t, std::uint8_t epoch) -> const KeyMaterial* {
    return epoch == 2 ? &keys : nullptr;
  };
  try {
    paysec::open(strict, w, epoch_swap);
    FAIL("expected key error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Key);
  }
}

TEST_CASE("wrong keys fail closed") {
  KeyMaterial alice = fresh_key_material();
  KeyMaterial mallory = fresh_key_material();
  for (Suite suite : {Suite{CipherMode::MacOnly, MacVariant::HmacSha256},
                      Suite{CipherMode::Gcm, MacVariant::GcmTag},
                      Suite{CipherMode::Cbc, MacVariant::HmacSha384}}) {
    Bytes wire = seal(alice, 0, 1, 1, 9, decision_for(suite), suite, to_bytes("secret"));
    CHECK(open_error(wire, mallory) == ErrorKind::Auth);
  }

  KeyMaterial nobody = test_keys();
  ReplayWindow w;
  auto unknown = [](std::uint32_t, std::uint8_t) -> const KeyMaterial* { return nullptr; };
  Bytes wire = seal(nobody, 0, 1, 1, 9, kPublic,
                    {CipherMode::MacOnly, MacVariant::HmacSha256}, to_bytes("x"));
  try {
    paysec::open(unknown, w, wire);
    FAIL("expected key error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Key);
    CHECK(std::string(e.what()).find("no key material for sender 1 epoch 0") !=
          std::string::npos);
  }
}

TEST_CASE("degenerate key material is refused") {
  KeyMaterial k;
  k.enc_key = Bytes(16, 1);
  k.mac_key = Bytes(31, 2);
  CHECK_THROWS_AS(validate_keys(k), Error);
  k.mac_key = Bytes(32, 2);
  CHECK_NOTHROW(validate_keys(k));
  std::copy(k.enc_key.begin(), k.enc_key.end(), k.mac_key.begin());
  CHECK_THROWS_AS(validate_keys(k), Error);
  k.enc_key.resize(15);
  CHECK_THROWS_AS(validate_keys(k), Error);

  KeyMaterial fresh = fresh_key_material();
  CHECK_NOTHROW(validate_keys(fresh));
  CHECK(fresh.enc_key.size() == 16);
  CHECK(fresh.mac_key.size() == 32);
}

TEST_CASE("replay window accepts, deduplicates, and ages out") {
  ReplayWindow w;
  CHECK(w.empty());
  CHECK(check_replay(w, 5) == ReplayWindow::Check::Accept);
  CHECK(check_replay(w, 5) == ReplayWindow::Check::Duplicate);
  CHECK(check_replay(w, 6) == ReplayWindow::Check::Accept);
  CHECK(check_replay(w, 4) == ReplayWindow::Check::Accept);  // out of order, in window
  CHECK(check_replay(w, 4) == ReplayWindow::Check::Duplicate);
  CHECK(w.highest_seen() == 6);

  CHECK(check_replay(w, 100) == ReplayWindow::Check::Accept);
  CHECK(check_replay(w, 36) == ReplayWindow::Check::Accept);     // exactly 64 behind
  CHECK(check_replay(w, 36) == ReplayWindow::Check::Duplicate);
  CHECK(check_replay(w, 35) == ReplayWindow::Check::Stale);      // 65 behind
  CHECK(check_replay(w, 6) == ReplayWindow::Check::Stale);       // seen long ago

  // A jump beyond the span clears the bitmap but keeps rejecting the past.
  ReplayWindow far;
  CHECK(check_replay(far, 1) == ReplayWindow::Check::Accept);
  CHECK(check_replay(far, 65) == ReplayWindow::Check::Accept);   // shift == span
  CHECK(check_replay(far, 1) == ReplayWindow::Check::Duplicate); // still remembered
  ReplayWindow beyond;
  CHECK(check_replay(beyond, 1) == ReplayWindow::Check::Accept);
  CHECK(check_replay(beyond, 66) == ReplayWindow::Check::Accept);  // shift == span + 1
  CHECK(check_replay(beyond, 1) == ReplayWindow::Check::Stale);
  CHECK(check_replay(beyond, 2) == ReplayWindow::Check::Accept);   // exactly 64 behind, unseen
}

TEST_CASE("replay window property: any permutation admits each sequence once") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::uint64_t> seqs(ReplayWindow::kSpan);
    std::iota(seqs.begin(), seqs.end(), 1);
    std::shuffle(seqs.begin(), seqs.end(), rng);

    // Duplicate a random subset to model a replaying adversary.
    std::vector<std::uint64_t> feed = seqs;
    for (std::uint64_t s : seqs)
      if (rng() % 3 == 0) feed.push_back(s);
    std::shuffle(feed.begin(), feed.end(), rng);

    ReplayWindow w;
    std::array<int, ReplayWindow::kSpan + 1> accepted{};
    int stale = 0;
    for (std::uint64_t s : feed) {
      switch (check_replay(w, s)) {
        case ReplayWindow::Check::Accept: accepted[s]++; break;
        case ReplayWindow::Check::Duplicate: break;
        case ReplayWindow::Check::Stale: stale++; break;
      }
    }
    // All 64 sequences fit one window span, so nothing can go stale and
    // every sequence is admitted exactly once no matter the arrival order.
    CHECK(stale == 0);
    for (std::size_t s = 1; s <= ReplayWindow::kSpan; ++s) {
      CAPTURE(trial, s);
      CHECK(accepted[s] == 1);
    }
  }
}

TEST_CASE("duplicate envelopes are rejected after the tag verifies") {
  KeyMaterial keys = test_keys();
  ReplayWindow w;
  auto lookup = [&](std::uint32_t, std::uint8_t) { return &keys; };
  Bytes wire = seal(keys, 0, 1, 10, 9, kPublic, {CipherMode::MacOnly, MacVariant::HmacSha256},
                    to_bytes("once"));
  CHECK_NOTHROW(paysec::open(lookup, w, wire));
  try {
    paysec::open(lookup, w, wire);
    FAIL("expected freshness error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Freshness);
    CHECK(std::string(e.what()).find("duplicate sequence 10") != std::string::npos);
  }

  // A tampered duplicate must report Auth: the tag check runs before the
  // freshness check, so an attacker cannot probe the window with forgeries.
  Bytes mauled = wire;
  mauled.back() ^= 0x01;
  CHECK(open_error(mauled, keys) == ErrorKind::Auth);

  // Far-behind sequences report stale.
  Bytes newer = seal(keys, 0, 1, 200, 9, kPublic,
                     {CipherMode::MacOnly, MacVariant::HmacSha256}, to_bytes("later"));
  CHECK_NOTHROW(paysec::open(lookup, w, newer));
  Bytes old = seal(keys, 0, 1, 3, 9, kPublic, {CipherMode::MacOnly, MacVariant::HmacSha256},
                   to_bytes("old"));
  try {
    paysec::open(lookup, w, old);
    FAIL("expected freshness error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Freshness);
    CHECK(std::string(e.what()).find("stale sequence 3") != std::string::npos);
  }
}

TEST_CASE("failed opens never advance the replay window") {
  KeyMaterial keys = test_keys();
  ReplayWindow w;
  auto lookup = [&](std::uint32_t, std::uint8_t) { return &keys; };

  Bytes wire = seal(keys, 0, 1, 77, 9, kPublic, {CipherMode::MacOnly, MacVariant::HmacSha256},
                    to_bytes("payload"));
  Bytes mauled = wire;
  mauled[kHeaderLen] ^= 0xFF;  // corrupt payload
  for (int i = 0; i < 3; ++i) CHECK_THROWS_AS(paysec::open(lookup, w, mauled), Error);
  CHECK(w.empty());

  // The genuine envelope with the same sequence still goes through.
  OpenResult r = paysec::open(lookup, w, wire);
  CHECK(r.header.sequence == 77);
  CHECK(w.highest_seen() == 77);
}
