// SPDX-License-Identifier: Apache-2.0
//
// Key rotation without losing a message: the edge seals next-epoch keys under
// the current epoch, the gateway keeps both epochs until the new one carries
// verified traffic, then retires the old one (make-before-break).
#include <iostream>

#include "paysec/paysec.hpp"

using namespace paysec;

int main() {
  PolicyTable policy = default_policy();
  const std::uint32_t sender = 42;

  // Edge side: epoch-0 session. Gateway side: provisioned with the same keys.
  SessionKeys session = generate_session_keys(/*epoch=*/0, /*now=*/0);
  KeyStore gateway;
  gateway.install({sender, 0, session.keys, 0});
  ReplayWindow window;
  std::uint64_t seq = 0;

  auto send_reading = [&](double value) {
    Bytes wire = seal(session.keys, session.epoch, sender, ++seq, kClassTemperature,
                      decide(policy, kClassTemperature),
                      {CipherMode::MacOnly, MacVariant::HmacSha256},
                      format_reading("temperature", value, "C"));
    OpenResult r = open(gateway.lookup_fn(), window, wire);
    gateway.note_success(sender, r.header.key_epoch);
    std::cout << "reading under epoch " << static_cast<int>(r.header.key_epoch)
              << " accepted (seq " << r.header.sequence << ")\n";
  };

  send_reading(21.5);

  for (int round = 1; round <= 3; ++round) {
    // Edge mints the next epoch and ships it sealed under the current one.
    SessionKeys next = rotate_session(session, round);
    Bytes rekey_wire = build_rekey_envelope(session, next, sender, ++seq, policy);
    session = next;  // the edge switches immediately

    std::uint8_t installed = apply_rekey(gateway, window, rekey_wire, round);
    std::cout << "gateway installed epoch " << static_cast<int>(installed) << " ("
              << gateway.epoch_count(sender) << " epochs held)\n";

    // First verified message under the new epoch retires the old keys.
    send_reading(21.5 + round);
    gateway.note_success(sender, session.epoch);
    std::cout << "old epoch retired (" << gateway.epoch_count(sender) << " epoch held)\n";
  }

  // Key material never travels MAC-only; the library refuses to build it.
  try {
    SessionKeys next = rotate_session(session, 99);
    build_rekey_envelope(session, next, sender, ++seq, policy,
                         {CipherMode::MacOnly, MacVariant::HmacSha256});
  } catch (const Error& e) {
    std::cout << "MAC-only rekey refused: " << e.what() << "\n";
  }
  return 0;
}
