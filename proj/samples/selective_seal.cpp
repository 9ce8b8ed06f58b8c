// SPDX-License-Identifier: Apache-2.0
//
// Selective payload security in one file: score each message class, then let
// that decision pick between a MAC-only envelope (cheap, payload visible) and
// a full AEAD envelope (payload hidden). Both ride the same wire format and
// both authenticate the entire header.
#include <iostream>

#include "paysec/paysec.hpp"

using namespace paysec;

int main() {
  PolicyTable policy = default_policy();

  std::cout << "message classes and their risk-driven decisions:\n";
  for (const MessageClassSpec& c : policy.classes()) {
    std::cout << "  " << c.name << ": score " << c.score.str() << " (" << to_string(c.band)
              << ") -> " << (c.requires_privacy ? "encrypt + MAC" : "MAC only") << "\n";
  }

  KeyMaterial keys = fresh_key_material();
  auto lookup = [&](std::uint32_t, std::uint8_t) { return &keys; };
  ReplayWindow window;

  // A temperature reading is public telemetry: integrity only.
  Bytes reading = format_reading("temperature", 24.37, "C");
  Bytes open_wire = seal(keys, /*epoch=*/0, /*sender=*/1, /*seq=*/1, kClassTemperature,
                         decide(policy, kClassTemperature),
                         {CipherMode::MacOnly, MacVariant::HmacSha256}, reading);

  // A valve command can reveal farm operations: full AEAD.
  Bytes command = to_bytes("valve=open;zone=3");
  Bytes private_wire = seal(keys, 0, 1, 2, kClassFarmControl, decide(policy, kClassFarmControl),
                            {CipherMode::Cbc, MacVariant::HmacSha256}, command);

  std::cout << "\nreading envelope:  " << open_wire.size() << " bytes ("
            << reading.size() << " B payload rides in clear)\n";
  std::cout << "command envelope:  " << private_wire.size() << " bytes (payload encrypted)\n";

  for (const Bytes* wire : {&open_wire, &private_wire}) {
    OpenResult r = open(lookup, window, *wire);
    std::cout << "opened class " << static_cast<int>(r.header.class_id) << ", privacy "
              << (r.privacy_used ? "on" : "off") << ", " << r.plaintext.size()
              << " plaintext bytes\n";
  }

  // The same bytes a second time are a replay, not a second reading.
  try {
    open(lookup, window, open_wire);
  } catch (const Error& e) {
    std::cout << "replayed envelope rejected: " << e.what() << "\n";
  }
  return 0;
}
