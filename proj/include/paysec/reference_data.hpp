// SPDX-License-Identifier: Apache-2.0
//
// Embedded reference measurements: per-operation timings (μs) and power
// draw (mW) for each security attribute at 64-byte and 512-byte inputs,
// captured on an ESP32-class microcontroller, plus the energy table (μJ)
// printed alongside them. The energy cells are retained verbatim — including
// one cell (AES128-CFB8 @ 512 B) that does not match its own timing × power
// recomputation — so report generation can flag the inconsistency instead of
// silently repairing it.
//
// Note on units: the source tables label energy as joules, but the
// arithmetic is μs × mW / 1000, which lands in MICROjoules; everything here
// reports μJ.
#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "paysec/energy.hpp"

namespace paysec {

struct ReferenceTables {
  std::map<AttributeSpec, Micros> timing_us;
  PowerModel power_mw;
  std::map<AttributeSpec, MicroJoules> printed_energy_uj;
  // CFB128 power is absent from the source power table; its 156 mW entry is
  // back-computed from the printed energy cells (18.876×1000/121 = 156.0 and
  // 54.6×1000/350 = 156.0) and flagged derived here.
  std::vector<AttributeSpec> derived_power_entries;
};

/// The nine benchmarked attributes at one input size, in table order:
/// four integrity-only HMACs, then the five AEAD compositions.
inline std::vector<AttributeSpec> benchmark_attributes(std::size_t size) {
  return {
      integrity_attr(MacVariant::HmacSha224, size),
      integrity_attr(MacVariant::HmacSha256, size),
      integrity_attr(MacVariant::HmacSha384, size),
      integrity_attr(MacVariant::HmacSha512, size),
      aead_attr(CipherMode::Gcm, MacVariant::GcmTag, size),
      aead_attr(CipherMode::Cbc, MacVariant::HmacSha256, size),
      aead_attr(CipherMode::Ctr, MacVariant::HmacSha256, size),
      aead_attr(CipherMode::Cfb8, MacVariant::HmacSha256, size),
      aead_attr(CipherMode::Cfb128, MacVariant::HmacSha256, size),
  };
}

inline const std::vector<std::size_t>& reference_sizes() {
  static const std::vector<std::size_t> sizes{64, 512};
  return sizes;
}

inline const ReferenceTables& reference_tables() {
  static const ReferenceTables tables = [] {
    ReferenceTables t;
    auto us = [](const char* s) { return Micros::parse(s); };
    auto mw = [](const char* s) { return Milliwatts::parse(s); };
    auto uj = [](const char* s) { return MicroJoules::parse(s); };
    struct Row {
      AttributeSpec a64, a512;
      const char *t64, *t512, *p64, *p512, *e64, *e512;
    };
    auto integ = [](MacVariant m, std::size_t n) { return integrity_attr(m, n); };
    auto aead = [](CipherMode c, MacVariant m, std::size_t n) { return aead_attr(c, m, n); };
    const Row rows[] = {
        // attribute            time64  time512  pw64   pw512  energy64  energy512
        {integ(MacVariant::HmacSha224, 64), integ(MacVariant::HmacSha224, 512),
         "150", "403", "156", "157", "23.4", "63.271"},
        {integ(MacVariant::HmacSha256, 64), integ(MacVariant::HmacSha256, 512),
         "91", "163", "155", "155", "14.105", "25.265"},
        {integ(MacVariant::HmacSha384, 64), integ(MacVariant::HmacSha384, 512),
         "102", "165", "156", "157", "15.912", "25.905"},
        {integ(MacVariant::HmacSha512, 64), integ(MacVariant::HmacSha512, 512),
         "105", "167", "154", "154", "16.17", "25.718"},
        {aead(CipherMode::Gcm, MacVariant::GcmTag, 64), aead(CipherMode::Gcm, MacVariant::GcmTag, 512),
         "178", "856", "158", "158", "28.124", "135.248"},
        {aead(CipherMode::Cbc, MacVariant::HmacSha256, 64), aead(CipherMode::Cbc, MacVariant::HmacSha256, 512),
         "124", "276", "155", "155", "19.22", "42.78"},
        {aead(CipherMode::Ctr, MacVariant::HmacSha256, 64), aead(CipherMode::Ctr, MacVariant::HmacSha256, 512),
         "123", "352", "155", "155", "19.065", "54.56"},
        // The 512-byte CFB8 energy cell is inconsistent with its own inputs
        // (1782 × 155 / 1000 = 276.21, printed 121.21); kept verbatim.
        {aead(CipherMode::Cfb8, MacVariant::HmacSha256, 64), aead(CipherMode::Cfb8, MacVariant::HmacSha256, 512),
         "303", "1782", "155", "155", "46.965", "121.21"},
        {aead(CipherMode::Cfb128, MacVariant::HmacSha256, 64), aead(CipherMode::Cfb128, MacVariant::HmacSha256, 512),
         "121", "350", "156", "156", "18.876", "54.6"},
    };
    for (const Row& r : rows) {
      t.timing_us[r.a64] = us(r.t64);
      t.timing_us[r.a512] = us(r.t512);
      t.power_mw[r.a64] = mw(r.p64);
      t.power_mw[r.a512] = mw(r.p512);
      t.printed_energy_uj[r.a64] = uj(r.e64);
      t.printed_energy_uj[r.a512] = uj(r.e512);
    }
    t.derived_power_entries = {aead(CipherMode::Cfb128, MacVariant::HmacSha256, 64),
                               aead(CipherMode::Cfb128, MacVariant::HmacSha256, 512)};
    return t;
  }();
  return tables;
}

/// Reference timings wrapped as TimingSamples (dispersion unknown → 0).
inline std::vector<TimingSample> reference_timing_samples() {
  std::vector<TimingSample> out;
  for (std::size_t size : reference_sizes()) {
    for (const AttributeSpec& a : benchmark_attributes(size)) {
      TimingSample s;
      s.attribute = a;
      s.per_op_micros = reference_tables().timing_us.at(a);
      s.iteration_counts = {10000, 20000, 30000, 40000};
      s.dispersion = Percent::from_units(0);
      out.push_back(std::move(s));
    }
  }
  return out;
}

inline const PowerModel& reference_power_model() { return reference_tables().power_mw; }

// Model costs the simulator bills per sealed message, straight from the
// reference energy cells.
inline MicroJoules reference_energy(const AttributeSpec& a) {
  auto it = reference_tables().printed_energy_uj.find(a);
  if (it == reference_tables().printed_energy_uj.end())
    throw Error(ErrorKind::Validation, "no reference energy for " + attribute_label(a));
  return it->second;
}

}  // namespace paysec
