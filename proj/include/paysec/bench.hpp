// SPDX-License-Identifier: Apache-2.0
//
// Host timing harness. Each attribute runs in a tight loop over fixed-pattern
// buffers at several iteration counts; the per-operation time is the mean of
// the per-count averages and the spread across counts is recorded. The clock
// is a template parameter so the granularity guard is testable with a fake.
//
// Only the cryptographic work sits between the two clock reads — buffer
// preparation and result formatting are outside the timed region.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "paysec/crypto.hpp"
#include "paysec/energy.hpp"
#include "paysec/errors.hpp"
#include "paysec/reference_data.hpp"

namespace paysec {

inline const std::vector<std::uint64_t>& default_iteration_counts() {
  static const std::vector<std::uint64_t> counts{10000, 20000, 30000, 40000};
  return counts;
}

/// Smallest observable positive step of Clock::now().
template <typename Clock>
typename Clock::duration measure_granularity() {
  typename Clock::duration best = Clock::duration::max();
  for (int i = 0; i < 8; ++i) {
    auto t0 = Clock::now();
    auto t1 = Clock::now();
    while (t1 == t0) t1 = Clock::now();
    best = std::min(best, t1 - t0);
  }
  return best;
}

namespace detail {

/// Deterministic non-trivial fill so repeated runs hash identical bytes.
inline Bytes patterned(std::size_t n, std::uint8_t seed) {
  Bytes out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = static_cast<std::uint8_t>(seed + 37 * i + (i >> 5));
  return out;
}

/// One-operation closure for an attribute, over preallocated buffers.
inline std::function<std::uint8_t()> attribute_op(const AttributeSpec& spec) {
  validate(spec);
  auto input = std::make_shared<Bytes>(patterned(spec.input_size, 0x41));
  auto enc_key = std::make_shared<Bytes>(patterned(kAesKeyLen, 0x2B));
  auto mac_key = std::make_shared<Bytes>(patterned(32, 0x0B));
  auto iv = std::make_shared<Bytes>(patterned(kIvLen, 0xA5));

  if (spec.kind == AttributeSpec::Kind::IntegrityOnly) {
    MacVariant mac = spec.mac;
    return [=]() { return hmac(mac, *mac_key, *input)[0]; };
  }
  if (spec.mode == CipherMode::Gcm) {
    auto nonce = std::make_shared<Bytes>(iv->begin(), iv->begin() + kGcmNonceLen);
    return [=]() { return gcm_seal(*enc_key, *nonce, {}, *input).tag[0]; };
  }
  // Encrypt-then-MAC composition: cipher the input, then HMAC over IV‖ciphertext.
  CipherMode mode = spec.mode;
  MacVariant mac = spec.mac;
  auto work = std::make_shared<Bytes>(mode == CipherMode::Cbc ? pkcs7_pad(*input) : *input);
  auto mac_in = std::make_shared<Bytes>(kIvLen + work->size());
  std::copy(iv->begin(), iv->end(), mac_in->begin());
  return [=]() {
    Bytes ct = aes128_encrypt(mode, *enc_key, *iv, *work);
    std::copy(ct.begin(), ct.end(), mac_in->begin() + kIvLen);
    return hmac(mac, *mac_key, *mac_in)[0];
  };
}

}  // namespace detail

/// Times one attribute at each iteration count. Counts below 1000 or batches
/// too short for the clock to resolve are measurement errors, not numbers.
template <typename Clock = std::chrono::steady_clock>
TimingSample bench_attribute(const AttributeSpec& spec,
                             const std::vector<std::uint64_t>& counts = default_iteration_counts()) {
  if (counts.empty()) throw Error(ErrorKind::Measurement, "no iteration counts given");
  for (std::uint64_t c : counts)
    if (c < 1000)
      throw Error(ErrorKind::Measurement,
                  "iteration count " + std::to_string(c) + " is below the floor of 1000");

  auto op = detail::attribute_op(spec);
  typename Clock::duration granularity = measure_granularity<Clock>();

  std::vector<double> averages;
  volatile std::uint8_t sink = 0;
  for (std::uint64_t count : counts) {
    auto t0 = Clock::now();
    for (std::uint64_t i = 0; i < count; ++i) sink = static_cast<std::uint8_t>(sink ^ op());
    auto t1 = Clock::now();
    auto elapsed = t1 - t0;
    if (elapsed < granularity * 100)
      throw Error(ErrorKind::Measurement,
                  "batch too short for the clock: elapsed under 100x timer granularity");
    double micros = std::chrono::duration<double, std::micro>(elapsed).count();
    averages.push_back(micros / static_cast<double>(count));
  }
  (void)sink;

  double mean = 0;
  for (double a : averages) mean += a;
  mean /= static_cast<double>(averages.size());
  double var = 0;
  for (double a : averages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(averages.size());
  double rel_stddev_pct = mean > 0 ? 100.0 * std::sqrt(var) / mean : 0.0;

  TimingSample s;
  s.attribute = spec;
  s.per_op_micros = Micros::from_double(mean);
  if (!s.per_op_micros.positive())
    throw Error(ErrorKind::Measurement, "per-op time rounds to zero at this clock resolution");
  s.iteration_counts = counts;
  s.dispersion = Percent::from_double(rel_stddev_pct);
  return s;
}

/// The full reference attribute grid (four HMACs, five AEADs) at each size.
template <typename Clock = std::chrono::steady_clock>
std::vector<TimingSample> run_benchmarks(
    const std::vector<std::size_t>& sizes,
    const std::vector<std::uint64_t>& counts = default_iteration_counts()) {
  if (sizes.empty()) throw Error(ErrorKind::Measurement, "no input sizes given");
  std::vector<TimingSample> out;
  for (std::size_t size : sizes)
    for (const AttributeSpec& a : benchmark_attributes(size))
      out.push_back(bench_attribute<Clock>(a, counts));
  return out;
}

}  // namespace paysec
