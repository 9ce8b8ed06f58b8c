// SPDX-License-Identifier: Apache-2.0
//
// paysec — command-line front end for the payload-security toolkit.
//
// Exit codes are a machine contract:
//   0 success          4 authentication / unknown key
//   1 I/O or entropy   5 freshness (replay)
//   2 usage/validation 6 policy violation / protocol error
//   3 format           7 measurement
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "paysec/paysec.hpp"

namespace {

using paysec::Bytes;
using paysec::Error;
using paysec::ErrorKind;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage:
    case ErrorKind::Validation: return 2;
    case ErrorKind::Format: return 3;
    case ErrorKind::Auth:
    case ErrorKind::Key: return 4;
    case ErrorKind::Freshness: return 5;
    case ErrorKind::Policy: return 6;
    case ErrorKind::Measurement: return 7;
    case ErrorKind::Io:
    case ErrorKind::Entropy: return 1;
  }
  return 1;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "cannot read " + path);
  return ss.str();
}

Bytes read_binary_file(const std::string& path) {
  std::string text = read_text_file(path);
  return Bytes(text.begin(), text.end());
}

/// Never leaves a partial file behind: write a sibling temp file, then rename.
void write_file_atomic(const std::string& path, const void* data, std::size_t len) {
  std::string tmp = path + ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot create " + tmp);
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot move " + tmp + " to " + path);
  }
}

void write_file_atomic(const std::string& path, const std::string& text) {
  write_file_atomic(path, text.data(), text.size());
}

void write_file_atomic(const std::string& path, const Bytes& bytes) {
  write_file_atomic(path, bytes.data(), bytes.size());
}

std::uint32_t pick_sender(const paysec::KeyStore& store, std::optional<std::uint32_t> requested) {
  if (requested) {
    if (store.newest(*requested) == nullptr)
      throw Error(ErrorKind::Key, "no keys for sender " + std::to_string(*requested));
    return *requested;
  }
  auto senders = store.senders();
  if (senders.size() == 1) return senders.front();
  throw Error(ErrorKind::Usage,
              senders.empty() ? "key store is empty"
                              : "key store holds several senders; pass --sender");
}

// --- Subcommand payloads ------------------------------------------------------

struct PolicyScoreArgs {
  int sensitivity = 0;
  int vulnerability = 0;
  int impact = 0;
};

void run_policy_score(const PolicyScoreArgs& a) {
  paysec::RiskScore score =
      paysec::score_risk({a.sensitivity, a.vulnerability, a.impact});
  std::cout << score.str() << " " << paysec::to_string(paysec::band_of(score)) << "\n";
}

void run_policy_check(const std::string& path) {
  paysec::PolicyTable table = paysec::load_policy(read_text_file(path));
  for (const auto& c : table.classes()) {
    std::cout << "class " << static_cast<int>(c.class_id) << " " << c.name << " ("
              << paysec::to_string(c.direction) << ") factors=(" << c.factors.sensitivity << ","
              << c.factors.vulnerability << "," << c.factors.impact << ") -> " << c.score.str()
              << " " << paysec::to_string(c.band)
              << (c.requires_privacy ? " [privacy required]" : " [integrity only]") << "\n";
  }
  std::cout << "OK: " << table.classes().size() << " classes\n";
}

struct KeygenArgs {
  std::uint32_t sender = 1;
  std::string out;
  std::optional<std::int64_t> now;
};

void run_keygen(const KeygenArgs& a) {
  if (std::filesystem::exists(a.out))
    throw Error(ErrorKind::Validation, "refusing to overwrite existing " + a.out);
  std::int64_t now = a.now ? *a.now : static_cast<std::int64_t>(std::time(nullptr));
  paysec::KeyStore store;
  store.install(paysec::KeyRecord{a.sender, 0, paysec::fresh_key_material(), now});
  write_file_atomic(a.out, paysec::serialize(store));
  std::cout << "created " << a.out << " with epoch-0 keys for sender " << a.sender << "\n";
}

struct SealArgs {
  std::string suite;
  std::string keys_path;
  int class_id = 0;
  std::uint64_t sequence = 0;
  std::string in_path;
  std::string out_path;
  std::optional<std::uint32_t> sender;
  std::optional<int> epoch;
  std::string policy_path;
  std::string iv_hex;
};

void run_seal(const SealArgs& a) {
  paysec::Suite suite = paysec::parse_suite_name(a.suite);
  paysec::KeyStore store = paysec::load_key_store(read_text_file(a.keys_path));
  std::uint32_t sender = pick_sender(store, a.sender);
  std::uint8_t epoch = a.epoch ? static_cast<std::uint8_t>(*a.epoch)
                               : store.newest(sender)->epoch;
  const paysec::KeyMaterial* keys = store.find(sender, epoch);
  if (keys == nullptr)
    throw Error(ErrorKind::Key, "no keys for sender " + std::to_string(sender) + " epoch " +
                                    std::to_string(epoch));
  paysec::PolicyTable policy =
      a.policy_path.empty() ? paysec::default_policy() : paysec::load_policy(read_text_file(a.policy_path));
  paysec::PrivacyDecision decision =
      paysec::decide(policy, static_cast<std::uint8_t>(a.class_id));
  Bytes plaintext = read_binary_file(a.in_path);
  Bytes iv = a.iv_hex.empty() ? Bytes{} : paysec::from_hex(a.iv_hex);
  Bytes wire = paysec::seal(*keys, epoch, sender, a.sequence,
                            static_cast<std::uint8_t>(a.class_id), decision, suite, plaintext, iv);
  write_file_atomic(a.out_path, wire);
  std::cout << "sealed " << wire.size() << " bytes (suite " << paysec::suite_name(suite)
            << ", class " << a.class_id << ", seq " << a.sequence << ", epoch "
            << static_cast<int>(epoch) << ")\n";
}

struct OpenArgs {
  std::string keys_path;
  std::string in_path;
};

void run_open(const OpenArgs& a) {
  paysec::KeyStore store = paysec::load_key_store(read_text_file(a.keys_path));
  Bytes wire = read_binary_file(a.in_path);
  paysec::ReplayWindow window;
  paysec::OpenResult r = paysec::open(store.lookup_fn(), window, wire);
  paysec::PolicyTable policy = paysec::default_policy();
  const paysec::MessageClassSpec* spec = policy.find(r.header.class_id);
  std::cout << "class: " << static_cast<int>(r.header.class_id);
  if (spec != nullptr) std::cout << " (" << spec->name << ")";
  std::cout << "\nprivacy: " << (r.privacy_used ? "true" : "false") << "\nsender: "
            << r.header.sender_id << " epoch: " << static_cast<int>(r.header.key_epoch)
            << " seq: " << r.header.sequence << "\nplaintext (" << r.plaintext.size()
            << " bytes):\n";
  std::cout.write(reinterpret_cast<const char*>(r.plaintext.data()),
                  static_cast<std::streamsize>(r.plaintext.size()));
  std::cout << "\n";
}

struct RekeyArgs {
  std::string keys_path;
  std::string out_path;
  std::optional<std::uint32_t> sender;
  std::optional<std::uint64_t> sequence;
  std::optional<std::int64_t> now;
};

void run_rekey(const RekeyArgs& a) {
  paysec::KeyStore store = paysec::load_key_store(read_text_file(a.keys_path));
  std::uint32_t sender = pick_sender(store, a.sender);
  const paysec::KeyRecord* rec = store.newest(sender);
  std::int64_t now = a.now ? *a.now : static_cast<std::int64_t>(std::time(nullptr));
  // Sequence numbers are not persisted in the key store; default to the clock
  // so successive invocations keep increasing.
  std::uint64_t seq = a.sequence ? *a.sequence : static_cast<std::uint64_t>(now);

  paysec::SessionKeys current;
  current.keys = rec->keys;
  current.epoch = rec->epoch;
  current.created_at = rec->created_at;
  paysec::SessionKeys next = paysec::rotate_session(current, now);

  Bytes wire =
      paysec::build_rekey_envelope(current, next, sender, seq, paysec::default_policy());
  store.install(paysec::KeyRecord{sender, next.epoch, next.keys, now});
  // The sender must know the new keys before the envelope can exist anywhere.
  write_file_atomic(a.keys_path, paysec::serialize(store));
  write_file_atomic(a.out_path, wire);
  std::cout << "rotated sender " << sender << " to epoch " << static_cast<int>(next.epoch)
            << "; rekey envelope is " << wire.size() << " bytes\n";
}

struct RekeyApplyArgs {
  std::string keys_path;
  std::string in_path;
  std::optional<std::int64_t> now;
};

void run_rekey_apply(const RekeyApplyArgs& a) {
  paysec::KeyStore store = paysec::load_key_store(read_text_file(a.keys_path));
  Bytes wire = read_binary_file(a.in_path);
  std::int64_t now = a.now ? *a.now : static_cast<std::int64_t>(std::time(nullptr));
  paysec::ReplayWindow window;
  std::uint8_t new_epoch = paysec::apply_rekey(store, window, wire, now);
  write_file_atomic(a.keys_path, paysec::serialize(store));
  paysec::Envelope e = paysec::decode(wire);
  std::cout << "installed epoch " << static_cast<int>(new_epoch) << " for sender "
            << e.header.sender_id << "\n";
}

struct BenchArgs {
  std::vector<std::size_t> sizes{64, 512};
  std::vector<std::uint64_t> iterations;
  std::string out_path;
};

void run_bench(const BenchArgs& a) {
  std::vector<std::uint64_t> counts =
      a.iterations.empty() ? paysec::default_iteration_counts() : a.iterations;
  std::vector<paysec::TimingSample> samples;
  for (std::size_t size : a.sizes) {
    for (const paysec::AttributeSpec& attr : paysec::benchmark_attributes(size)) {
      paysec::TimingSample s = paysec::bench_attribute(attr, counts);
      std::cerr << paysec::attribute_label(s.attribute) << ": " << s.per_op_micros.str()
                << " us/op (dispersion " << s.dispersion.str() << "%)\n";
      samples.push_back(std::move(s));
    }
  }
  write_file_atomic(a.out_path, paysec::serialize_timings(samples, paysec::kProvenanceMeasured));
  std::cout << "wrote " << samples.size() << " timing samples to " << a.out_path << "\n";
}

struct ReportArgs {
  std::string timings = "reference";
  std::string power = "reference";
  std::string out_path;
};

bool is_reference_sentinel(const std::string& v) {
  // "reference" is canonical; "paper" is accepted as a convenience alias.
  return v == "reference" || v == "paper";
}

void run_report(const ReportArgs& a) {
  std::vector<paysec::TimingSample> samples;
  std::string provenance = paysec::kProvenanceReference;
  if (is_reference_sentinel(a.timings)) {
    samples = paysec::reference_timing_samples();
  } else {
    auto loaded = paysec::load_timings(read_text_file(a.timings));
    samples = std::move(loaded.first);
    provenance = loaded.second;
  }
  paysec::PowerModel power = is_reference_sentinel(a.power)
                                 ? paysec::reference_power_model()
                                 : paysec::load_power(read_text_file(a.power));
  paysec::EnergyReport report = paysec::build_report(samples, power, provenance);
  if (!a.out_path.empty()) write_file_atomic(a.out_path, paysec::serialize(report));
  std::cout << paysec::render_text(report);
}

struct SimulateArgs {
  paysec::SimConfig config;
  std::string transport = "loopback";
  std::string out_path;
};

void run_simulate(SimulateArgs& a) {
  if (a.transport == "udp")
    a.config.transport = paysec::TransportKind::Udp;
  else if (a.transport == "loopback")
    a.config.transport = paysec::TransportKind::Loopback;
  else
    throw Error(ErrorKind::Usage, "unknown transport: " + a.transport);
  paysec::SimReport report = paysec::run_simulation(a.config);
  if (!a.out_path.empty()) write_file_atomic(a.out_path, paysec::serialize(report));
  std::cout << "sent " << report.sent << ", dropped " << report.dropped << ", delivered "
            << report.delivered << "\n"
            << "accepted " << report.gateway.accepted << ", tampered " << report.gateway.tampered
            << ", replayed " << report.gateway.replayed << ", format errors "
            << report.gateway.format_errors << "\n"
            << "model energy " << report.model_energy_uj.str() << " uJ vs all-GCM "
            << report.counterfactual_gcm_uj.str() << " uJ -> savings " << report.savings.str()
            << "%\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"paysec — selective payload security for constrained telemetry"};
  app.set_version_flag("--version",
                       std::string("paysec ") + PAYSEC_VERSION_STR + " (wire format 0x01)");
  app.require_subcommand(1);

  // policy
  auto* policy = app.add_subcommand("policy", "Risk scoring and policy files");
  policy->require_subcommand(1);
  PolicyScoreArgs score_args;
  auto* score = policy->add_subcommand("score", "Score one (sensitivity, vulnerability, impact)");
  score->add_option("--sensitivity", score_args.sensitivity, "Sensitivity level 0-3")->required();
  score->add_option("--vulnerability", score_args.vulnerability, "Vulnerability level 0-3")
      ->required();
  score->add_option("--impact", score_args.impact, "Impact level 0-3")->required();
  score->callback([&] { run_policy_score(score_args); });

  std::string policy_check_path;
  auto* check = policy->add_subcommand("check", "Validate a policy document");
  check->add_option("file", policy_check_path, "Policy JSON file")->required();
  check->callback([&] { run_policy_check(policy_check_path); });

  // keygen
  KeygenArgs keygen_args;
  auto* keygen = app.add_subcommand("keygen", "Create a key store with fresh epoch-0 keys");
  keygen->add_option("--sender", keygen_args.sender, "Sender id")->required();
  keygen->add_option("--out", keygen_args.out, "Key store file to create")->required();
  std::int64_t keygen_now = 0;
  auto* keygen_now_opt = keygen->add_option("--now", keygen_now, "Timestamp override (unix s)");
  keygen->callback([&] {
    if (*keygen_now_opt) keygen_args.now = keygen_now;
    run_keygen(keygen_args);
  });

  // seal
  SealArgs seal_args;
  auto* seal = app.add_subcommand("seal", "Seal a plaintext file into an envelope");
  seal->add_option("--suite", seal_args.suite,
                   "Suite name, e.g. mac-only-sha256, cbc-hmac-sha256, gcm")
      ->required();
  seal->add_option("--keys", seal_args.keys_path, "Key store file")->required();
  seal->add_option("--class", seal_args.class_id, "Message class id")
      ->required()
      ->check(CLI::Range(0, 255));
  seal->add_option("--seq", seal_args.sequence, "Sequence number")->required();
  seal->add_option("--in", seal_args.in_path, "Plaintext input file")->required();
  seal->add_option("--out", seal_args.out_path, "Envelope output file")->required();
  std::uint32_t seal_sender = 0;
  auto* seal_sender_opt = seal->add_option("--sender", seal_sender, "Sender id");
  int seal_epoch = 0;
  auto* seal_epoch_opt =
      seal->add_option("--epoch", seal_epoch, "Key epoch (default: newest)")->check(CLI::Range(0, 255));
  seal->add_option("--policy", seal_args.policy_path, "Policy JSON (default: built-in)");
  seal->add_option("--iv", seal_args.iv_hex, "Fixed IV as hex (reproducible runs)");
  seal->callback([&] {
    if (*seal_sender_opt) seal_args.sender = seal_sender;
    if (*seal_epoch_opt) seal_args.epoch = seal_epoch;
    run_seal(seal_args);
  });

  // open
  OpenArgs open_args;
  auto* open_cmd = app.add_subcommand("open", "Verify and open an envelope");
  open_cmd->add_option("--keys", open_args.keys_path, "Key store file")->required();
  open_cmd->add_option("--in", open_args.in_path, "Envelope input file")->required();
  open_cmd->callback([&] { run_open(open_args); });

  // rekey
  RekeyArgs rekey_args;
  auto* rekey = app.add_subcommand("rekey", "Rotate to fresh keys and emit the rekey envelope");
  rekey->add_option("--keys", rekey_args.keys_path, "Key store file (updated in place)")
      ->required();
  rekey->add_option("--out", rekey_args.out_path, "Rekey envelope output file")->required();
  std::uint32_t rekey_sender = 0;
  auto* rekey_sender_opt = rekey->add_option("--sender", rekey_sender, "Sender id");
  std::uint64_t rekey_seq = 0;
  auto* rekey_seq_opt = rekey->add_option("--seq", rekey_seq, "Sequence number");
  std::int64_t rekey_now = 0;
  auto* rekey_now_opt = rekey->add_option("--now", rekey_now, "Timestamp override (unix s)");
  rekey->callback([&] {
    if (*rekey_sender_opt) rekey_args.sender = rekey_sender;
    if (*rekey_seq_opt) rekey_args.sequence = rekey_seq;
    if (*rekey_now_opt) rekey_args.now = rekey_now;
    run_rekey(rekey_args);
  });

  // rekey-apply
  RekeyApplyArgs apply_args;
  auto* apply = app.add_subcommand("rekey-apply", "Apply a received rekey envelope to a store");
  apply->add_option("--keys", apply_args.keys_path, "Key store file (updated in place)")
      ->required();
  apply->add_option("--in", apply_args.in_path, "Rekey envelope input file")->required();
  std::int64_t apply_now = 0;
  auto* apply_now_opt = apply->add_option("--now", apply_now, "Timestamp override (unix s)");
  apply->callback([&] {
    if (*apply_now_opt) apply_args.now = apply_now;
    run_rekey_apply(apply_args);
  });

  // bench
  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Time every attribute on this host");
  bench->add_option("--sizes", bench_args.sizes, "Input sizes in bytes")->delimiter(',');
  bench->add_option("--iterations", bench_args.iterations, "Iteration counts")->delimiter(',');
  bench->add_option("--out", bench_args.out_path, "Timings output file")->required();
  bench->callback([&] { run_bench(bench_args); });

  // report
  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Build the energy report");
  report->add_option("--timings", report_args.timings,
                     "Timings file, or 'reference' for the embedded tables");
  report->add_option("--power", report_args.power,
                     "Power file, or 'reference' for the embedded tables");
  report->add_option("--out", report_args.out_path, "Report output file (JSON)");
  report->callback([&] { run_report(report_args); });

  // simulate
  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Run the edge/gateway simulation");
  simulate->add_option("--edges", sim_args.config.edges, "Edge node count");
  simulate->add_option("--duration", sim_args.config.duration_s, "Run length, seconds");
  simulate->add_option("--period", sim_args.config.period_s, "Reading period, seconds");
  simulate->add_option("--rekey-every", sim_args.config.rekey_every_s,
                       "Rekey interval, seconds (0 disables)");
  simulate->add_option("--transport", sim_args.transport, "loopback or udp");
  simulate->add_option("--seed", sim_args.config.seed, "Deterministic RNG seed");
  simulate->add_option("--tamper", sim_args.config.faults.tamper_rate, "Tamper probability");
  simulate->add_option("--replay", sim_args.config.faults.replay_rate, "Replay probability");
  simulate->add_option("--drop", sim_args.config.faults.drop_rate, "Drop probability");
  simulate->add_option("--out", sim_args.out_path, "Report output file (JSON)");
  simulate->callback([&] { run_simulate(sim_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (argc <= 1) std::cerr << "\n" << app.help();
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
