// SPDX-License-Identifier: Apache-2.0
//
// DPIA-style risk scoring: each message class carries (sensitivity,
// vulnerability, impact) levels; the rounded mean places it in a risk band,
// and only High/Critical bands require encryption.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "paysec/errors.hpp"
#include "paysec/fixed_decimal.hpp"

namespace paysec {

struct RiskFactors {
  int sensitivity = 0;
  int vulnerability = 0;
  int impact = 0;
};

using RiskScore = FixedDecimal<1>;

enum class RiskBand { None, Low, Medium, High, Critical };

enum class Direction { EdgeToGateway, GatewayToEdge };

struct PrivacyDecision {
  bool requires_privacy = false;
  RiskBand band = RiskBand::None;
};

inline const char* to_string(RiskBand b) {
  switch (b) {
    case RiskBand::None: return "None";
    case RiskBand::Low: return "Low";
    case RiskBand::Medium: return "Medium";
    case RiskBand::High: return "High";
    case RiskBand::Critical: return "Critical";
  }
  return "?";
}

inline RiskBand band_from_string(const std::string& s) {
  for (RiskBand b : {RiskBand::None, RiskBand::Low, RiskBand::Medium, RiskBand::High,
                     RiskBand::Critical}) {
    if (s == to_string(b)) return b;
  }
  throw Error(ErrorKind::Format, "unknown risk band: " + s);
}

inline const char* to_string(Direction d) {
  return d == Direction::EdgeToGateway ? "edge_to_gateway" : "gateway_to_edge";
}

inline Direction direction_from_string(const std::string& s) {
  if (s == "edge_to_gateway") return Direction::EdgeToGateway;
  if (s == "gateway_to_edge") return Direction::GatewayToEdge;
  throw Error(ErrorKind::Format, "unknown direction: " + s);
}

// Display names for the factor levels actually distinguished by the scale.
inline const char* sensitivity_level_name(int level) {
  switch (level) {
    case 0: return "Public";
    case 1: return "Internal";
    case 2: return "Professional";
    case 3: return "Private";
  }
  return "?";
}

inline const char* vulnerability_level_name(int level) {
  switch (level) {
    case 0: return "None";
    case 1: return "Exceptional";
    case 2: return "Occasional";
    case 3: return "Frequent";
  }
  return "?";
}

inline const char* impact_level_name(int level) {
  switch (level) {
    case 0: return "None";
    case 1: return "Inconvenience";
    case 2: return "Reputation";
    case 3: return "Closure";
  }
  return "?";
}

inline void validate(const RiskFactors& f) {
  auto check = [](int v, const char* field) {
    if (v < 0 || v > 3)
      throw Error(ErrorKind::Validation,
                  std::string(field) + " must be in 0..3, got " + std::to_string(v));
  };
  check(f.sensitivity, "sensitivity");
  check(f.vulnerability, "vulnerability");
  check(f.impact, "impact");
}

/// Mean of the three factor levels, rounded half away from zero to one decimal.
inline RiskScore score_risk(const RiskFactors& f) {
  validate(f);
  std::int64_t sum = f.sensitivity + f.vulnerability + f.impact;
  return RiskScore::from_units(detail::div_round_half_away(10 * sum, 3));
}

/// 0.0 -> None, (0,1) -> Low, [1,1.5) -> Medium, [1.5,2) -> High, >=2 -> Critical.
inline RiskBand band_of(RiskScore s) {
  std::int64_t t = s.units();
  if (t == 0) return RiskBand::None;
  if (t < 10) return RiskBand::Low;
  if (t < 15) return RiskBand::Medium;
  if (t < 20) return RiskBand::High;
  return RiskBand::Critical;
}

inline bool requires_privacy(RiskBand b) {
  return b == RiskBand::High || b == RiskBand::Critical;
}

struct MessageClassSpec {
  std::uint8_t class_id = 0;
  std::string name;
  Direction direction = Direction::EdgeToGateway;
  RiskFactors factors;
  RiskScore score;
  RiskBand band = RiskBand::None;
  bool requires_privacy = false;
};

inline MessageClassSpec make_class(std::uint8_t class_id, std::string name, Direction direction,
                                   RiskFactors factors) {
  MessageClassSpec c;
  c.class_id = class_id;
  c.name = std::move(name);
  c.direction = direction;
  c.factors = factors;
  c.score = score_risk(factors);
  c.band = band_of(c.score);
  c.requires_privacy = requires_privacy(c.band);
  return c;
}

class PolicyTable {
 public:
  PolicyTable() = default;

  void add(MessageClassSpec c) {
    if (find(c.class_id) != nullptr)
      throw Error(ErrorKind::Format, "duplicate class_id " + std::to_string(c.class_id));
    classes_.push_back(std::move(c));
  }

  const MessageClassSpec* find(std::uint8_t class_id) const {
    for (const auto& c : classes_)
      if (c.class_id == class_id) return &c;
    return nullptr;
  }

  const std::vector<MessageClassSpec>& classes() const { return classes_; }
  bool empty() const { return classes_.empty(); }

 private:
  std::vector<MessageClassSpec> classes_;
};

inline PrivacyDecision decide(const PolicyTable& policy, std::uint8_t class_id) {
  const MessageClassSpec* c = policy.find(class_id);
  if (c == nullptr)
    throw Error(ErrorKind::Validation, "class_id " + std::to_string(class_id) + " not in policy");
  return PrivacyDecision{c->requires_privacy, c->band};
}

// Built-in message classes of the aquaponics deployment.
inline constexpr std::uint8_t kClassFarmControl = 1;
inline constexpr std::uint8_t kClassSessionKeys = 2;
inline constexpr std::uint8_t kClassTemperature = 3;
inline constexpr std::uint8_t kClassHumidity = 4;
inline constexpr std::uint8_t kClassNitrate = 5;

inline PolicyTable default_policy() {
  PolicyTable t;
  t.add(make_class(kClassFarmControl, "farm-control", Direction::GatewayToEdge, {2, 1, 2}));
  t.add(make_class(kClassSessionKeys, "session-keys", Direction::EdgeToGateway, {3, 1, 3}));
  t.add(make_class(kClassTemperature, "temperature", Direction::EdgeToGateway, {0, 0, 0}));
  t.add(make_class(kClassHumidity, "humidity", Direction::EdgeToGateway, {0, 0, 0}));
  t.add(make_class(kClassNitrate, "nitrate", Direction::EdgeToGateway, {0, 0, 0}));
  return t;
}

/// Parses and validates a policy document. Scores and bands are always
/// recomputed from the factors; stored values that disagree are an error, not
/// a suggestion.
inline PolicyTable load_policy(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, std::string("policy parse error: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("classes") || !doc["classes"].is_array())
    throw Error(ErrorKind::Format, "policy document must carry a top-level \"classes\" list");

  PolicyTable table;
  for (const auto& item : doc["classes"]) {
    try {
      int id = item.at("class_id").get<int>();
      if (id < 0 || id > 255)
        throw Error(ErrorKind::Format, "class_id must fit in 0..255, got " + std::to_string(id));
      RiskFactors f{item.at("sensitivity").get<int>(), item.at("vulnerability").get<int>(),
                    item.at("impact").get<int>()};
      MessageClassSpec c;
      try {
        c = make_class(static_cast<std::uint8_t>(id), item.at("name").get<std::string>(),
                       direction_from_string(item.at("direction").get<std::string>()), f);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::Validation) throw Error(ErrorKind::Format, e.what());
        throw;
      }
      if (item.contains("score")) {
        RiskScore stored = item["score"].is_string()
                               ? RiskScore::parse(item["score"].get<std::string>())
                               : RiskScore::from_double(item["score"].get<double>());
        if (stored != c.score)
          throw Error(ErrorKind::Format, "class " + c.name + ": stored score " + stored.str() +
                                             " disagrees with computed " + c.score.str());
      }
      if (item.contains("band")) {
        RiskBand stored = band_from_string(item["band"].get<std::string>());
        if (stored != c.band)
          throw Error(ErrorKind::Format, "class " + c.name + ": stored band " +
                                             to_string(stored) + " disagrees with computed " +
                                             to_string(c.band));
      }
      table.add(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Format, std::string("policy field error: ") + e.what());
    }
  }
  return table;
}

inline std::string serialize(const PolicyTable& table) {
  nlohmann::ordered_json doc;
  doc["classes"] = nlohmann::ordered_json::array();
  for (const auto& c : table.classes()) {
    nlohmann::ordered_json item;
    item["class_id"] = c.class_id;
    item["name"] = c.name;
    item["direction"] = to_string(c.direction);
    item["sensitivity"] = c.factors.sensitivity;
    item["vulnerability"] = c.factors.vulnerability;
    item["impact"] = c.factors.impact;
    item["score"] = c.score.str();
    item["band"] = to_string(c.band);
    doc["classes"].push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

}  // namespace paysec
