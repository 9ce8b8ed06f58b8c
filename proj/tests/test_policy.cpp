// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "paysec/policy.hpp"

using namespace paysec;

TEST_CASE("risk scores of the deployment's message classes") {
  struct Row {
    RiskFactors f;
    const char* score;
    RiskBand band;
    bool privacy;
  };
  const Row rows[] = {
      {{2, 1, 2}, "1.7", RiskBand::High, true},      // farm control commands
      {{3, 1, 3}, "2.3", RiskBand::Critical, true},  // session key transport
      {{0, 0, 0}, "0.0", RiskBand::None, false},     // open-air telemetry
  };
  for (const Row& r : rows) {
    RiskScore s = score_risk(r.f);
    CAPTURE(r.f.sensitivity, r.f.vulnerability, r.f.impact);
    CHECK(s.str() == r.score);
    CHECK(band_of(s) == r.band);
    CHECK(requires_privacy(band_of(s)) == r.privacy);
  }
}

TEST_CASE("risk band thresholds") {
  auto band = [](std::int64_t tenths) { return band_of(RiskScore::from_units(tenths)); };
  CHECK(band(0) == RiskBand::None);
  CHECK(band(1) == RiskBand::Low);
  CHECK(band(9) == RiskBand::Low);
  CHECK(band(10) == RiskBand::Medium);
  CHECK(band(14) == RiskBand::Medium);
  CHECK(band(15) == RiskBand::High);
  CHECK(band(19) == RiskBand::High);
  CHECK(band(20) == RiskBand::Critical);
  CHECK(band(30) == RiskBand::Critical);
}

TEST_CASE("risk scores across the whole factor lattice") {
  // The score only depends on the factor sum; spot-check each reachable sum.
  const char* by_sum[] = {"0.0", "0.3", "0.7", "1.0", "1.3",
                          "1.7", "2.0", "2.3", "2.7", "3.0"};
  for (int s = 0; s <= 3; ++s)
    for (int v = 0; v <= 3; ++v)
      for (int i = 0; i <= 3; ++i) {
        CAPTURE(s, v, i);
        CHECK(score_risk({s, v, i}).str() == by_sum[s + v + i]);
      }
}

TEST_CASE("factor validation names the offending field") {
  CHECK_THROWS_MATCHES(score_risk({-1, 0, 0}), Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("sensitivity")));
  CHECK_THROWS_MATCHES(score_risk({0, 4, 0}), Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("vulnerability")));
  CHECK_THROWS_MATCHES(score_risk({0, 0, 7}), Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("impact")));
  try {
    score_risk({0, 0, -2});
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
  }
}

TEST_CASE("default policy matches the deployment table") {
  PolicyTable t = default_policy();
  REQUIRE(t.classes().size() == 5);

  const MessageClassSpec* control = t.find(kClassFarmControl);
  REQUIRE(control != nullptr);
  CHECK(control->name == "farm-control");
  CHECK(control->direction == Direction::GatewayToEdge);
  CHECK(control->score.str() == "1.7");
  CHECK(control->band == RiskBand::High);
  CHECK(control->requires_privacy);

  const MessageClassSpec* keys = t.find(kClassSessionKeys);
  REQUIRE(keys != nullptr);
  CHECK(keys->direction == Direction::EdgeToGateway);
  CHECK(keys->score.str() == "2.3");
  CHECK(keys->band == RiskBand::Critical);
  CHECK(keys->requires_privacy);

  for (std::uint8_t id : {kClassTemperature, kClassHumidity, kClassNitrate}) {
    const MessageClassSpec* c = t.find(id);
    REQUIRE(c != nullptr);
    CHECK(c->score.str() == "0.0");
    CHECK(c->band == RiskBand::None);
    CHECK_FALSE(c->requires_privacy);
    CHECK(c->direction == Direction::EdgeToGateway);
  }

  CHECK(decide(t, kClassFarmControl).requires_privacy);
  CHECK_FALSE(decide(t, kClassTemperature).requires_privacy);
  CHECK_THROWS_AS(decide(t, 99), Error);
  try {
    decide(t, 99);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
  }
}

TEST_CASE("policy JSON round-trips") {
  PolicyTable t = default_policy();
  std::string text = serialize(t);
  PolicyTable back = load_policy(text);
  REQUIRE(back.classes().size() == t.classes().size());
  for (const auto& c : t.classes()) {
    const MessageClassSpec* b = back.find(c.class_id);
    REQUIRE(b != nullptr);
    CHECK(b->name == c.name);
    CHECK(b->direction == c.direction);
    CHECK(b->factors.sensitivity == c.factors.sensitivity);
    CHECK(b->factors.vulnerability == c.factors.vulnerability);
    CHECK(b->factors.impact == c.factors.impact);
    CHECK(b->score == c.score);
    CHECK(b->band == c.band);
    CHECK(b->requires_privacy == c.requires_privacy);
  }
  CHECK(serialize(back) == text);
}

TEST_CASE("policy loader recomputes and cross-checks stored results") {
  // Scores may arrive as strings or numbers; both must agree with the factors.
  std::string ok = R"({"classes":[{"class_id":1,"name":"a","direction":"edge_to_gateway",
    "sensitivity":2,"vulnerability":1,"impact":2,"score":1.7,"band":"High"}]})";
  CHECK(load_policy(ok).find(1)->score.str() == "1.7");

  std::string bare = R"({"classes":[{"class_id":1,"name":"a","direction":"edge_to_gateway",
    "sensitivity":2,"vulnerability":1,"impact":2}]})";
  CHECK(load_policy(bare).find(1)->band == RiskBand::High);

  auto rejects = [](const std::string& text) {
    try {
      load_policy(text);
      return false;
    } catch (const Error& e) {
      return e.kind() == ErrorKind::Format;
    }
  };
  CHECK(rejects(R"({"classes":[{"class_id":1,"name":"a","direction":"edge_to_gateway",
    "sensitivity":2,"vulnerability":1,"impact":2,"score":"1.5"}]})"));
  CHECK(rejects(R"({"classes":[{"class_id":1,"name":"a","direction":"edge_to_gateway",
    "sensitivity":2,"vulnerability":1,"impact":2,"band":"Low"}]})"));
  CHECK(rejects(R"({"classes":[{"class_id":1,"name":"a","direction":"sideways",
    "sensitivity":0,"vulnerability":0,"impact":0}]})"));
  CHECK(rejects(R"({"classes":[{"class_id":300,"name":"a","direction":"edge_to_gateway",
    "sensitivity":0,"vulnerability":0,"impact":0}]})"));
  CHECK(rejects(R"({"classes":[{"class_id":1,"name":"a","direction":"edge_to_gateway",
    "sensitivity":5,"vulnerability":0,"impact":0}]})"));
  CHECK(rejects(R"({"classes":[{"class_id":1,"name":"a","direction":"edge_to_gateway",
    "sensitivity":0,"vulnerability":0}]})"));  // missing impact
  CHECK(rejects("not json"));
  CHECK(rejects("[]"));
  CHECK(rejects("{}"));
  // Duplicate ids collide.
  CHECK(rejects(R"({"classes":[
    {"class_id":1,"name":"a","direction":"edge_to_gateway","sensitivity":0,"vulnerability":0,"impact":0},
    {"class_id":1,"name":"b","direction":"edge_to_gateway","sensitivity":0,"vulnerability":0,"impact":0}]})"));
}

TEST_CASE("factor level display names") {
  CHECK(std::string(sensitivity_level_name(2)) == "Professional");
  CHECK(std::string(sensitivity_level_name(3)) == "Private");
  CHECK(std::string(vulnerability_level_name(1)) == "Exceptional");
  CHECK(std::string(impact_level_name(2)) == "Reputation");
  CHECK(std::string(impact_level_name(3)) == "Closure");
}
