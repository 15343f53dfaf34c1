// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Serialization: kernels and reports to JSON, replica samples to NDJSON.
// Doubles are written in shortest round-trip form, so parsing restores the
// exact bits.
#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stonewalk/dispersal.hpp"
#include "stonewalk/error.hpp"
#include "stonewalk/genealogy.hpp"
#include "stonewalk/stats.hpp"

namespace stonewalk::io {

using Json = nlohmann::ordered_json;

inline Json to_json(const dispersal::Kernel& k) {
  Json j;
  j["family"] = std::string(dispersal::to_string(k.family()));
  j["N"] = k.N();
  j["mix"] = k.mix();
  j["B"] = k.B();
  j["support_radius"] = k.support_radius();
  j["sigmaN"] = k.sigma_n();
  j["exempt"] = k.exempt();
  j["mass"] = std::vector<double>(k.masses().begin(), k.masses().end());
  return j;
}

inline dispersal::Kernel kernel_from_json(const Json& j) {
  try {
    const auto family = dispersal::parse_family(j.at("family").get<std::string>());
    auto mass = j.at("mass").get<std::vector<double>>();
    const auto radius = j.at("support_radius").get<std::int64_t>();
    if (static_cast<std::int64_t>(mass.size()) != 2 * radius + 1) {
      throw ConfigError("kernel JSON: mass array length does not match support_radius");
    }
    const bool exempt = j.contains("exempt") ? j.at("exempt").get<bool>()
                                             : family == dispersal::Family::nearest_neighbor;
    return dispersal::Kernel(family, j.at("N").get<std::uint64_t>(), j.at("mix").get<double>(),
                             j.at("B").get<double>(), std::move(mass), exempt);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("kernel JSON: ") + e.what());
  }
}

inline Json to_json(const dispersal::Audit& a) {
  Json j;
  j["passed"] = a.passed();
  j["exempt"] = a.exempt;
  Json checks = Json::array();
  for (const auto& c : a.checks) {
    Json cj;
    cj["name"] = c.name;
    cj["passed"] = c.passed;
    cj["skipped"] = c.skipped;
    cj["detail"] = c.detail;
    if (c.witness) cj["witness"] = *c.witness;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  j["h"] = a.h;
  j["c"] = a.c;
  j["C"] = a.C;
  j["a"] = a.a;
  j["b"] = a.b;
  j["max_phi_away_from_origin"] = a.maxPhiAway;
  if (a.witnessTheta) j["witness_theta"] = *a.witnessTheta;
  if (const auto* f = a.first_failure()) j["first_failure"] = f->name;
  return j;
}

inline Json to_json(const genealogy::CoalescenceSample& s) {
  Json j;
  j["replica"] = s.replicaId;
  j["raw_time"] = s.rawTime;
  j["scaled_time"] = s.scaledTime;
  j["coalesced"] = s.coalesced;
  return j;
}

inline void write_ndjson(std::ostream& os, std::span<const genealogy::CoalescenceSample> samples) {
  for (const auto& s : samples) os << to_json(s).dump() << '\n';
}

inline std::vector<genealogy::CoalescenceSample> read_ndjson(std::istream& is) {
  std::vector<genealogy::CoalescenceSample> out;
  std::string line;
  std::uint64_t lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      genealogy::CoalescenceSample s;
      s.replicaId = j.at("replica").get<std::uint64_t>();
      s.rawTime = j.at("raw_time").get<double>();
      s.scaledTime = j.at("scaled_time").get<double>();
      s.coalesced = j.at("coalesced").get<bool>();
      out.push_back(s);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("sample file line " + std::to_string(lineNo) + ": " + e.what());
    }
  }
  return out;
}

inline Json to_json(const stats::Report& r) {
  Json j;
  j["metric"] = r.metric;
  j["value"] = r.value;
  j["n"] = r.n;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  return j;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

}  // namespace stonewalk::io
