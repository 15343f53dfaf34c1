// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <sstream>
#include <vector>

#include "stonewalk/io.hpp"

using namespace stonewalk;
using dispersal::Family;

TEST_CASE("kernel JSON round trip is bit-exact", "[io]") {
  for (Family f : {Family::uniform, Family::bilateral_exponential, Family::discrete_normal,
                   Family::nearest_neighbor}) {
    const auto k = dispersal::build_kernel(f, 400, 0.1);
    const std::string text = io::to_json(k).dump();
    const auto back = io::kernel_from_json(io::Json::parse(text));
    REQUIRE(back.masses().size() == k.masses().size());
    CHECK(std::memcmp(back.masses().data(), k.masses().data(), k.masses().size() * sizeof(double)) == 0);
    CHECK(back.family() == k.family());
    CHECK(back.N() == k.N());
    CHECK(back.exempt() == k.exempt());
    CHECK(dispersal::kernel_hash(back) == dispersal::kernel_hash(k));
  }
}

TEST_CASE("kernel JSON layout", "[io]") {
  const auto k = dispersal::build_kernel(Family::uniform, 25, 1.0);
  const auto j = io::to_json(k);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"family", "N", "mix", "B", "support_radius", "sigmaN",
                                         "exempt", "mass"});
  CHECK(j["mass"].size() == 11);
  CHECK(j["family"] == "uniform");
}

TEST_CASE("malformed kernel JSON is a config error", "[io]") {
  auto j = io::to_json(dispersal::build_kernel(Family::uniform, 25, 1.0));
  j["support_radius"] = 4;
  CHECK_THROWS_AS(io::kernel_from_json(j), ConfigError);
  j.erase("mass");
  CHECK_THROWS_AS(io::kernel_from_json(j), ConfigError);
}

TEST_CASE("NDJSON sample stream round trip", "[io]") {
  std::vector<genealogy::CoalescenceSample> s = {
      {0, 0.1, 0.30000000000000004, true, 3}, {1, 1e-300, 2.5e-310, false, 1}, {2, 12345.678, 1.0 / 3.0, true, 9}};
  std::ostringstream os;
  io::write_ndjson(os, s);
  const std::string text = os.str();
  CHECK(text.rfind("{\"replica\":0,\"raw_time\":0.1,\"scaled_time\":0.30000000000000004,\"coalesced\":true}\n", 0) == 0);
  std::istringstream is(text);
  const auto back = io::read_ndjson(is);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].replicaId == s[i].replicaId);
    CHECK(back[i].rawTime == s[i].rawTime);
    CHECK(back[i].scaledTime == s[i].scaledTime);
    CHECK(back[i].coalesced == s[i].coalesced);
  }
  std::istringstream bad("{\"replica\": 1}\n");
  CHECK_THROWS_AS(io::read_ndjson(bad), ConfigError);
}

TEST_CASE("audit and report JSON", "[io]") {
  const dispersal::Kernel bad(Family::uniform, 4, 0.0, 8.0, {0.5, 0.0, 0.0, 0.0, 0.5}, false);
  const auto j = io::to_json(dispersal::verify_assumptions(bad));
  CHECK(j["passed"] == false);
  CHECK(j["first_failure"] == "floor");
  CHECK(j["checks"].size() == 6);

  stats::Report r{"ks", 0.031, 10000, 0.05, true};
  const auto rj = io::to_json(r);
  std::vector<std::string> keys;
  for (auto it = rj.begin(); it != rj.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"metric", "value", "n", "tolerance", "pass"});
  CHECK(io::hex64(0xdeadbeefULL) == "00000000deadbeef");
}
