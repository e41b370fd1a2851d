#include "grushin/cli.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace grushin;
using namespace grushin::cli;

namespace {

std::string sys(const char* name) { return std::string(GRUSHIN_SYSTEMS_DIR) + "/" + name; }

RunConfig builtin_cfg(const std::string& command, const std::string& name = "grushin") {
  RunConfig c;
  c.command = command;
  c.builtin = name;
  return c;
}

}  // namespace

TEST(Report, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Report, NonFiniteNumbersAreStrings) {
  EXPECT_EQ(num(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(num(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(num(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(num(0.5), 0.5);
}

TEST(Report, EnvelopeVerdictAndHash) {
  Json cfg{{"a", 1}};
  Json claims = Json::array({claim_record("x", true), claim_record("y", false)});
  auto e = envelope("cmd", cfg, claims);
  EXPECT_EQ(e["verdict"], "fail");
  EXPECT_EQ(e["config_hash"], sha256_hex(cfg.dump()));
  EXPECT_EQ(envelope("cmd", cfg, Json::array())["verdict"], "fail");
  EXPECT_EQ(envelope("cmd", cfg, Json::array({claim_record("x", true)}))["verdict"], "pass");
}

TEST(Ceilings, ParsesKnownKeys) {
  auto m = parse_ceilings(R"({"harnack.C": 20, "mc-kernel.tv": 0.1})");
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m["harnack.C"], 20);
  EXPECT_THROW(parse_ceilings(R"({"nope": 1})"), InvalidInput);
  EXPECT_THROW(parse_ceilings(R"({"harnack.C": -1})"), InvalidInput);
  EXPECT_THROW(parse_ceilings(R"({"harnack.C": "x"})"), InvalidInput);
  EXPECT_THROW(parse_ceilings("[1]"), InvalidInput);
  EXPECT_THROW(parse_ceilings("{"), InvalidInput);
  EXPECT_THROW(parse_ceilings_file("/nonexistent/ceilings.json"), InvalidInput);
}

TEST(Run, AnalyzeBuiltinPasses) {
  auto out = run(builtin_cfg("analyze"));
  EXPECT_EQ(out.exit_code, kPass);
  const auto& r = out.report;
  EXPECT_EQ(r["tool"], "grushin");
  EXPECT_EQ(r["verdict"], "pass");
  ASSERT_EQ(r["claims"].size(), 5u);
  EXPECT_EQ(r["claims"][0]["claim"], "closure");
  EXPECT_EQ(r["claims"][0]["dimension"], 3);
  EXPECT_EQ(r["claims"][0]["nilpotency"]["step"], 2);
  EXPECT_EQ(r["claims"][3]["kind"], "NilpotentHence");
}

TEST(Run, SystemFilesReachTheExpectedVerdicts) {
  RunConfig c;
  c.command = "analyze";
  c.system_file = sys("grushin.sys");
  EXPECT_EQ(run(c).exit_code, kPass);
  c.system_file = sys("rank_drop.sys");
  auto out = run(c);
  EXPECT_EQ(out.exit_code, kFail);
  EXPECT_EQ(out.report["claims"][4]["claim"], "hormander");
  EXPECT_FALSE(out.report["claims"][4]["passed"].get<bool>());
  c.system_file = sys("unbounded.sys");
  EXPECT_EQ(run(c).exit_code, kFail);
  c.system_file = sys("not_skew.sys");
  EXPECT_EQ(run(c).exit_code, kInvalid);
}

TEST(Run, CertifyStopsAtFailedHypotheses) {
  RunConfig c;
  c.command = "certify";
  c.system_file = sys("rank_drop.sys");
  auto out = run(c);
  EXPECT_EQ(out.exit_code, kFail);
  EXPECT_EQ(out.report["hypotheses"], "fail");
  EXPECT_EQ(out.report["claims"].size(), 5u);
}

TEST(Run, InvalidInputsExitTwo) {
  EXPECT_EQ(run(builtin_cfg("analyze", "nope")).exit_code, kInvalid);
  EXPECT_EQ(run(builtin_cfg("frobnicate")).exit_code, kInvalid);
  auto both = builtin_cfg("analyze");
  both.system_file = sys("grushin.sys");
  EXPECT_EQ(run(both).exit_code, kInvalid);
  auto small = builtin_cfg("distance");
  small.grid = {4};
  EXPECT_EQ(run(small).exit_code, kInvalid);
  auto eps = builtin_cfg("volumes");
  eps.grid = {33, 65};
  eps.eps_ladder = {0.1};
  EXPECT_EQ(run(eps).exit_code, kInvalid);
  auto none = builtin_cfg("transference");
  none.claims = {"harnack"};
  auto out = run(none);
  EXPECT_EQ(out.exit_code, kInvalid);
  EXPECT_TRUE(out.report.contains("error"));
  auto src = builtin_cfg("distance");
  src.source = std::vector<double>{0, 0, 0};
  EXPECT_EQ(run(src).exit_code, kInvalid);
}

TEST(Run, DistanceWritesAGridTable) {
  auto c = builtin_cfg("distance");
  c.grid = {65};
  c.eps_ladder = {0.2};
  auto out = run(c);
  EXPECT_EQ(out.exit_code, kPass);
  ASSERT_EQ(out.tables.size(), 1u);
  EXPECT_EQ(out.tables[0].first, "distance.csv");
  EXPECT_EQ(out.report["claims"][0]["unreached"], 0);
}

TEST(Run, ClaimSelectionByPrefix) {
  auto c = builtin_cfg("transference");
  c.claims = {"support"};
  c.words = 5;
  auto out = run(c);
  ASSERT_EQ(out.report["claims"].size(), 1u);
  EXPECT_EQ(out.report["claims"][0]["claim"], "support");
}

TEST(Run, CeilingsChangeTheVerdict) {
  auto c = builtin_cfg("volumes", "euclidean");
  c.grid = {65, 129};
  c.eps_ladder = {0.2, 0.1};
  EXPECT_EQ(run(c).exit_code, kPass);
  c.ceilings = {{"doubling.sup", 3.0}};
  auto out = run(c);
  EXPECT_EQ(out.exit_code, kFail);
  EXPECT_EQ(out.report["config"]["limits"]["doubling.sup"], 3.0);
}

TEST(Run, ReportsAreByteIdenticalAcrossRuns) {
  auto c = builtin_cfg("transference");
  c.words = 10;
  auto a = dump(run(c).report), b = dump(run(c).report);
  EXPECT_EQ(a, b);
  c.seed = 2;
  auto d = dump(run(c).report);
  EXPECT_NE(a, d);
}
