#include "projgnep/cli.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace projgnep;
using testing_support::fixture;
using testing_support::fixture_path;

namespace {

struct RunOutput {
  int code;
  std::string out;
  std::string err;
};

RunOutput invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string value_of(const std::string& report, const std::string& key) {
  std::istringstream in(report);
  for (std::string line; std::getline(in, line);)
    if (line.rfind(key + " = ", 0) == 0) return line.substr(key.size() + 3);
  return {};
}

void expect_parse_error(const std::string& text, int line, int column) {
  try {
    (void)parse_problem(text);
    ADD_FAILURE() << "no error for:\n" << text;
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), line) << e.what();
    EXPECT_EQ(e.column(), column) << e.what();
  }
}

}  // namespace

TEST(ParseProblem, ExpandFixture) {
  const auto P = fixture("expand");
  EXPECT_EQ(P.game.players(), 2);
  EXPECT_TRUE(P.game.utility_reducible());
  EXPECT_EQ(P.game.X_bounds().upper, Vec::Ones(2));
}

TEST(ParseProblem, ErrorsCarryLineAndColumn) {
  expect_parse_error("players 1 dims 1\nplayer 1\nbox 0 1\nkbox [0] [1]\nutility x1 + x3\n", 5, 14);
  expect_parse_error("players 1 dims 1\nplayer 1\nbox 0 1\nkbox [0] [1]\nfrobnicate\n", 5, 1);
  expect_parse_error("players 1 dims 1\nplayer 1\nbox 0 x\nkbox [0] [1]\nutility x1\n", 3, 7);
  expect_parse_error("players 1 dims 1\nplayer 1\nbox 0 1\nkbox [0] [1]\nutility x1^5\n", 5, 13);
  EXPECT_THROW((void)parse_problem("player 1\n"), ParseError);
  EXPECT_THROW((void)parse_problem("players 2 dims 1 1\nplayer 1\nbox 0 1\nkbox [0] [1]\nutility x1\n"), ParseError);
}

TEST(ParseProblem, InvertedBoundsNameTheProbe) {
  try {
    (void)parse_problem("players 1 dims 1\nplayer 1\nbox 0 1\nkbox [1] [0]\nutility x1\n");
    FAIL();
  } catch (const HypothesisError& e) {
    EXPECT_NE(std::string(e.what()).find("probe"), std::string::npos);
  }
}

TEST(ParseProblem, RoundTripDigest) {
  for (const char* name : {"expand", "selfmap", "spin", "chase", "ball", "flat", "sampled"}) {
    const auto P = fixture(name);
    const auto Q = parse_problem(serialize(P));
    EXPECT_EQ(serialize(P), serialize(Q)) << name;
    EXPECT_EQ(digest(P), digest(Q)) << name;
    EXPECT_EQ(digest(P).size(), 64u);
  }
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Run, Examples) {
  const auto oracle = invoke({"oracle", fixture_path("expand"), "--h", "0.01"});
  EXPECT_EQ(oracle.code, kExitCertified);
  EXPECT_EQ(value_of(oracle.out, "certificates"), "1");
  EXPECT_EQ(value_of(oracle.out, "status"), "certified");

  const auto pass = invoke({"verify", fixture_path("expand"), "--x", "1,1", "--y", "2,2"});
  EXPECT_EQ(pass.code, kExitCertified);
  EXPECT_EQ(value_of(pass.out, "certificate[0].verdict"), "pass");

  const auto fail = invoke({"verify", fixture_path("expand"), "--x", "0.5,0.5", "--y", "1.5,1.5"});
  EXPECT_EQ(fail.code, kExitNoCertificate);
  EXPECT_EQ(value_of(fail.out, "certificate[0].verdict"), "fail(projection)");
}

TEST(Run, ExitCodesOnAllFixtures) {
  for (const char* name : {"expand", "selfmap", "spin", "chase", "ball", "flat", "sampled"})
    for (const char* cmd : {"solve-fp", "solve-qvi", "oracle"}) {
      std::vector<std::string> args = {cmd, fixture_path(name)};
      if (std::string(name) != "sampled") args.insert(args.end(), {"--h", "0.05"});
      const auto r = invoke(args);
      EXPECT_EQ(r.code, kExitCertified) << cmd << " " << name << "\n" << r.err;
      EXPECT_NE(value_of(r.out, "certificates"), "0") << cmd << " " << name;
    }
}

TEST(Run, NoCertificateExitsOne) {
  const auto r = invoke({"solve-fp", fixture_path("expand"), "--max-iter", "1", "--multistart", "1"});
  EXPECT_EQ(r.code, kExitNoCertificate);
  EXPECT_EQ(value_of(r.out, "status"), "no-certificate");
  EXPECT_FALSE(value_of(r.out, "advisory").empty());
}

TEST(Run, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, kExitInputError);
  EXPECT_EQ(invoke({"explode", fixture_path("expand")}).code, kExitInputError);
  const auto bad_flag = invoke({"oracle", fixture_path("expand"), "--nope", "1"});
  EXPECT_EQ(bad_flag.code, kExitInputError);
  EXPECT_NE(bad_flag.err.find("usage"), std::string::npos);
  EXPECT_EQ(invoke({"oracle", "/nonexistent.gnep"}).code, kExitInputError);
  EXPECT_EQ(invoke({"oracle", fixture_path("expand"), "--lambda", "2"}).code, kExitInputError);
  EXPECT_EQ(invoke({"verify", fixture_path("expand"), "--x", "1", "--y", "2,2"}).code, kExitInputError);
}

TEST(Run, FlagsOverrideAndEcho) {
  const auto r = invoke({"solve-fp", fixture_path("chase"), "--seed", "9", "--budget", "32", "--lambda", "0.5"});
  EXPECT_EQ(value_of(r.out, "config.seed"), "9");
  EXPECT_EQ(value_of(r.out, "config.budget"), "32");
  EXPECT_EQ(value_of(r.out, "config.lambda"), "0.5");
  EXPECT_EQ(value_of(r.out, "config.h"), "0.050000000000000003");
}

TEST(Run, ReportsAreByteIdentical) {
  for (const char* cmd : {"solve-fp", "solve-qvi", "oracle"}) {
    const std::vector<std::string> args = {cmd, fixture_path("spin"), "--h", "0.05", "--seed", "3"};
    EXPECT_EQ(invoke(args).out, invoke(args).out) << cmd;
  }
}

TEST(Run, SolversAgreeWithinTwoCells) {
  for (const char* name : {"expand", "selfmap", "chase"}) {
    std::vector<std::string> xs;
    for (const char* cmd : {"solve-fp", "solve-qvi", "oracle"})
      xs.push_back(value_of(invoke({cmd, fixture_path(name), "--h", "0.05"}).out, "certificate[0].x"));
    const Vec a = parse_real_list(xs[0]), b = parse_real_list(xs[1]), c = parse_real_list(xs[2]);
    EXPECT_LE((a - b).norm(), 0.1) << name;
    EXPECT_LE((a - c).norm(), 0.1) << name;
  }
}
