#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "pan/cli/cli.h"
#include "pan/cli/emit.h"
#include "support/fixtures.h"

namespace pan::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result Pan(std::vector<std::string> args) {
  args.insert(args.begin(), "pan");
  std::ostringstream out, err;
  Result r;
  r.code = Run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string Data(const std::string& name) { return testing::DataPath(name); }

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("pan_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::size_t Lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

TEST(Cli, VersionAndHelp) {
  const auto v = Pan({"--version"});
  EXPECT_EQ(v.code, kExitOk);
  EXPECT_NE(v.out.find(VersionString()), std::string::npos);
  EXPECT_NE(v.out.find("relationships="), std::string::npos);
  EXPECT_EQ(Pan({"pod", "--version"}).code, kExitOk);
  EXPECT_EQ(Pan({"--help"}).code, kExitOk);
  EXPECT_EQ(Pan({"analyze", "--help"}).code, kExitOk);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(Pan({}).code, kExitUsage);
  EXPECT_EQ(Pan({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Pan({"pod", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(Pan({"pod", "--seed", "1", "--bogus", "3"}).code, kExitUsage);
}

TEST(Cli, MissingRequiredFlagIsInputError) {
  const auto r = Pan({"analyze", "--seed", "1"});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("--rel"), std::string::npos);
  EXPECT_EQ(Pan({"pod", "--choices", "5"}).code, kExitInput);  // seed is mandatory
  EXPECT_EQ(Pan({"analyze", "--rel", "/nonexistent/x.rel", "--seed", "1"}).code, kExitInput);
}

TEST(Cli, OptimizeCash) {
  const auto r = Pan({"optimize-cash", "--ux", "10", "--uy", "-4"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("status=concluded"), std::string::npos);
  EXPECT_NE(r.out.find("Pi=7\n"), std::string::npos);
  EXPECT_NE(r.out.find("post_u_x=3\n"), std::string::npos);
  EXPECT_NE(r.out.find("post_u_y=3\n"), std::string::npos);
  const auto n = Pan({"optimize-cash", "--ux", "1", "--uy", "-4"});
  EXPECT_EQ(n.code, kExitOk);
  EXPECT_NE(n.out.find("status=not_viable"), std::string::npos);
}

TEST(Cli, PodSmoke) {
  const auto r = Pan({"pod", "--dist", "u1", "--choices", "50", "--trials", "10", "--seed", "7"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(Lines(r.out), 2u);
  EXPECT_EQ(r.out.rfind("W,min_pod,mean_pod,mean_eq_choices,nonconverged\n", 0), 0u);
  EXPECT_EQ(r.out.find("\n50,") != std::string::npos, true);
}

TEST(Cli, OptimizeFlowsExample) {
  const auto r = Pan({"optimize-flows", "--econ", Data("example.econ"), "--seed", "1", "--audit"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("status=optimal"), std::string::npos);
  EXPECT_NE(r.out.find("u_x=0.75 u_y=0.875"), std::string::npos);
  EXPECT_NE(r.out.find("audit=pass"), std::string::npos);
}

TEST(Cli, AnalyzeExample) {
  const auto r = Pan({"analyze", "--rel", Data("example.rel"), "--seed", "1", "--sample", "9"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(Lines(r.out), 10u);
  EXPECT_NE(r.err.find("9 ASes, 7 p2c and 6 p2p links"), std::string::npos);
}

TEST(Cli, NegotiateSettles) {
  const auto r = Pan({"negotiate", "--ux", "0.6", "--uy", "0.2", "--choices", "20", "--candidates",
                      "4", "--seed", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("settlement"), std::string::npos);
}

TEST(Cli, ForceAndUnwritable) {
  TempDir dir;
  const std::string out = dir / "cash.csv";
  EXPECT_EQ(Pan({"optimize-cash", "--ux", "2", "--uy", "0", "--out", out}).code, kExitOk);
  const std::string first = Slurp(out);
  EXPECT_FALSE(first.empty());
  const auto again = Pan({"optimize-cash", "--ux", "4", "--uy", "0", "--out", out});
  EXPECT_EQ(again.code, kExitInput);
  EXPECT_NE(again.err.find("--force"), std::string::npos);
  EXPECT_EQ(Slurp(out), first);
  EXPECT_EQ(Pan({"optimize-cash", "--ux", "4", "--uy", "0", "--out", out, "--force"}).code,
            kExitOk);
  EXPECT_NE(Slurp(out), first);
  EXPECT_EQ(Pan({"optimize-cash", "--ux", "1", "--uy", "0", "--out", dir / "no/such/dir.csv"}).code,
            kExitInput);
}

// Every command run twice into separate directories yields identical bytes,
// for CSV and JSON alike.
TEST(Cli, DeterministicOutputs) {
  const std::vector<std::vector<std::string>> commands{
      {"optimize-cash", "--ux", "3", "--uy", "1"},
      {"optimize-flows", "--econ", Data("example.econ"), "--seed", "5"},
      {"pod", "--choices", "5,20", "--trials", "6", "--seed", "11"},
      {"negotiate", "--ux", "0.3", "--uy", "0.1", "--choices", "10", "--candidates", "3", "--seed",
       "2"},
      {"analyze", "--rel", Data("example.rel"), "--sample", "9", "--seed", "4"},
      {"geo", "--rel", Data("example.rel"), "--pairs", "12", "--seed", "4", "--pfx2as",
       Data("example.pfx2as"), "--geo", Data("example.geo.csv"), "--georel",
       Data("example.georel.csv")},
      {"bw", "--rel", Data("example.rel"), "--pairs", "12", "--seed", "4"},
  };
  TempDir a, b;
  for (const auto& cmd : commands) {
    for (const char* ext : {".csv", ".json"}) {
      const std::string name = cmd[0] + ext;
      auto ca = cmd, cb = cmd;
      ca.insert(ca.end(), {"--out", a / name});
      cb.insert(cb.end(), {"--out", b / name});
      const auto ra = Pan(ca);
      const auto rb = Pan(cb);
      ASSERT_EQ(ra.code, kExitOk) << name << ": " << ra.err;
      ASSERT_EQ(rb.code, kExitOk) << name << ": " << rb.err;
      EXPECT_EQ(ra.out, rb.out) << name;
      const std::string fa = Slurp(a / name);
      EXPECT_FALSE(fa.empty()) << name;
      EXPECT_EQ(fa, Slurp(b / name)) << name;
    }
  }
}

TEST(Cli, ThreadCountDoesNotChangeOutput) {
  const std::vector<std::string> cmd{"pod", "--choices", "10", "--trials", "8", "--seed", "9"};
  ::setenv("PAN_THREADS", "1", 1);
  const auto one = Pan(cmd);
  ::setenv("PAN_THREADS", "4", 1);
  const auto four = Pan(cmd);
  ::unsetenv("PAN_THREADS");
  EXPECT_EQ(one.out, four.out);
}

TEST(Cli, JsonEnvelope) {
  const auto r = Pan({"bw", "--rel", Data("example.rel"), "--pairs", "5", "--seed", "1", "--format",
                      "json"});
  ASSERT_EQ(r.code, kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["config"]["command"], "bw");
  EXPECT_EQ(j["config"]["seed"], 1);
  EXPECT_EQ(j["rows"].size(), 5u);
  EXPECT_TRUE(j["rows"][0].contains("increase_pct"));
}

TEST(Emit, CsvQuotingAndEmptyTable) {
  Table t;
  t.columns = {"name", "value", "flag"};
  EXPECT_EQ(RenderCsv(t), "name,value,flag\n");
  t.Add({std::string("a,b"), 1.5, true});
  t.Add({std::string("say \"hi\""), std::monostate{}, false});
  t.Add({std::string("line\nbreak"), -0.0, true});
  EXPECT_EQ(RenderCsv(t),
            "name,value,flag\n\"a,b\",1.5,true\n\"say \"\"hi\"\"\",,false\n\"line\nbreak\",0,true\n");
  EXPECT_THROW(t.Add({1.0}), std::invalid_argument);
}

TEST(Emit, DoubleFormatting) {
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(1.0 / 3.0), "0.3333333333333333");
  EXPECT_EQ(FormatDouble(1e300), "1e+300");
  EXPECT_EQ(std::stod(FormatDouble(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(FormatDouble(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Emit, JsonRoundTrip) {
  Table t;
  t.columns = {"s", "i", "u", "d", "b", "none"};
  Rng rng(1);
  // JSON has one integer type, so the signed column stays negative to keep
  // its alternative recoverable.
  for (int k = 0; k < 50; ++k) {
    t.Add({std::string("x\"y\\") + std::to_string(k), std::int64_t{-k - 1},
           std::uint64_t{rng.Below(1ull << 62)}, rng.Uniform(-1e6, 1e6), k % 2 == 0,
           std::monostate{}});
  }
  t.Add({std::string(), std::int64_t{-7}, std::uint64_t{0},
         std::numeric_limits<double>::infinity(), false, std::monostate{}});
  nlohmann::ordered_json cfg;
  cfg["command"] = "test";
  const std::string text = RenderJson(cfg, t);
  const auto back = TableFromJson(nlohmann::ordered_json::parse(text));
  EXPECT_EQ(back.columns, t.columns);
  ASSERT_EQ(back.rows.size(), t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) EXPECT_EQ(back.rows[i], t.rows[i]) << i;
  EXPECT_EQ(RenderJson(cfg, back), text);
}

TEST(Emit, FormatSelection) {
  EXPECT_EQ(FormatForPath("x/y.json"), Format::kJson);
  EXPECT_EQ(FormatForPath("y.csv"), Format::kCsv);
  EXPECT_EQ(FormatForPath("y"), Format::kCsv);
  EXPECT_THROW(ParseFormat("xml"), std::invalid_argument);
}

}  // namespace
}  // namespace pan::cli
