#include <gtest/gtest.h>

#include <sys/wait.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "flrwkg/flrwkg.hpp"

using namespace flrwkg;
namespace fs = std::filesystem;

namespace {

const char* kDeSitter = R"([run]
name = ds
seed = 5

[background]
family = exponential
H = 1
t0 = 1

[mass]
n = 3
m = 2

[grid]
points = 8

[time]
horizon = 2
dt_max = 0.02
record_dt = 0.1

[initial]
profile = random
amplitude = 0.3
band = 2
)";

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("flrwkg_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  f << s;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FLRWKG_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string with(const std::string& base, const std::string& from, const std::string& to) {
  std::string s = base;
  const auto p = s.find(from);
  if (p == std::string::npos) throw std::logic_error("pattern not found: " + from);
  return s.replace(p, from.size(), to);
}

}  // namespace

TEST(Config, ParsesScenario) {
  const auto c = parse_config(kDeSitter);
  EXPECT_EQ(c.name, "ds");
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.output_dir, "ds");
  EXPECT_EQ(c.profile.n, 3);
  EXPECT_DOUBLE_EQ(c.profile.m, 2.0);
  EXPECT_EQ(c.grid.points, 8);
  EXPECT_EQ(c.grid.n, 3);
  EXPECT_DOUBLE_EQ(c.horizon, 2.0);
  EXPECT_DOUBLE_EQ(c.solver.dt_max, 0.02);
  EXPECT_EQ(c.initial.profile, "random");
  EXPECT_FALSE(c.gamma.has_value());
  EXPECT_FALSE(c.nonlinearity.has_value());
}

TEST(Config, RejectsUnknownSectionsAndKeys) {
  try {
    parse_config(std::string(kDeSitter) + "\n[extra]\nx = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("extra"), std::string::npos);
  }
  try {
    parse_config(with(kDeSitter, "m = 2", "m = 2\nmas = 3"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("mass.mas"), std::string::npos);
  }
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(parse_config(""), ConfigError);
  EXPECT_THROW(parse_config(with(kDeSitter, "family = exponential", "family = cosh")), ConfigError);
  EXPECT_THROW(parse_config(with(kDeSitter, "H = 1", "H = one")), ConfigError);
  EXPECT_THROW(parse_config(with(kDeSitter, "m = 2", "m = -2")), ConfigError);
  EXPECT_THROW(parse_config(with(kDeSitter, "points = 8", "points = 7")), ConfigError);
  EXPECT_THROW(parse_config(with(kDeSitter, "horizon = 2", "horizon = 0.5")), ConfigError);
  EXPECT_THROW(parse_config(with(kDeSitter, "profile = random", "profile = noise")), ConfigError);
  EXPECT_THROW(parse_config(std::string(kDeSitter) + "[check]\nconditions = expansion,bogus\n"), ConfigError);
}

TEST(Config, SyntaxErrorCarriesLine) {
  try {
    parse_config("[run]\nname = x\n[background\n", "bad.ini");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.ini:3"), std::string::npos) << e.what();
  }
}

TEST(Config, PotentialAndNonlinearityAreExclusive) {
  const std::string g = std::string(kDeSitter) + "[gamma]\nform = constant\nc = 1\n";
  EXPECT_NO_THROW(parse_config(g + "[nonlinearity]\nalpha = 2\n"));
  EXPECT_NO_THROW(parse_config(g + "[potential]\nalpha = 2\n"));
  EXPECT_THROW(parse_config(g + "[nonlinearity]\nalpha = 2\n[potential]\nalpha = 2\n"), ConfigError);
  EXPECT_THROW(parse_config(std::string(kDeSitter) + "[potential]\nalpha = 2\n"), ConfigError);
}

TEST(Config, HashIgnoresLayoutButNotValues) {
  const auto a = parse_config(kDeSitter);
  const auto b = parse_config(with(with(kDeSitter, "H = 1", "H    =    1"), "[mass]\nn = 3\nm = 2", "[mass]\nm = 2\nn = 3"));
  const auto c = parse_config(with(kDeSitter, "m = 2", "m = 2.5"));
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_NE(a.hash, c.hash);
  EXPECT_EQ(hex64(a.hash).size(), 16u);
}

TEST(Config, SweepAxes) {
  const auto c = parse_config(std::string(kDeSitter) + "[sweep]\nbackground.H = 0:1:3\nmass.m = 1,2\n");
  ASSERT_EQ(c.sweep.axes.size(), 2u);
  EXPECT_EQ(c.sweep.axes[0].key, "background.H");
  EXPECT_EQ(c.sweep.axes[0].values, (std::vector<std::string>{"0", "0.5", "1"}));
  EXPECT_EQ(c.sweep.axes[1].values, (std::vector<std::string>{"1", "2"}));
  EXPECT_THROW(parse_config(std::string(kDeSitter) + "[sweep]\nbackground.Q = 1,2\n"), ConfigError);
  EXPECT_THROW(parse_config(std::string(kDeSitter) + "[sweep]\nH = 1,2\n"), ConfigError);
}

TEST(Report, Fnv1aVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(hex64(0xaf63dc4c8601ec8cULL), "af63dc4c8601ec8c");
}

TEST(Report, NumberFormatRoundTrips) {
  for (double x : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, -1.7976931348623157e308}) {
    const auto s = fmt(x);
    double y = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), y);
    EXPECT_EQ(x, y) << s;
  }
  EXPECT_EQ(fmt(0.1), "0.1");
  EXPECT_EQ(fmt(INFINITY), "inf");
  EXPECT_EQ(fmt(-INFINITY), "-inf");
  EXPECT_EQ(fmt(NAN), "nan");
  EXPECT_EQ(jnum(INFINITY).get<std::string>(), "inf");
  EXPECT_DOUBLE_EQ(jnum(2.5).get<double>(), 2.5);
}

TEST(Report, AtomicWriteCreatesDirectories) {
  const auto d = scratch("atomic");
  const auto p = d / "a" / "b" / "out.txt";
  write_atomic(p, "first");
  write_atomic(p, "second");
  EXPECT_EQ(slurp(p), "second");
  std::size_t count = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(p.parent_path())) ++count;
  EXPECT_EQ(count, 1u);
}

TEST(Report, CsvTableLayout) {
  const auto c = parse_config(kDeSitter);
  CsvTable t(c, "demo", {"x", "y"});
  t.note("hello");
  t.row({"1", "2"});
  EXPECT_THROW(t.row({"1"}), std::logic_error);
  const auto s = t.str();
  EXPECT_EQ(s.rfind("# flrwkg ", 0), 0u);
  EXPECT_NE(s.find("# config_hash " + hex64(c.hash) + "\n"), std::string::npos);
  EXPECT_NE(s.find("# hello\nx,y\n1,2\n"), std::string::npos);
}

TEST(Report, SnapshotRoundTrip) {
  TorusGrid g{2, 4, 3.0};
  FieldState s{1.25, std::vector<double>(16), std::vector<double>(16)};
  for (int i = 0; i < 16; ++i) {
    s.u[i] = 0.5 * i - 3.0;
    s.v[i] = 1.0 / (i + 1);
  }
  const auto b = snapshot_bytes(g, s);
  EXPECT_EQ(b.size(), 4u + 12u + 4u + 16u + 2u * 16u * 8u);
  const auto r = read_snapshot(b);
  EXPECT_EQ(r.grid.n, 2);
  EXPECT_EQ(r.grid.points, 4);
  EXPECT_EQ(r.grid.L, 3.0);
  EXPECT_EQ(r.state.t, 1.25);
  EXPECT_EQ(r.state.u, s.u);
  EXPECT_EQ(r.state.v, s.v);
  EXPECT_THROW(read_snapshot("XXXX" + b.substr(4)), std::runtime_error);
  EXPECT_THROW(read_snapshot(b.substr(0, b.size() - 1)), std::runtime_error);
}

TEST(Commands, CheckReportsConditions) {
  auto c = parse_config(kDeSitter);
  c.check.samples = 200;
  auto r = run_checks(c);
  ASSERT_EQ(r.items.size(), 2u);
  EXPECT_TRUE(r.pass);
  auto bad = parse_config(with(with(kDeSitter, "t0 = 1", "beta = 2\nt0 = 1"), "m = 2", "m = 1.8"));
  bad.check.samples = 200;
  r = run_checks(bad);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.items[1].name, "mass");
  EXPECT_FALSE(r.items[1].pass);
}

TEST(Commands, ZeroDataStaysZero) {
  const auto d = scratch("zero");
  const auto c = parse_config(with(kDeSitter, "profile = random", "profile = zero"));
  CommandContext ctx{d, &std::cout, true};
  EXPECT_EQ(cmd_simulate(c, ctx), kExitPass);
  std::istringstream csv(slurp(d / "trajectory.csv"));
  std::string line;
  int rows = 0;
  bool header = false;
  while (std::getline(csv, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const auto f = detail::split(line, ',');
    ASSERT_EQ(f.size(), trajectory_columns().size());
    EXPECT_EQ(f[3], "0");
    EXPECT_EQ(f[4], "0");
    ++rows;
  }
  EXPECT_EQ(rows, 11);
}

TEST(CliProcess, ExitCodes) {
  const auto d = scratch("exit");
  spit(d / "ds.ini", kDeSitter);
  spit(d / "beta2.ini", with(with(kDeSitter, "t0 = 1", "beta = 2\nt0 = 1"), "m = 2", "m = 1.8"));
  spit(d / "empty.ini", "");
  spit(d / "typo.ini", with(kDeSitter, "H = 1", "HH = 1"));
  EXPECT_EQ(run_cli("check " + (d / "ds.ini").string() + " --out " + (d / "o1").string()), 0);
  EXPECT_TRUE(fs::exists(d / "o1" / "check.json"));
  EXPECT_EQ(run_cli("check " + (d / "beta2.ini").string() + " --out " + (d / "o2").string()), 1);
  EXPECT_EQ(run_cli("check " + (d / "empty.ini").string() + " --out " + (d / "o3").string()), 2);
  EXPECT_EQ(run_cli("check " + (d / "typo.ini").string() + " --out " + (d / "o4").string()), 2);
  EXPECT_EQ(run_cli("check " + (d / "missing.ini").string()), 2);
  EXPECT_EQ(run_cli("verify " + (d / "ds.ini").string() + " --suite nope"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("lifespan " + (d / "ds.ini").string() + " --out " + (d / "o5").string()), 2);
}

TEST(CliProcess, OutputRootFromEnvironment) {
  const auto d = scratch("env");
  spit(d / "ds.ini", kDeSitter);
  const std::string cmd = "FLRWKG_OUTPUT_ROOT=" + (d / "root").string() + " " + FLRWKG_CLI_PATH + " check " +
                          (d / "ds.ini").string() + " -q";
  const int st = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(st));
  EXPECT_EQ(WEXITSTATUS(st), 0);
  EXPECT_TRUE(fs::exists(d / "root" / "ds" / "check.json"));
}

TEST(CliProcess, SimulateIsDeterministic) {
  const auto d = scratch("det");
  spit(d / "ds.ini", kDeSitter);
  ASSERT_EQ(run_cli("simulate " + (d / "ds.ini").string() + " --out " + (d / "a").string()), 0);
  ASSERT_EQ(run_cli("simulate " + (d / "ds.ini").string() + " --out " + (d / "b").string()), 0);
  const auto a = slurp(d / "a" / "trajectory.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(d / "b" / "trajectory.csv"));
  EXPECT_EQ(slurp(d / "a" / "summary.json"), slurp(d / "b" / "summary.json"));
}

TEST(CliProcess, LifespanShrinksWithDataNorm) {
  const auto d = scratch("life");
  const std::string base = std::string(kDeSitter) +
                           "[gamma]\nform = exponential\nrate = 1\n[lifespan]\nalpha0 = 1\nalpha = 2\ndata_norm = ";
  spit(d / "a.ini", base + "0.1\n");
  spit(d / "b.ini", base + "0.2\n");
  ASSERT_EQ(run_cli("lifespan " + (d / "a.ini").string() + " --out " + (d / "a").string()), 0);
  ASSERT_EQ(run_cli("lifespan " + (d / "b.ini").string() + " --out " + (d / "b").string()), 0);
  const auto ja = json::parse(slurp(d / "a" / "lifespan.json"));
  const auto jb = json::parse(slurp(d / "b" / "lifespan.json"));
  ASSERT_TRUE(ja["bound"].is_number());
  ASSERT_TRUE(jb["bound"].is_number());
  EXPECT_GT(ja["bound"].get<double>(), 0.0);
  EXPECT_LE(jb["bound"].get<double>(), ja["bound"].get<double>());
}

TEST(CliProcess, SweepWritesOneRowPerCell) {
  const auto d = scratch("sweep");
  spit(d / "s.ini", std::string(kDeSitter) +
                        "[check]\nconditions = expansion,mass\nhorizon = 100\nsamples = 100\n"
                        "[sweep]\nbackground.H = 0.5:1.5:3\nmass.m = 1,2\n");
  ASSERT_EQ(run_cli("sweep " + (d / "s.ini").string() + " --out " + (d / "o").string()), 0);
  std::istringstream csv(slurp(d / "o" / "sweep.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(csv, line))
    if (!line.empty() && line[0] != '#') ++rows;
  EXPECT_EQ(rows, 6);
}
