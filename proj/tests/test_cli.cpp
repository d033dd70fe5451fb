#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(NEMATIC_CLI_PATH) + " " + args + " 2>&1";
  Outcome o;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return o;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) o.out += buf;
  const int status = pclose(p);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nematic_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Cli, FitRateOnPlantedData) {
  const fs::path dir = scratch("fit");
  std::ofstream os(dir / "data.csv");
  os << "t,q\n";
  for (int k = 0; k <= 400; ++k) os << 0.5 * k << ',' << 2.0 * std::pow(1.0 + 0.5 * k, -3.0) << '\n';
  os.close();
  const Outcome o = run("fit-rate " + (dir / "data.csv").string() + " q");
  EXPECT_EQ(o.code, 0) << o.out;
  EXPECT_EQ(o.out.substr(0, 6), "3.000\n");
  EXPECT_EQ(run("fit-rate " + (dir / "data.csv").string() + " missing").code, 1);
  fs::remove_all(dir);
}

TEST(Cli, MissingConfigIsAnError) {
  const Outcome o = run("run /nonexistent/missing.cfg");
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.out.find("missing.cfg"), std::string::npos) << o.out;
}

TEST(Cli, UnknownKeyIsAnError) {
  const fs::path dir = scratch("bad");
  std::ofstream(dir / "bad.cfg") << "[grid]\nnx = 16\nwobble = 2\n";
  const Outcome o = run("--out " + dir.string() + " run " + (dir / "bad.cfg").string());
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.out.find("wobble"), std::string::npos) << o.out;
  fs::remove_all(dir);
}

TEST(Cli, ListPresets) {
  const Outcome o = run("list-presets");
  EXPECT_EQ(o.code, 0);
  for (const char* name : {"energy-law-autonomous", "omega-limit", "rate-gamma2", "lifting-check", "minimizer-perturbation"})
    EXPECT_NE(o.out.find(name), std::string::npos) << name;
  EXPECT_EQ(run("preset no-such-preset").code, 1);
  EXPECT_EQ(run("").code, 1);
}

TEST(Cli, MajorantReportsBlowUp) {
  const fs::path dir = scratch("maj");
  std::ofstream(dir / "m.cfg") << "[run]\nname = maj\n[majorant]\nC_star = 1\nY0 = 1\n";
  const Outcome o = run("--out " + dir.string() + " majorant " + (dir / "m.cfg").string());
  EXPECT_EQ(o.code, 0) << o.out;
  EXPECT_NE(o.out.find("T_max 0.3465"), std::string::npos) << o.out;
  EXPECT_TRUE(fs::exists(dir / "maj" / "majorant.csv"));
  fs::remove_all(dir);
}

TEST(Cli, SmallRunPasses) {
  const fs::path dir = scratch("run");
  std::ofstream(dir / "r.cfg") << "[grid]\nnx = 12\nny = 12\n[forcing]\nfamily = polynomial-decay\n"
                                  "[run]\nname = small\nt_end = 0.1\ndt = 0.01\nsample_every = 2\n";
  const Outcome o = run("--out " + dir.string() + " run " + (dir / "r.cfg").string());
  EXPECT_EQ(o.code, 0) << o.out;
  EXPECT_NE(o.out.find("PASS max-principle"), std::string::npos) << o.out;
  EXPECT_TRUE(fs::exists(dir / "small" / "records.csv"));
  fs::remove_all(dir);
}
