#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

std::string cli_path() { return MKLAB_CLI_PATH; }

int run_cli(const std::string& args) {
  std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string capture_cli(const std::string& args) {
  fs::path tmp = fs::temp_directory_path() / "mklab_cli_capture.txt";
  std::string cmd = cli_path() + " " + args + " > " + tmp.string() + " 2>&1";
  (void)!std::system(cmd.c_str());
  std::ifstream is(tmp);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, ListIsStableAndComplete) {
  std::string out = capture_cli("list");
  for (const char* name : {"weak-consistency", "strong-path", "prop12", "lb-check",
                           "dgkl-sweep", "concentration", "koranyi"}) {
    EXPECT_NE(out.find(name), std::string::npos) << name;
  }
  // stable ordering
  EXPECT_LT(out.find("weak-consistency"), out.find("strong-path"));
  EXPECT_LT(out.find("strong-path"), out.find("prop12"));
  EXPECT_LT(out.find("dgkl-sweep"), out.find("concentration"));
  EXPECT_EQ(capture_cli("list"), out);
}

TEST(Cli, MissingSeedFails) {
  fs::path dir = fresh_dir("mklab_cli_noseed");
  EXPECT_EQ(run_cli("run koranyi --outdir " + dir.string()), 1);
}

TEST(Cli, UnknownExperimentFails) {
  EXPECT_EQ(run_cli("run frobnicate --seed 1"), 1);
}

TEST(Cli, UnwritableOutdirFails) {
  EXPECT_EQ(run_cli("run koranyi --count 3 --seed 1 --outdir /proc/nonexistent/x"), 1);
}

TEST(Cli, MalformedConfigFails) {
  fs::path dir = fresh_dir("mklab_cli_badcfg");
  fs::path cfg = dir / "bad.json";
  {
    std::ofstream os(cfg);
    os << "{ this is not json";
  }
  EXPECT_EQ(run_cli("run koranyi --config " + cfg.string() + " --seed 1 --outdir " +
                    dir.string()),
            1);
}

TEST(Cli, KoranyiProducesCsvAndManifest) {
  fs::path dir = fresh_dir("mklab_cli_koranyi");
  ASSERT_EQ(run_cli("run koranyi --seed 5 --count 8 --outdir " + dir.string()), 0);
  std::string csv = slurp(dir / "koranyi-5.csv");
  EXPECT_NE(csv.find("j,psi,theta,px,py,pz,r"), std::string::npos);
  auto manifest = nlohmann::json::parse(slurp(dir / "koranyi-5.manifest.json"));
  EXPECT_EQ(manifest.at("experiment"), "koranyi");
  EXPECT_EQ(manifest.at("seed"), 5);
  EXPECT_EQ(manifest.at("rows"), 8);
  EXPECT_TRUE(manifest.contains("config_hash"));
  EXPECT_TRUE(manifest.at("config").contains("params"));
  EXPECT_TRUE(fs::exists(dir / "koranyi-5.report.json"));
}

TEST(Cli, DgklSweepColumns) {
  fs::path dir = fresh_dir("mklab_cli_dgkl");
  int code = run_cli(
      "run dgkl-sweep --model nested --alphas 2^-3..2^-5 --points 2 "
      "--mc-samples 4000 --seed 7 --outdir " +
      dir.string());
  ASSERT_EQ(code, 0);
  std::string csv = slurp(dir / "dgkl-sweep-7.csv");
  EXPECT_NE(csv.find("alpha,point,d_measure,stderr,bound_4a,exact_d3alpha,"
                     "exact_lower,violates"),
            std::string::npos);
  // 3 alphas x 2 points + header
  int lines = 0;
  for (char c : csv) lines += c == '\n';
  EXPECT_EQ(lines, 7);
}

TEST(Cli, ByteIdenticalReruns) {
  fs::path dir1 = fresh_dir("mklab_cli_rep1");
  fs::path dir2 = fresh_dir("mklab_cli_rep2");
  std::string args =
      "run weak-consistency --model uniform1 --eta coordinate --ns 40,80 "
      "--test-size 100 --trials 3 --seed 99 --outdir ";
  ASSERT_EQ(run_cli(args + dir1.string()), 0);
  ASSERT_EQ(run_cli(args + dir2.string()), 0);
  std::string a = slurp(dir1 / "weak-consistency-99.csv");
  std::string b = slurp(dir2 / "weak-consistency-99.csv");
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, b);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  fs::path dir = fresh_dir("mklab_cli_config");
  fs::path cfg = dir / "cfg.json";
  {
    std::ofstream os(cfg);
    os << R"({
      "seed": 3,
      "model": {"kind": "uniform_cube", "dim": 1},
      "eta": {"name": "coordinate"},
      "params": {"rs": [0.25, 0.125], "epsilon": 0.1, "points": 200}
    })";
  }
  ASSERT_EQ(run_cli("run lb-check --config " + cfg.string() + " --outdir " +
                    dir.string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "lb-check-3.csv"));
  // flag overrides the config seed
  ASSERT_EQ(run_cli("run lb-check --config " + cfg.string() + " --seed 4 --outdir " +
                    dir.string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "lb-check-4.csv"));
  auto manifest = nlohmann::json::parse(slurp(dir / "lb-check-4.manifest.json"));
  EXPECT_EQ(manifest.at("seed"), 4);
}

TEST(Cli, StrongPathAndConcentrationRun) {
  fs::path dir = fresh_dir("mklab_cli_misc");
  ASSERT_EQ(run_cli("run strong-path --model dirac --eta const --eta-value 0.3678794 "
                    "--n-max 64 --schedule log --seed 2 --outdir " +
                    dir.string()),
            0);
  std::string csv = slurp(dir / "strong-path-2.csv");
  EXPECT_NE(csv.find("n,k,error"), std::string::npos);

  ASSERT_EQ(run_cli("run concentration --model uniform1 --eta halfplane --n 300 --k 17 "
                    "--trials 20 --test-points 100 --seed 2 --outdir " +
                    dir.string()),
            0);
  std::string csv2 = slurp(dir / "concentration-2.csv");
  EXPECT_NE(csv2.find("epsilon,empirical_tail,stderr,bound,vacuous,pass"),
            std::string::npos);

  ASSERT_EQ(run_cli("run lb-check --model nested --eta nested_parity --rs 0.5,0.25 "
                    "--points 300 --seed 2 --outdir " +
                    dir.string()),
            0);
}

TEST(Cli, Prop12SmallRun) {
  fs::path dir = fresh_dir("mklab_cli_prop12");
  int code = run_cli(
      "run prop12 --p 0.3678794 --horizon 6 --trials 500 --seed 1 --outdir " +
      dir.string());
  ASSERT_EQ(code, 0);
  std::string csv = slurp(dir / "prop12-1.csv");
  EXPECT_NE(csv.find("i,k,n,eps,delta,band_freq,qualifying,disjoint,wrong_freq,"
                     "wrong_prob,partial_sum"),
            std::string::npos);
}
