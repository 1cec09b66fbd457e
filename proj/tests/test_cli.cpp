#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lanekeep/mlp.hpp"
#include "lanekeep/pnm.hpp"
#include "lanekeep/render.hpp"

using namespace lanekeep;
namespace fs = std::filesystem;

namespace
{
struct Result
{
  int code = -1;
  std::string out;
  std::string err;
};

fs::path work()
{
  static const fs::path dir = [] {
    const fs::path p = fs::temp_directory_path() / "lanekeep_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path &p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path &p, const std::string &text)
{
  std::ofstream(p, std::ios::binary) << text;
}

Result run(const std::string &args)
{
  const fs::path err = work() / "stderr.txt";
  const std::string cmd = std::string(LANEKEEP_CLI) + " " + args + " 2>" + err.string();
  Result r;
  FILE *pipe = popen(cmd.c_str(), "r");
  if (!pipe)
    return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0)
    r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

fs::path centred_frame(const std::string &name, double offset = 0.0)
{
  TrackSpec t;
  t.segments = {Straight{10.0}};
  const Track track(t);
  RenderSpec rs;
  rs.noise_sigma = 0;
  const fs::path p = work() / name;
  write_pnm_file(p.string(), render_frame(track, state_on_track(track, 1.0, offset), VehicleParams{}, rs));
  return p;
}

double parse_deflection(const std::string &out)
{
  const auto pos = out.find("deflection ");
  if (pos == std::string::npos)
    return 1e9;
  return std::stod(out.substr(pos + 11));
}

// Small compare/train budget so the suite stays quick.
const char *quick_config = R"({
  "sim": {"duration": 4},
  "training": {"episodes": 1, "episode_duration": 4, "epochs": 5}
})";
} // namespace

TEST(Cli, UsageErrors)
{
  EXPECT_NE(run("").code, 0);
  EXPECT_NE(run("fly").code, 0);
  EXPECT_NE(run("simulate").code, 0);
  EXPECT_NE(run("detect " + centred_frame("u.pgm").string() + " --bogus").code, 0);
  const Result help = run("--help");
  EXPECT_EQ(help.code, 0);
  for (const char *sub : {"simulate", "detect", "calibrate", "train-nn", "compare"})
    EXPECT_NE(help.out.find(sub), std::string::npos) << sub;
}

TEST(Cli, FailuresGiveOneLineReason)
{
  const fs::path cfg = work() / "bad.json";
  spit(cfg, R"({"sim": {"sed": 1}})");
  const Result r = run("simulate " + cfg.string() + " --out " + (work() / "bad").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("lanekeep: ", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_NE(r.err.find("sim.sed"), std::string::npos);
}

TEST(Cli, DetectBlobOnSymmetricFrame)
{
  const Result r = run("detect " + centred_frame("sym.pgm").string() + " --method blob");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("label"), std::string::npos);
  EXPECT_LT(std::abs(parse_deflection(r.out)), 20.0);
}

TEST(Cli, DetectHoughAndBirdseye)
{
  const fs::path frame = centred_frame("sym2.pgm");
  const Result h = run("detect " + frame.string() + " --method hough");
  ASSERT_EQ(h.code, 0) << h.err;
  EXPECT_NE(h.out.find("votes"), std::string::npos);
  EXPECT_LT(std::abs(parse_deflection(h.out)), 20.0);

  const fs::path warped = work() / "warped.pgm";
  const Result b = run("detect " + frame.string() + " --method birdseye --warped " + warped.string());
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_LT(std::abs(parse_deflection(b.out)), 20.0);
  const GrayImage w = read_pnm_file(warped.string());
  EXPECT_EQ(w.width(), 64);
  EXPECT_EQ(w.height(), 100);
}

TEST(Cli, DetectReportsMissingLane)
{
  const fs::path blank = work() / "blank.pgm";
  write_pnm_file(blank.string(), GrayImage(160, 120, 200));
  const Result r = run("detect " + blank.string() + " --method blob");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("lane not found"), std::string::npos);
  EXPECT_NE(run("detect " + blank.string() + " --method sonar").code, 0);
}

TEST(Cli, CalibrateIdentityPairs)
{
  const fs::path pairs = work() / "pairs.txt";
  spit(pairs, "# u v X Y\n0 0 0 0\n1 0 1 0\n0 1 0 1\n1 1 1 1\n");
  const fs::path out = work() / "H.txt";
  const Result r = run("calibrate " + pairs.string() + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(slurp(out));
  const Homography h = parse_homography(in);
  const double d = h(2, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      EXPECT_NEAR(h(i, j), i == j ? d : 0.0, 1e-9);
  const auto pos = r.out.find("mean reprojection error ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_LT(std::stod(r.out.substr(pos + 24)), 1e-9);

  spit(pairs, "0 0 0 0\n1 0 1 0\n");
  EXPECT_EQ(run("calibrate " + pairs.string()).code, 1);
}

TEST(Cli, SimulateWritesDeterministicOutputs)
{
  const fs::path cfg = work() / "sim.json";
  spit(cfg, R"({"sim": {"duration": 2, "dump_frames": true}})");
  const fs::path a = work() / "sim_a", b = work() / "sim_b";
  const Result ra = run("simulate " + cfg.string() + " --out " + a.string());
  ASSERT_EQ(ra.code, 0) << ra.err;
  ASSERT_EQ(run("simulate " + cfg.string() + " --out " + b.string()).code, 0);
  EXPECT_NE(ra.out.find("status completed"), std::string::npos);
  for (const char *f : {"log.csv", "summary.txt", "frames/frame_000001.pgm", "frames/frame_000040.pgm"})
  {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_FALSE(fs::exists(a / "frames/frame_000041.pgm"));
}

TEST(Cli, TrainWritesPolicy)
{
  const fs::path cfg = work() / "train.json";
  spit(cfg, quick_config);
  const fs::path policy = work() / "policy.txt";
  const Result r = run("train-nn " + cfg.string() + " --episodes 1 --sigma 5 --out " + policy.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("held-out rmse"), std::string::npos);
  std::istringstream in(slurp(policy));
  const MlpPolicy p = parse_policy(in);
  EXPECT_EQ(p.sizes, (std::vector<int>{3, 16, 1}));
  EXPECT_EQ(run("train-nn " + cfg.string() + " --episodes 0 --sigma 5 --out " + policy.string()).code, 1);
}

TEST(Cli, CompareIsByteReproducible)
{
  const fs::path cfg = work() / "cmp.json";
  spit(cfg, quick_config);
  const fs::path a = work() / "cmp_a", b = work() / "cmp_b";
  const Result ra = run("compare " + cfg.string() + " --out " + a.string());
  ASSERT_EQ(ra.code, 0) << ra.err;
  ASSERT_EQ(run("compare " + cfg.string() + " --out " + b.string()).code, 0);
  EXPECT_NE(ra.out.find("Std. dev."), std::string::npos);
  EXPECT_NE(ra.out.find("best by standard deviation"), std::string::npos);
  for (const char *f :
       {"log_normal.csv", "log_pid.csv", "log_neural.csv", "policy.txt", "report.txt", "report.csv", "plot.svg"})
  {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const std::string svg = slurp(a / "plot.svg");
  std::size_t polylines = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1))
    ++polylines;
  EXPECT_EQ(polylines, 6u);
  EXPECT_EQ(slurp(a / "report.csv").rfind("param,signal,normal,pid,neural\n", 0), 0u);
}
