#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(SPHERE_PINCH_CLI) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

std::string strip_timestamp(const std::string& text) {
  std::istringstream is(text);
  std::string line, out;
  while (std::getline(is, line))
    if (line.rfind("# timestamp", 0) != 0) out += line + "\n";
  return out;
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "sphere_pinch_cli_test";
  fs::create_directories(dir);
  return dir;
}

} // namespace

TEST(Cli, SpectrumCsvHasProvenanceAndRows) {
  const auto r = run("spectrum --family round --n 3 --N 400 --lmax 8.5");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("# sphere-pinch ", 0), 0u);
  EXPECT_NE(r.out.find("# config {"), std::string::npos);
  EXPECT_NE(r.out.find("# timestamp "), std::string::npos);
  const auto lines = data_lines(r.out);
  ASSERT_GE(lines.size(), 2u);
  EXPECT_NE(lines[0].find("lambda"), std::string::npos);
}

TEST(Cli, SpectrumJsonMatchesRoundSphere) {
  const auto r = run("spectrum --family round --n 3 --N 400 --lmax 3.5 --format json");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["schema"], 1);
  ASSERT_TRUE(j.contains("summary"));
  ASSERT_TRUE(j.contains("rows"));
  EXPECT_NEAR(j["summary"]["lambda_1"].get<double>(), 3.0, 1e-4);
}

TEST(Cli, ValidateExitCodes) {
  EXPECT_EQ(run("validate --family pinch --n 3 --k 1000").code, 0);
  EXPECT_EQ(run("validate --family round --n 4").code, 0);
  const fs::path bad = scratch_dir() / "bad_slope.txt";
  {
    std::ofstream out(bad);
    out << "warped n=3 R=1.5707963267948966\n"
           "a 0 1.5707963267948966 scaled-sine 1 1 0\n"
           "b 0 1.5707963267948966 scaled-cosine-shifted 0.9 1 0\n";
  }
  EXPECT_EQ(run("validate --family profile --profile " + bad.string()).code, 4);
}

TEST(Cli, ConfigErrorsExitWithTwo) {
  EXPECT_EQ(run("bogus").code, 2);
  EXPECT_EQ(run("spectrum --n 2").code, 2);
  EXPECT_EQ(run("spectrum --format xml").code, 2);
  EXPECT_EQ(run("gh --family round --resolution 64").code, 2);
  EXPECT_EQ(run("spectrum --no-such-flag").code, 2);
  EXPECT_EQ(run("spectrum --family profile --profile /nonexistent/file").code, 2);
}

TEST(Cli, NumericalFailureExitsWithThree) {
  // b changes sign inside the interval, so the radial operator is not
  // positive and the eigensolver breaks down.
  const fs::path bad = scratch_dir() / "sign_change.txt";
  {
    std::ofstream out(bad);
    out << "warped n=3 R=1.5707963267948966\n"
           "a 0 1.5707963267948966 scaled-sine 1 1 0\n"
           "b 0 1.5707963267948966 scaled-cosine-shifted 1 2 0\n";
  }
  EXPECT_EQ(run("spectrum --family profile --N 200 --lmax 10 --profile " + bad.string()).code, 3);
}

TEST(Cli, SweepEmitsOneRowPerK) {
  const auto r = run("sweep --command volume --k 100,1000,10000 --format json");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["rows"].size(), 3u);
  double prev = 1e9;
  for (const auto& row : j["rows"]) {
    EXPECT_EQ(row["status"], "ok");
    const double v = row["volume"].get<double>();
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Cli, OutputIsReproducibleModuloTimestamp) {
  const std::string args = "curvature --family pinch --k 1000 --grid-points 256";
  const auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(strip_timestamp(a.out), strip_timestamp(b.out));
}

TEST(Cli, ProfileExportRoundTrips) {
  const fs::path prof = scratch_dir() / "pinch_1000.txt";
  const auto direct = run("volume --family pinch --n 3 --k 1000 --format json --export-profile " + prof.string());
  ASSERT_EQ(direct.code, 0);
  ASSERT_TRUE(fs::exists(prof));
  const auto via = run("volume --family profile --profile " + prof.string() + " --format json");
  ASSERT_EQ(via.code, 0);
  const auto j1 = nlohmann::json::parse(direct.out), j2 = nlohmann::json::parse(via.out);
  EXPECT_NEAR(j1["summary"]["volume"].get<double>(), j2["summary"]["volume"].get<double>(), 1e-12);
}

TEST(Cli, ConfigFileWithOverride) {
  const fs::path cfg = scratch_dir() / "run.toml";
  {
    std::ofstream out(cfg);
    out << "command=\"volume\"\nfamily=\"pinch\"\nk=100\nformat=\"json\"\n";
  }
  const auto r = run("--config " + cfg.string() + " --k 1000");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["summary"]["volume"].get<double>(), 0.6238311615668507, 1e-9);
  const fs::path bad = scratch_dir() / "bad.toml";
  {
    std::ofstream out(bad);
    out << "command=\"volume\"\nunknown_key=3\n";
  }
  EXPECT_EQ(run("--config " + bad.string()).code, 2);
}
