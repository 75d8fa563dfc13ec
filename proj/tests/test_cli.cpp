#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = PTAV_CLI_PATH;

struct Result {
  int status;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ptav_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result cli(const std::string& args, const fs::path& work) {
  const fs::path err = work / "stderr.txt";
  const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + (work / "stdout.txt").string() + "\" 2> \"" +
                          err.string() + "\"";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(err)};
}

fs::path make_sequence(const fs::path& work, const std::string& name, int frames = 30) {
  const fs::path spec = work / (name + ".synth");
  std::ofstream(spec) << "name = " << name << "\nframes = " << frames << "\nwidth = 160\nheight = 120\nstart_x = 30\n"
                      << "start_y = 40\n";
  const fs::path dir = work / "data" / name;
  const Result r = cli("synth \"" + spec.string() + "\" --out \"" + dir.string() + "\"", work);
  EXPECT_EQ(r.status, 0) << r.err;
  return dir;
}

}  // namespace

TEST(Cli, SynthThenTrackWritesReport) {
  const fs::path work = scratch("track");
  const fs::path seq = make_sequence(work, "alpha");
  const fs::path out = work / "out";
  const Result r = cli("track \"" + seq.string() + "\" --out \"" + out.string() + "\"", work);
  ASSERT_EQ(r.status, 0) << r.err;
  for (const char* f : {"report.json", "frames.csv", "events.log", "effective.cfg"}) EXPECT_TRUE(fs::exists(out / f)) << f;
  const auto j = nlohmann::json::parse(slurp(out / "report.json"));
  EXPECT_EQ(j["frames"], 30);
  EXPECT_EQ(j["precision_curve"].size(), 51u);
  EXPECT_EQ(j["success_curve"].size(), 21u);
  EXPECT_TRUE(j["fps"].is_null());
  EXPECT_GT(j["dpr_at_20"].get<double>(), 0.9);
  EXPECT_EQ(slurp(out / "frames.csv").substr(0, 30), "frame,x,y,w,h,center_err,iou\n0");
}

TEST(Cli, MissingGroundTruthFailsWithPath) {
  const fs::path work = scratch("missing");
  const fs::path seq = make_sequence(work, "beta", 12);
  fs::remove(seq / "groundtruth_rect.txt");
  const Result r = cli("track \"" + seq.string() + "\" --out \"" + (work / "out").string() + "\"", work);
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find((seq / "groundtruth_rect.txt").string()), std::string::npos) << r.err;
}

TEST(Cli, DeterministicRunsAreByteIdentical) {
  const fs::path work = scratch("repeat");
  const fs::path seq = make_sequence(work, "gamma");
  const std::string base = "track \"" + seq.string() + "\" --mode deterministic --V 5 --out ";
  ASSERT_EQ(cli(base + "\"" + (work / "a").string() + "\"", work).status, 0);
  ASSERT_EQ(cli(base + "\"" + (work / "b").string() + "\"", work).status, 0);
  EXPECT_EQ(slurp(work / "a" / "report.json"), slurp(work / "b" / "report.json"));
  EXPECT_EQ(slurp(work / "a" / "events.log"), slurp(work / "b" / "events.log"));
}

TEST(Cli, EffectiveConfigReproducesRun) {
  const fs::path work = scratch("effective");
  const fs::path seq = make_sequence(work, "delta");
  ASSERT_EQ(cli("track \"" + seq.string() + "\" --V 4 --tau2 1.7 --beta 2 --out \"" + (work / "a").string() + "\"", work)
                .status,
            0);
  ASSERT_EQ(cli("track \"" + seq.string() + "\" --config \"" + (work / "a" / "effective.cfg").string() + "\" --out \"" +
                    (work / "b").string() + "\"",
                work)
                .status,
            0);
  EXPECT_EQ(slurp(work / "a" / "report.json"), slurp(work / "b" / "report.json"));
  EXPECT_NE(slurp(work / "a" / "effective.cfg").find("V = 4\n"), std::string::npos);
}

TEST(Cli, FlagsOverrideConfigFile) {
  const fs::path work = scratch("precedence");
  const fs::path seq = make_sequence(work, "eps", 12);
  std::ofstream(work / "run.cfg") << "V = 7\ntau1 = 0.9\n";
  ASSERT_EQ(cli("track \"" + seq.string() + "\" --config \"" + (work / "run.cfg").string() + "\" --V 3 --out \"" +
                    (work / "o").string() + "\"",
                work)
                .status,
            0);
  const std::string cfg = slurp(work / "o" / "effective.cfg");
  EXPECT_NE(cfg.find("V = 3\n"), std::string::npos);
  EXPECT_NE(cfg.find("tau1 = 0.9\n"), std::string::npos);
}

TEST(Cli, BadConfigIsAnError) {
  const fs::path work = scratch("badcfg");
  const fs::path seq = make_sequence(work, "zeta", 12);
  std::ofstream(work / "run.cfg") << "gamma = 1\n";
  const Result r =
      cli("track \"" + seq.string() + "\" --config \"" + (work / "run.cfg").string() + "\" --out \"" + (work / "o").string() + "\"",
          work);
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("gamma"), std::string::npos) << r.err;
}

TEST(Cli, BenchOnEmptyDirectoryFails) {
  const fs::path work = scratch("bench_empty");
  fs::create_directories(work / "empty");
  const Result r = cli("bench \"" + (work / "empty").string() + "\" --out \"" + (work / "o").string() + "\"", work);
  EXPECT_NE(r.status, 0);
}

TEST(Cli, BenchSkipsUnreadableSequence) {
  const fs::path work = scratch("bench");
  make_sequence(work, "one", 15);
  const fs::path two = make_sequence(work, "two", 15);
  make_sequence(work, "three", 15);
  fs::remove(two / "groundtruth_rect.txt");
  const Result r = cli("bench \"" + (work / "data").string() + "\" --out \"" + (work / "o").string() + "\"", work);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.err.find("warning: skipping"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(work / "o" / "aggregate.json"));
  EXPECT_EQ(j["sequences"], nlohmann::json::array({"one", "three"}));
  EXPECT_EQ(j["skipped"], nlohmann::json::array({"two"}));
  EXPECT_EQ(j["frames"], 30);
  const double mean = (nlohmann::json::parse(slurp(work / "o" / "one" / "report.json"))["auc"].get<double>() +
                       nlohmann::json::parse(slurp(work / "o" / "three" / "report.json"))["auc"].get<double>()) /
                      2.0;
  EXPECT_NEAR(j["mean_auc"].get<double>(), mean, 1e-12);
}

TEST(Cli, ParallelModeReportsTiming) {
  const fs::path work = scratch("parallel");
  const fs::path seq = make_sequence(work, "eta", 20);
  ASSERT_EQ(cli("track \"" + seq.string() + "\" --mode parallel --out \"" + (work / "o").string() + "\"", work).status, 0);
  const auto j = nlohmann::json::parse(slurp(work / "o" / "report.json"));
  EXPECT_GT(j["fps"].get<double>(), 0.0);
}

TEST(Cli, UsageErrors) {
  const fs::path work = scratch("usage");
  EXPECT_NE(cli("", work).status, 0);
  EXPECT_NE(cli("track", work).status, 0);
  EXPECT_NE(cli("track x --out y --mode sideways", work).status, 0);
}
