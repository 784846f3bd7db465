#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(PPQC_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

const std::string kFixtures = PPQC_DOCS_DIR "/fixtures";

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("ppqc_cli_" + std::string(
                                           ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string write(const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }

  fs::path dir;
};

}  // namespace

TEST_F(Cli, RunWritesTraceAndReplayFiles) {
  auto r = cli("--config " + kFixtures + "/two_node.cfg --out-dir " + dir.string() + " run --graph " + kFixtures +
               "/two_node.txt");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("convergence_round=5"), std::string::npos);
  for (const char* f : {"trace.csv", "messages.csv", "graph.txt", "replay.cfg"}) EXPECT_TRUE(fs::exists(dir / f)) << f;

  auto again = cli("--config " + (dir / "replay.cfg").string() + " --out-dir " + (dir / "again").string() + " run");
  EXPECT_EQ(again.code, 0);
  std::ifstream a(dir / "trace.csv"), b(dir / "again" / "trace.csv");
  std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(sa, sb);
}

TEST_F(Cli, BatchWritesBothCsvs) {
  auto cfg = write("b.cfg", "n = 8\np = 0.5\ntrials = 4\n");
  auto r = cli("--config " + cfg + " --seed 3 --jobs 2 --out-dir " + dir.string() + " batch");
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(fs::exists(dir / "series.csv"));
  EXPECT_TRUE(fs::exists(dir / "trials.csv"));
  EXPECT_NE(r.out.find("trials=4"), std::string::npos);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(cli("--config " + write("bad.cfg", "n = lots\n") + " batch").code, 1);
  EXPECT_EQ(cli("--config " + write("short.cfg", "n = 4\ninitial_states = 1,2\n") + " batch").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("--config " + (dir / "missing.cfg").string() + " run").code, 3);

  auto slow = write("slow.cfg", "n = 10\np = 0.4\nmax_rounds = 2\n");
  EXPECT_EQ(cli("--config " + slow + " --out-dir " + dir.string() + " batch").code, 2);

  auto blocker = write("blocker", "x");
  EXPECT_EQ(cli("--config " + kFixtures + "/two_node.cfg --out-dir " + blocker + "/sub run --graph " + kFixtures +
                "/two_node.txt")
                .code,
            3);
}

TEST_F(Cli, PrivacyAuditListsPrivateNodes) {
  auto graph = write("c3.txt", "3 3\n0 1\n1 2\n2 0\n");
  auto r = cli("privacy-audit --graph " + graph + " --roles p,c,c");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "node,classification,justification\n0,breached,every in- and out-neighbor is curious\n");

  auto attacked = cli("--seed 4 privacy-audit --graph " + graph + " --roles p,c,c --attack");
  EXPECT_EQ(attacked.code, 0);
  EXPECT_NE(attacked.out.find("reconstruction target=0"), std::string::npos);
}

TEST_F(Cli, ValidateSchedule) {
  auto good = write("good.txt", "# worked example\n4 : 1,8,6,2,3\nschedule.1 = 0 : -3,5,-2,1,-1\n");
  auto r = cli("validate-schedule " + good + " --dmax 3");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("2 schedules checked, 0 invalid"), std::string::npos);

  auto bad = write("bad.txt", "4 : 4,4,4,4,4\n");
  r = cli("validate-schedule " + bad + " --dmax 3");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("distinct"), std::string::npos);
  EXPECT_EQ(cli("validate-schedule " + bad + " --dmax 3 --role neutral").code, 0);
  EXPECT_EQ(cli("validate-schedule " + (dir / "none.txt").string() + " --dmax 3").code, 3);
}
