#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "common.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string &name) {
  const fs::path d = fs::temp_directory_path() / ("fw_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run(const std::string &args) {
  const std::string cmd = std::string(FW_CLI) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string common_args(const fs::path &out) {
  return "--device " + fwtest::data_path("table1.json") + " --library " + fwtest::data_path("library.json") +
         " --out " + out.string();
}

} // namespace

class GoldenSchedule : public ::testing::TestWithParam<std::string> {};

TEST_P(GoldenSchedule, ByteIdentical) {
  const auto out = scratch(GetParam());
  const std::string circ = fwtest::data_path("circuits/" + GetParam() + ".json");
  ASSERT_EQ(run("compile " + circ + " " + common_args(out)), 0);
  EXPECT_EQ(slurp(out / "schedule.json"), slurp(fwtest::data_path("golden/" + GetParam() + ".schedule.json")));
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  fs::remove_all(out);
}

INSTANTIATE_TEST_SUITE_P(Circuits, GoldenSchedule,
                         ::testing::Values("bell_iswap", "swap_chain", "bswap_cz", "sqiswap_pair", "b_pair",
                                           "empty"));

TEST(Cli, ExitCodes) {
  const auto out = scratch("codes");
  EXPECT_EQ(run("compile " + fwtest::data_path("circuits/empty.json") + " " + common_args(out)), 0);
  EXPECT_EQ(run("compile --bogus-flag " + fwtest::data_path("circuits/empty.json")), 2);
  EXPECT_EQ(run("rb --gateset nope " + common_args(out)), 2);
  {
    std::ofstream bad(out / "bad.json");
    bad << "{\"ops\": [{\"name\": \"FOO\", \"qubits\": [0, 1]}]}";
  }
  EXPECT_EQ(run("compile " + (out / "bad.json").string() + " " + common_args(out)), 2);
  // Unreadable input: I/O error.
  EXPECT_EQ(run("compile " + fwtest::data_path("circuits/empty.json") + " --device /nonexistent.json --library " +
                fwtest::data_path("library.json") + " --out " + out.string()),
            1);
  fs::remove_all(out);
}

TEST(Cli, RbIsReproducible) {
  const auto a = scratch("rb_a"), b = scratch("rb_b");
  const std::string flags = " --lengths 1 5 10 20 --realizations 3 --seed 7 --interleave ISWAP_STARK";
  ASSERT_EQ(run("rb " + common_args(a) + flags), 0);
  ASSERT_EQ(run("rb " + common_args(b) + flags), 0);
  for (const char *f : {"rb_reference.csv", "rb_interleaved.csv", "rb_fit.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const std::string manifest = slurp(a / "manifest.json");
  EXPECT_NE(manifest.find("\"seed\""), std::string::npos);
  EXPECT_NE(manifest.find("rb_fit.json"), std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}
