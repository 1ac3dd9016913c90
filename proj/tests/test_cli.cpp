#include "helpers.hpp"

#include "stct/io.hpp"

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(STCT_CLI_PATH) + " " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) o.out.append(buf.data(), got);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("verify --no-such-flag").code == 2);
  CHECK(run("verify --suite everything").code == 2);
  CHECK(run("corrupt --in /nonexistent/dir").code == 2);
  CHECK(run("stct --config /nonexistent/run.conf").code == 2);
  CHECK(run("report --in /nonexistent/dir").code == 2);
  CHECK(run("--help").code == 0);

  const auto dir = testing::scratch_dir("cli_usage");
  stct::io::write_text(dir / "run.conf", "max_epoch = 1\nunknown.key = 3\n");
  const auto o = run("stct --config " + q(dir / "run.conf"));
  CHECK(o.code == 2);
  CHECK(o.out.find("unknown.key") != std::string::npos);
}

TEST_CASE("verify gradients passes") {
  const auto dir = testing::scratch_dir("cli_verify");
  const auto o = run("verify --suite gradients --reports " + q(dir / "r.jsonl"));
  CHECK(o.code == 0);
  CHECK(o.out.find("FAIL") == std::string::npos);
  CHECK(fs::exists(dir / "r.jsonl"));
}

TEST_CASE("gen, corrupt, nmc and report") {
  const auto dir = testing::scratch_dir("cli_flow");
  stct::io::write_text(dir / "spec.conf", "synthetic.classes = 4\nsynthetic.n = 800\nsynthetic.dim = 8\ntest.n = 100\n");
  stct::io::write_text(dir / "nmc.conf", "nmc.seed = 1\n");
  const auto data = dir / "data";

  auto o = run("gen --spec " + q(dir / "spec.conf") + " --out " + q(data));
  REQUIRE(o.code == 0);
  CHECK(fs::exists(data / "features.bin"));
  CHECK(fs::exists(data / "test_labels.bin"));
  CHECK(stct::io::load_matrix(data / "features.bin").rows() == 800);

  o = run("corrupt --in " + q(data) + " --noise sym --rate 0.6 --seed 3");
  REQUIRE(o.code == 0);
  CHECK(fs::exists(data / "noisy_labels.bin"));
  CHECK(fs::exists(data / "noise_mask.bin"));

  CHECK(run("corrupt --in " + q(data) + " --rate 1.5").code == 2);

  o = run("nmc --in " + q(data) + " --config " + q(dir / "nmc.conf") + " --out " + q(dir / "nmc"));
  REQUIRE(o.code == 0);
  CHECK(o.out.find("final_label_acc") != std::string::npos);
  CHECK(fs::exists(dir / "nmc" / "nmc_trace.jsonl"));

  o = run("report --in " + q(dir / "nmc"));
  CHECK(o.code == 0);
  CHECK(fs::exists(dir / "nmc" / "curves.csv"));

  stct::io::write_text(data / "features.bin", "garbage");
  o = run("nmc --in " + q(data) + " --config " + q(dir / "nmc.conf"));
  CHECK(o.code == 1);
  CHECK(o.out.find("offset") != std::string::npos);
}

TEST_CASE("stct runs are byte identical") {
  const auto dir = testing::scratch_dir("cli_stct");
  stct::io::write_text(dir / "run.conf",
                       "synthetic.classes = 4\nsynthetic.n = 600\nsynthetic.dim = 8\ntest.n = 200\n"
                       "max_epoch = 2\nsrl.hidden = 16, 8\nsrl.proj_dim = 4\n");
  REQUIRE(run("stct --config " + q(dir / "run.conf") + " --out " + q(dir / "a")).code == 0);
  REQUIRE(run("stct --config " + q(dir / "run.conf") + " --out " + q(dir / "b")).code == 0);
  for (const char* f : {"report.jsonl", "metrics.jsonl", "corrected_labels.bin", "model/manifest.txt"}) {
    CHECK_MESSAGE(stct::io::read_text(dir / "a" / f) == stct::io::read_text(dir / "b" / f), f);
  }
  const auto o = run("report --in " + q(dir / "a") + " --csv " + q(dir / "curves.csv"));
  CHECK(o.code == 0);
  CHECK(fs::exists(dir / "curves.csv"));
}
