// Acceptance run: one PASS/FAIL line per criterion, exit 0 only if all pass.
//
//   stct_acceptance [--workdir DIR]
//
// Oracle suites are run once, persisted as JSON lines under the work
// directory, and judged from the files read back.

#include "stct/errors.hpp"
#include "stct/io.hpp"
#include "stct/nmc.hpp"
#include "stct/noise.hpp"
#include "stct/oracle.hpp"
#include "stct/pipeline.hpp"
#include "stct/synthetic.hpp"

#include <json.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace stct;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Verdict {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double limit = 0.0;  ///< 0: no runtime limit
};

class Ledger {
 public:
  explicit Ledger(fs::path dir) : dir_(std::move(dir)) {}

  void add(Verdict v) {
    const bool in_time = v.limit <= 0.0 || v.seconds < v.limit;
    if (!in_time) v.detail += "; runtime limit exceeded";
    v.pass = v.pass && in_time;
    std::cerr << "criterion " << v.id << " done in " << std::fixed << std::setprecision(1) << v.seconds << " s"
              << std::endl;
    verdicts_.push_back(std::move(v));
  }

  void fail(int id, const std::string& title, const std::exception& e) {
    add({id, title, false, std::string("exception: ") + e.what(), 0.0, 0.0});
  }

  /// Prints the verdicts in criterion order and persists them.
  bool finish() {
    std::sort(verdicts_.begin(), verdicts_.end(), [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
    std::ostringstream results;
    bool all = true;
    for (const auto& v : verdicts_) {
      std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << v.id << ": " << v.title << " [" << v.detail
                << "] (" << std::fixed << std::setprecision(1) << v.seconds << " s";
      if (v.limit > 0) std::cout << ", limit " << v.limit << " s";
      std::cout << ")\n";
      nlohmann::ordered_json j;
      j["criterion"] = v.id;
      j["pass"] = v.pass;
      j["detail"] = v.detail;
      j["seconds"] = v.seconds;
      results << j.dump() << '\n';
      all = all && v.pass;
    }
    io::write_text(dir_ / "acceptance_results.jsonl", results.str());
    std::cout << (all ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED") << std::endl;
    return all;
  }

 private:
  fs::path dir_;
  std::vector<Verdict> verdicts_;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

/// Runs a suite, persists its reports and returns the reports read back.
std::vector<oracle::OracleReport> persisted_suite(const fs::path& dir, const std::string& suite, double& seconds) {
  const auto t = Clock::now();
  const auto reports = oracle::run_suite(suite, 2024);
  seconds = seconds_since(t);
  const fs::path file = dir / ("oracle_" + suite + ".jsonl");
  oracle::write_reports(file.string(), reports);
  return oracle::read_reports(file.string());
}

/// All reports whose name starts with one of the prefixes must pass.
Verdict judge(int id, std::string title, const std::vector<oracle::OracleReport>& reports,
              const std::vector<std::string>& prefixes, double seconds, double limit) {
  Verdict v{id, std::move(title), true, "", seconds, limit};
  int matched = 0;
  for (const auto& r : reports) {
    bool wanted = false;
    for (const auto& p : prefixes) wanted = wanted || r.name.rfind(p, 0) == 0;
    if (!wanted) continue;
    ++matched;
    if (!v.detail.empty()) v.detail += "; ";
    v.detail += r.name + " impl=" + fmt(r.impl_value, 6) + " oracle=" + fmt(r.oracle_value, 6) + " " + r.check +
                " tol=" + fmt(r.tolerance, 3) + (r.pass ? "" : " FAILED");
    v.pass = v.pass && r.pass;
  }
  if (matched == 0) {
    v.pass = false;
    v.detail = "no matching oracle reports";
  }
  return v;
}

std::map<std::string, std::pair<double, double>> load_references(const fs::path& file) {
  std::map<std::string, std::pair<double, double>> out;
  std::istringstream in(io::read_text(file));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    out[j.at("name").get<std::string>()] = {j.at("value").get<double>(), j.at("tolerance").get<double>()};
  }
  return out;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
  const std::string cmd = std::string(STCT_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return -1;
  char buf[4096];
  std::size_t got = 0;
  std::string out;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int status = pclose(pipe);
  if (output) *output = out;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

std::vector<std::string> files_under(const fs::path& root) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root).string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

pipeline::RunConfig benchmark_run(double noise_rate) {
  pipeline::RunConfig c;
  c.noise.rate = noise_rate;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path workdir = fs::temp_directory_path() / "stct_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--workdir" && i + 1 < argc) {
      workdir = argv[++i];
    } else {
      std::cerr << "usage: stct_acceptance [--workdir DIR]\n";
      return 2;
    }
  }
  fs::remove_all(workdir);
  fs::create_directories(workdir);
  Ledger ledger(workdir);

  // Oracle-backed criteria 1, 2, 3, 4 and 9.
  {
    double t = 0;
    const char* t1 = "label update equals -eta times the finite-difference gradient (100 instances, rel 1e-6)";
    const char* t9 = "SRL analytic gradients match finite differences (20 points, rel 1e-5)";
    try {
      const auto reports = persisted_suite(workdir, "gradients", t);
      ledger.add(judge(1, t1, reports, {"label_update_vs_fd_100"}, t, 10));
      ledger.add(judge(9, t9, reports, {"srl_gradients_vs_fd"}, t, 30));
    } catch (const std::exception& e) {
      ledger.fail(1, t1, e);
      ledger.fail(9, t9, e);
    }
  }
  {
    double t = 0;
    const char* t2 = "nearest-center classifier: noisy accuracy 0.28 +/- 0.01, clean accuracy >= 0.999";
    const char* t3 = "validation deviation frequency at n_v=1000, eps=0.05 within the Hoeffding bound";
    try {
      const auto reports = persisted_suite(workdir, "theorems", t);
      ledger.add(judge(2, t2, reports, {"bayes_noisy_acc_c10_rho0.8_include", "bayes_clean_acc_c10_rho0.8_include"}, t, 30));
      ledger.add(judge(3, t3, reports, {"hoeffding_nv1000_eps0.05_frequency"}, t, 60));
    } catch (const std::exception& e) {
      ledger.fail(2, t2, e);
      ledger.fail(3, t3, e);
    }
  }
  {
    double t = 0;
    const char* t4 = "sampling-times bound is 29 at n=50000 and matches Monte Carlo coverage";
    try {
      const auto reports = persisted_suite(workdir, "coverage", t);
      ledger.add(judge(4, t4, reports,
                       {"sampling_times_n50000", "coverage_n50000_reach_beta_at_bound",
                        "coverage_n1000_threshold_within_one_round"},
                       t, 60));
    } catch (const std::exception& e) {
      ledger.fail(4, t4, e);
    }
  }

  // 5: NMC alone at 80% symmetric noise, five pre-registered seeds.
  {
    const char* title = "NMC corrected-label accuracy >= 0.95 at 80% noise on 5 seeds";
    try {
      const auto t = Clock::now();
      const auto refs = load_references(fs::path(STCT_REFERENCE_DIR) / "reference_runs.jsonl");
      const Dataset data = synthetic::gaussian_mixture(synthetic::standard_benchmark());
      const auto tm = noise::make_symmetric_T(10, 0.8, noise::SymmetricConvention::IncludeSelf);
      Verdict v{5, title, true, "", 0.0, 120};
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto noisy = noise::inject_noise(*data.clean_labels, tm, seed);
        nmc::NmcConfig cfg;
        cfg.seed = seed;
        const auto res = nmc::run_nmc(data.features, one_hot(noisy.labels, 10), cfg, data.clean_labels);
        const double acc = label_agreement(harden(res.corrected), *data.clean_labels);
        v.pass = v.pass && acc >= 0.95;
        v.detail += (seed > 1 ? ", " : "") + std::string("seed ") + std::to_string(seed) + "=" + fmt(acc);
        if (seed == 1) {
          const auto& ref = refs.at("nmc_benchmark_sym0.8_include_seed1_final_label_acc");
          const bool match = std::abs(acc - ref.first) <= ref.second;
          v.pass = v.pass && match;
          if (!match) v.detail += " (reference " + fmt(ref.first) + " not matched)";
        }
      }
      v.seconds = seconds_since(t);
      ledger.add(v);
    } catch (const std::exception& e) {
      ledger.fail(5, title, e);
    }
  }

  // 6: full alternation at 50% noise.
  {
    const char* title = "full pipeline at 50% noise: corrected >= 0.97, held-out >= 0.95, final >= epoch 1";
    try {
      const auto t = Clock::now();
      const auto res = pipeline::run_stct(benchmark_run(0.5));
      const auto& s = res.report.summary;
      const double first = *res.report.epochs.front().corrected_label_acc;
      const double last = *s.final_corrected_label_acc;
      Verdict v{6, title, last >= 0.97 && *s.final_test_acc >= 0.95 && last >= first, "", seconds_since(t), 600};
      v.detail = "corrected=" + fmt(last) + " held-out=" + fmt(*s.final_test_acc) + " epoch1=" + fmt(first);
      io::write_text(workdir / "run_sym0.5.jsonl", res.report.to_jsonl());
      ledger.add(v);
    } catch (const std::exception& e) {
      ledger.fail(6, title, e);
    }
  }

  // 7 and 8 share the full 80% run (r = 0.5).
  std::optional<pipeline::RunResult> full80;
  double full80_seconds = 0;
  {
    const char* title = "at 80% noise full pipeline beats w/o SRL and w/o NMC by >= 0.01; no L_L is refused";
    try {
      auto t = Clock::now();
      full80 = pipeline::run_stct(benchmark_run(0.8));
      full80_seconds = seconds_since(t);
      auto cfg = benchmark_run(0.8);
      cfg.ablation = pipeline::Ablation::NoSrl;
      const auto no_srl = pipeline::run_stct(cfg);
      cfg.ablation = pipeline::Ablation::NoNmc;
      const auto no_nmc = pipeline::run_stct(cfg);
      cfg.ablation = pipeline::Ablation::NoLabeledLoss;
      bool guarded = false;
      try {
        pipeline::run_stct(cfg);
      } catch (const NonConvergenceError&) {
        guarded = true;
      }
      const double full = *full80->report.summary.final_test_acc;
      const double a = *no_srl.report.summary.final_test_acc;
      const double b = *no_nmc.report.summary.final_test_acc;
      const bool pass_a = full - a >= 0.01;
      const bool pass_b = full - b >= 0.01;
      Verdict v{7, title, pass_a && pass_b && guarded, "", full80_seconds + seconds_since(t), 1200};
      v.detail = "held-out full=" + fmt(full) + " w/o SRL=" + fmt(a) + (pass_a ? "" : " (margin " + fmt(full - a, 2) + " < 0.01)") +
                 " w/o NMC=" + fmt(b) + (pass_b ? "" : " (margin " + fmt(full - b, 2) + " < 0.01)") +
                 (guarded ? " guard=raised" : " guard=NOT raised");
      io::write_text(workdir / "run_sym0.8.jsonl", full80->report.to_jsonl());
      io::write_text(workdir / "run_sym0.8_no_srl.jsonl", no_srl.report.to_jsonl());
      io::write_text(workdir / "run_sym0.8_no_nmc.jsonl", no_nmc.report.to_jsonl());
      ledger.add(v);
    } catch (const std::exception& e) {
      ledger.fail(7, title, e);
    }
  }
  {
    const char* title = "sampling rate: corrected accuracy at r=0.5 >= r=0.1 and r=0.95 < r=0.5 (80% noise)";
    try {
      const auto t = Clock::now();
      if (!full80) full80 = pipeline::run_stct(benchmark_run(0.8));
      std::map<double, double> acc;
      acc[0.5] = *full80->report.summary.final_corrected_label_acc;
      for (double r : {0.1, 0.95}) {
        auto cfg = benchmark_run(0.8);
        cfg.nmc.r = r;
        acc[r] = *pipeline::run_stct(cfg).report.summary.final_corrected_label_acc;
      }
      Verdict v{8, title, acc[0.5] >= acc[0.1] && acc[0.95] < acc[0.5], "", full80_seconds + seconds_since(t), 600};
      v.detail = "r=0.1: " + fmt(acc[0.1]) + ", r=0.5: " + fmt(acc[0.5]) + ", r=0.95: " + fmt(acc[0.95]);
      ledger.add(v);
    } catch (const std::exception& e) {
      ledger.fail(8, title, e);
    }
  }

  // 10: determinism and formats.
  {
    const char* title = "byte-identical reruns, bit-exact matrix round trips, verify --suite all exits 0";
    try {
      const auto t = Clock::now();
      Verdict v{10, title, true, "", 0.0, 0.0};

      io::write_text(workdir / "determinism.conf", "max_epoch = 2\nnoise.rate = 0.5\n");
      const int ca = run_cli("stct --config " + quoted(workdir / "determinism.conf") + " --out " + quoted(workdir / "rerun_a"));
      const int cb = run_cli("stct --config " + quoted(workdir / "determinism.conf") + " --out " + quoted(workdir / "rerun_b"));
      bool identical = ca == 0 && cb == 0;
      std::size_t compared = 0;
      if (identical) {
        const auto fa = files_under(workdir / "rerun_a");
        identical = fa == files_under(workdir / "rerun_b");
        for (const auto& f : fa) {
          identical = identical && io::read_text(workdir / "rerun_a" / f) == io::read_text(workdir / "rerun_b" / f);
          ++compared;
        }
      }
      v.pass = v.pass && identical;
      v.detail = std::string("reruns ") + (identical ? "identical" : "DIFFER") + " (" + std::to_string(compared) + " files)";

      Rng rng(99);
      std::normal_distribution<double> normal(0.0, 1.0);
      Matrix m(37, 11);
      for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng) * std::pow(10.0, static_cast<double>(i % 40) - 20.0);
      m(0, 0) = -0.0;
      m(0, 1) = std::numeric_limits<double>::denorm_min();
      m(0, 2) = std::numeric_limits<double>::max();
      io::save_matrix(workdir / "roundtrip.bin", m);
      io::save_matrix(workdir / "roundtrip.csv", m);
      const bool rt = bit_equal(io::load_matrix(workdir / "roundtrip.bin"), m) &&
                      bit_equal(io::load_matrix(workdir / "roundtrip.csv"), m);
      v.pass = v.pass && rt;
      v.detail += std::string(", round trip ") + (rt ? "bit-exact" : "NOT exact");

      std::string out;
      const int code = run_cli("verify --suite all --reports " + quoted(workdir / "verify_all.jsonl"), &out);
      v.pass = v.pass && code == 0;
      v.detail += ", verify exit " + std::to_string(code);
      v.seconds = seconds_since(t);
      ledger.add(v);
    } catch (const std::exception& e) {
      ledger.fail(10, title, e);
    }
  }

  return ledger.finish() ? 0 : 1;
}
