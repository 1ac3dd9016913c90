// stct: command-line front end.
//
// Exit codes: 0 success, 1 failed checks or runtime errors, 2 usage errors
// (bad flags, missing files, malformed configuration).

#include "stct/config.hpp"
#include "stct/errors.hpp"
#include "stct/io.hpp"
#include "stct/nmc.hpp"
#include "stct/noise.hpp"
#include "stct/oracle.hpp"
#include "stct/pipeline.hpp"
#include "stct/report.hpp"
#include "stct/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace stct;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void require_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("directory not found: " + dir.string());
}

int cmd_gen(const fs::path& spec_path, const fs::path& out) {
  const auto file = config::ConfigFile::load(spec_path);
  synthetic::MixtureSpec spec = synthetic::standard_benchmark();
  pipeline::apply_mixture_keys(file, spec);
  const Index test_n = file.get_int("test.n", 0);
  file.require_all_used();

  const Dataset train = synthetic::gaussian_mixture(spec);
  io::save_dataset(out, train);
  if (test_n > 0) {
    const Dataset test = synthetic::sample_mixture(spec, test_n, derive_seed(spec.seed, 2));
    io::save_matrix(out / io::kTestFeaturesFile, test.features.data());
    io::save_labels(out / io::kTestLabelsFile, *test.clean_labels);
  }
  io::save_matrix(out / "centers.bin", synthetic::mixture_centers(spec));
  const auto margins = synthetic::margin_report(train);
  nlohmann::ordered_json j;
  j["n"] = train.size();
  j["dim"] = train.features.cols();
  j["classes"] = spec.classes;
  j["test_n"] = test_n;
  j["min_margin"] = margins.min_margin;
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_corrupt(const fs::path& in, const std::string& kind, double rate, const std::string& convention,
                std::uint64_t seed) {
  require_dir(in);
  const auto clean_path = in / io::kCleanLabelsFile;
  if (!fs::exists(clean_path)) throw UsageError("missing " + clean_path.string());
  const HardLabelVector clean = io::load_labels(clean_path);
  const int classes = clean.inferred_classes();
  const auto conv =
      convention == "include" ? noise::SymmetricConvention::IncludeSelf : noise::SymmetricConvention::ExcludeSelf;
  const noise::NoiseTransitionMatrix t = kind == "sym" ? noise::make_symmetric_T(classes, rate, conv)
                                                       : noise::make_asymmetric_T(classes, rate, noise::cyclic_flip_map(classes));
  const noise::NoisyLabels noisy = noise::inject_noise(clean, t, seed);
  io::save_labels(in / io::kNoisyLabelsFile, noisy.labels);
  io::save_mask(in / io::kNoiseMaskFile, noisy.mask);
  io::save_matrix(in / "transition.bin", t.matrix());
  std::size_t flipped = 0;
  for (bool b : noisy.mask) flipped += b;
  nlohmann::ordered_json j;
  j["n"] = clean.size();
  j["flipped"] = flipped;
  j["noisy_label_acc"] = label_agreement(noisy.labels, clean);
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_nmc(const fs::path& in, const fs::path& config_path, fs::path out) {
  require_dir(in);
  const auto file = config::ConfigFile::load(config_path);
  nmc::NmcConfig cfg;
  pipeline::apply_nmc_keys(file, cfg);
  pipeline::EncoderSpec enc;
  pipeline::apply_encoder_keys(file, enc);
  file.require_all_used();
  cfg.validate();
  if (out.empty()) out = in;

  const Dataset data = io::load_dataset(in);
  const Matrix h = pipeline::initial_embeddings(enc, data.features.data());
  const nmc::NmcResult res = nmc::run_nmc(FeatureMatrix(h), data.labels, cfg, data.clean_labels);
  const HardLabelVector hard = harden(res.corrected);
  fs::create_directories(out);
  io::save_matrix(out / "corrected_labels.bin", res.corrected.data());
  io::save_labels(out / "corrected_hard_labels.bin", hard);
  io::write_text(out / "nmc_trace.jsonl", report::trace_jsonl(res.trace));

  nlohmann::ordered_json j;
  j["rounds"] = res.rounds();
  j["stop"] = res.stop == nmc::StopReason::Agreement ? "agreement" : "sampling_bound";
  if (data.clean_labels) {
    j["noisy_label_acc"] = label_agreement(harden(data.labels), *data.clean_labels);
    j["final_label_acc"] = label_agreement(hard, *data.clean_labels);
  }
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_stct(const fs::path& config_path, const fs::path& out) {
  pipeline::RunConfig cfg = pipeline::load_run_config(config_path);
  if (!out.empty()) cfg.output_dir = out;
  const pipeline::RunResult res = pipeline::run_stct(cfg);
  std::cout << report::render_epochs(res.report);
  return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, const fs::path& out) {
  const auto reports = oracle::run_suite(suite, seed);
  if (!out.empty()) oracle::write_reports(out.string(), reports);
  int failed = 0;
  for (const auto& r : reports) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  oracle=" << r.oracle_value << " impl=" << r.impl_value
              << " tol=" << r.tolerance << " (" << r.check << ")\n";
    failed += !r.pass;
  }
  std::cout << reports.size() - static_cast<std::size_t>(failed) << "/" << reports.size() << " checks passed\n";
  return failed == 0 ? 0 : kExitFailure;
}

int cmd_report(const fs::path& in, fs::path csv) {
  const auto rendered = report::render_directory(in);
  if (csv.empty()) csv = in / "curves.csv";
  io::write_text(csv, rendered.csv);
  std::cout << rendered.table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noisy-label correction with noisy meta correction and semi-supervised representation learning"};
  app.require_subcommand(1);

  std::string spec_file, out_dir, in_dir, config_file, noise_kind = "sym", convention = "include", suite = "all";
  std::string csv_path, reports_out;
  double rate = 0.5;
  std::uint64_t seed = 1;
  std::uint64_t verify_seed = 2024;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic Gaussian-mixture dataset");
  gen->add_option("--spec", spec_file, "Mixture spec (key = value)")->required();
  gen->add_option("--out", out_dir, "Output dataset directory")->required();

  auto* corrupt = app.add_subcommand("corrupt", "Inject label noise into a dataset directory");
  corrupt->add_option("--in", in_dir, "Dataset directory")->required();
  corrupt->add_option("--noise", noise_kind, "Noise type")->check(CLI::IsMember({"sym", "asym"}));
  corrupt->add_option("--rate", rate, "Noise rate")->check(CLI::Range(0.0, 1.0));
  corrupt->add_option("--convention", convention, "Symmetric convention")->check(CLI::IsMember({"include", "exclude"}));
  corrupt->add_option("--seed", seed, "Noise seed");

  auto* nmc_cmd = app.add_subcommand("nmc", "Run label correction only");
  nmc_cmd->add_option("--in", in_dir, "Dataset directory")->required();
  nmc_cmd->add_option("--config", config_file, "Configuration file")->required();
  nmc_cmd->add_option("--out", out_dir, "Output directory (default: the dataset directory)");

  auto* stct_cmd = app.add_subcommand("stct", "Run the full alternating pipeline");
  stct_cmd->add_option("--config", config_file, "Configuration file")->required();
  stct_cmd->add_option("--out", out_dir, "Output directory (overrides output_dir)");

  auto* verify = app.add_subcommand("verify", "Run oracle checks");
  verify->add_option("--suite", suite, "Suite")->check(CLI::IsMember({"theorems", "gradients", "coverage", "all"}));
  verify->add_option("--seed", verify_seed, "Oracle seed");
  verify->add_option("--reports", reports_out, "Write OracleReports as JSON lines");

  auto* rep = app.add_subcommand("report", "Render a run report or NMC trace");
  rep->add_option("--in", in_dir, "Run or NMC output directory")->required();
  rep->add_option("--csv", csv_path, "CSV output path (default: <in>/curves.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(spec_file, out_dir);
    if (corrupt->parsed()) return cmd_corrupt(in_dir, noise_kind, rate, convention, seed);
    if (nmc_cmd->parsed()) return cmd_nmc(in_dir, config_file, out_dir);
    if (stct_cmd->parsed()) return cmd_stct(config_file, out_dir);
    if (verify->parsed()) return cmd_verify(suite, verify_seed, reports_out);
    if (rep->parsed()) return cmd_report(in_dir, csv_path);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
