#pragma once

// The alternating correction/representation loop and its configuration,
// report and checkpoint plumbing.

#include "stct/config.hpp"
#include "stct/nmc.hpp"
#include "stct/noise.hpp"
#include "stct/selection.hpp"
#include "stct/srl.hpp"
#include "stct/synthetic.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stct::pipeline {

enum class EncoderKind { Identity, RandomProjection, Precomputed };
enum class NoiseKind { None, Symmetric, Asymmetric };
enum class Ablation {
  None,
  NoSrl,          ///< NMC on the initial embeddings, classifier trained on all corrected labels with ℒ_L only
  NoNmc,          ///< selection and SRL on the raw noisy labels
  NoLabeledLoss,  ///< SRL without ℒ_L
};

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Symmetric;
  double rate = 0.5;
  noise::SymmetricConvention convention = noise::SymmetricConvention::IncludeSelf;
  std::uint64_t seed = 1;
};

struct EncoderSpec {
  EncoderKind kind = EncoderKind::Identity;
  int dim = 32;                         ///< random projection width
  std::uint64_t seed = 3;
  std::filesystem::path embeddings;     ///< precomputed embeddings matrix
};

struct RunConfig {
  /// Empty: generate `synthetic`. Otherwise a dataset directory.
  std::filesystem::path data_dir;
  synthetic::MixtureSpec synthetic = synthetic::standard_benchmark();
  Index test_n = 2000;  ///< held-out samples drawn from the same mixture
  NoiseSpec noise;
  nmc::NmcConfig nmc;
  selection::SelectionConfig selection;
  srl::SrlConfig srl;
  std::vector<int> hidden = {64, 32};
  int proj_dim = 16;
  int max_epoch = 10;
  EncoderSpec encoder;
  Ablation ablation = Ablation::None;
  std::filesystem::path output_dir;  ///< empty: write nothing
  bool record_timing = false;

  void validate() const;
};

/// Reads every known key; unknown keys are a UsageError.
RunConfig run_config_from(const config::ConfigFile& file);
RunConfig load_run_config(const std::filesystem::path& path);
void apply_nmc_keys(const config::ConfigFile& file, nmc::NmcConfig& cfg);
void apply_mixture_keys(const config::ConfigFile& file, synthetic::MixtureSpec& spec);
void apply_encoder_keys(const config::ConfigFile& file, EncoderSpec& spec);

struct EpochRecord {
  int epoch = 0;
  std::optional<double> corrected_label_acc;
  std::optional<double> selection_precision;
  std::optional<double> selection_recall;
  std::optional<double> test_acc;
  int nmc_rounds = 0;
  Index selected = 0;
  double srl_loss = 0.0;
  std::optional<double> wall_seconds;
};

struct RunSummary {
  int epochs = 0;
  std::optional<double> noisy_label_acc;
  std::optional<double> final_corrected_label_acc;
  std::optional<double> final_test_acc;
  std::optional<double> wall_seconds;
};

struct RunReport {
  std::vector<EpochRecord> epochs;
  RunSummary summary;

  /// One {"type":"epoch",...} line per epoch, then one {"type":"summary",...}.
  std::string to_jsonl() const;
  static RunReport from_jsonl(const std::string& text);
};

std::string epoch_json(const EpochRecord& r);
std::string nmc_record_json(int epoch, const nmc::NmcRecord& r);

struct RunResult {
  RunReport report;
  srl::SrlModel model;
  HardLabelVector corrected;
  SoftLabelMatrix corrected_soft;
};

/// Embeddings from the configured provider (used before any SRL training).
Matrix initial_embeddings(const EncoderSpec& spec, const Matrix& x);

/// Per epoch: NMC on the current embeddings, clean selection, SRL training
/// (warm started). Errors are rethrown with the epoch attached. When
/// `output_dir` is set, writes report.jsonl, metrics.jsonl (streamed),
/// corrected labels and a model checkpoint.
RunResult run_stct(const RunConfig& cfg);

/// Classifier trained with ℒ_L only on the given labels; same architecture
/// and optimizer as the SRL step.
srl::TrainResult train_supervised(const RunConfig& cfg, const Matrix& x, const HardLabelVector& labels,
                                  std::uint64_t seed);

/// Model tensors as one matrix file each plus a manifest listing name, file
/// and shape; the input standardizer and architecture are stored alongside.
void save_checkpoint(const std::filesystem::path& dir, const srl::SrlModel& model);
srl::SrlModel load_checkpoint(const std::filesystem::path& dir);

const char* to_string(Ablation a);
const char* to_string(EncoderKind k);

}  // namespace stct::pipeline
