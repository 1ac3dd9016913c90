#pragma once

// Independent verification oracles. Everything here is written with plain
// scalar loops and textbook algorithms (Gauss–Jordan elimination, central
// differences, direct simulation) and does not call into the code paths it
// checks.

#include "stct/noise.hpp"
#include "stct/srl.hpp"
#include "stct/synthetic.hpp"
#include "stct/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace stct::oracle {

enum class Check {
  Relative,    ///< |impl − oracle| / max(|oracle|, 1e-300)
  Absolute,    ///< |impl − oracle|
  AtMost,      ///< max(0, impl − oracle)
  AtLeast,     ///< max(0, oracle − impl)
};

struct OracleReport {
  std::string name;
  std::string inputs_digest;
  double oracle_value = 0.0;
  double impl_value = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;
  double tolerance = 0.0;
  std::string check;
  bool pass = false;
};

OracleReport make_report(std::string name, std::string inputs_digest, double oracle_value,
                         double impl_value, double tolerance, Check check);

std::string to_json_line(const OracleReport& r);
OracleReport from_json_line(const std::string& line);
void write_reports(const std::string& path, const std::vector<OracleReport>& reports);
std::vector<OracleReport> read_reports(const std::string& path);

/// FNV-1a over the raw bytes of the given matrices, hex encoded.
std::string digest(std::initializer_list<const Matrix*> mats, std::uint64_t extra = 0);

// --- naive linear algebra -------------------------------------------------

Matrix naive_matmul(const Matrix& a, const Matrix& b);
Matrix naive_transpose(const Matrix& a);
/// Gauss–Jordan inverse with partial pivoting.
Matrix gauss_jordan_inverse(const Matrix& a);
/// (AᵀA + reg·I)⁻¹AᵀB by explicit normal equations and Gauss–Jordan.
Matrix naive_ridge(const Matrix& a, const Matrix& b, double reg);
/// ||Yv − Hv (HtᵀHt + reg I)⁻¹ Htᵀ Yt||² / n_v, all scalar loops.
double naive_validation_loss(const Matrix& ht, const Matrix& hv, const Matrix& yt, const Matrix& yv,
                             double reg);

// --- gradients --------------------------------------------------------------

/// Central-difference gradient of the validation loss with respect to Yt.
Matrix fd_label_gradient(const Matrix& ht, const Matrix& hv, const Matrix& yt, const Matrix& yv,
                         double reg, double h = 1e-5);

/// Scalar re-implementation of the SRL forward pass.
struct NaiveForward {
  Matrix embedding;
  Matrix proba;
  Matrix projection;
};
NaiveForward naive_srl_forward(const srl::SrlModel& model, const Matrix& x);

/// ℒ_L + ℒ_U + ℒ_Con recomputed with scalar loops. With `frozen` set, the
/// weak-view targets and anchor projections are taken from `frozen`
/// instead of `model` (the detached-target objective).
double naive_srl_loss(const srl::SrlModel& model, const srl::SrlBatch& batch, const srl::SrlConfig& cfg,
                      const srl::SrlModel* frozen = nullptr);

/// Central differences of naive_srl_loss over every scalar parameter.
std::vector<double> fd_srl_gradient(const srl::SrlModel& model, const srl::SrlBatch& batch,
                                    const srl::SrlConfig& cfg, double h = 1e-5);

/// ||a − b||₂ / max(||a||₂, ||b||₂, 1e-12).
double relative_error(const std::vector<double>& a, const std::vector<double>& b);
double relative_error(const Matrix& a, const Matrix& b);

// --- Monte Carlo ------------------------------------------------------------

struct CoverageSummary {
  Index n = 0;
  double p_subtrain = 0.0;
  int rounds = 0;
  int trials = 0;
  std::vector<double> betas;
  /// reach[b][s-1]: fraction of trials whose covered fraction after s rounds
  /// is at least betas[b].
  std::vector<std::vector<double>> reach;
  /// full[s-1]: fraction of trials in which every sample was covered.
  std::vector<double> full;
  /// mean covered fraction after each round.
  std::vector<double> mean_coverage;

  double reach_at(std::size_t beta_index, int s) const;
  double full_at(int s) const;
};

/// Simulates `rounds` independent exact-count splits per trial, with
/// round(p_subtrain·n) samples entering the sub-training side each round.
CoverageSummary mc_coverage(Index n, double p_subtrain, int rounds, int trials, std::uint64_t seed,
                            std::vector<double> betas);

/// Smallest s with Π_i [1 − (1−p)^s] ≥ β, evaluated by repeated
/// multiplication (no logarithms).
int brute_force_sampling_times(Index n, double p_subtrain, double beta, int max_rounds = 10000);

struct LabeledPoint {
  Vector x;
  int y = 0;
};
using PopulationSampler = std::function<LabeledPoint(Rng&)>;
using Classifier = std::function<int(const Vector&)>;

struct HoeffdingSummary {
  double reference_risk = 0.0;
  double deviation_frequency = 0.0;
  double bound = 0.0;
  int trials = 0;
  long long n_v = 0;
  double eps = 0.0;
};

/// Frequency over `trials` validation draws of |empirical 0-1 risk −
/// reference risk| ≥ eps, the reference risk coming from one sample of
/// `reference_n` points.
HoeffdingSummary mc_hoeffding(const Classifier& classifier, const PopulationSampler& sampler,
                              long long n_v, double eps, int trials, std::uint64_t seed,
                              long long reference_n = 1000000);

struct Theorem1Summary {
  double noisy_accuracy = 0.0;
  double clean_accuracy = 0.0;
  double predicted = 0.0;  ///< Σ prior·T_ii from the empirical class frequencies
};

/// Nearest-center classifier on the mixture, scored against `trials`
/// freshly corrupted copies of the clean labels.
Theorem1Summary mc_theorem1(const synthetic::MixtureSpec& mixture, const noise::NoiseTransitionMatrix& t,
                            int trials, std::uint64_t seed);

// --- suites -----------------------------------------------------------------

std::vector<OracleReport> gradient_suite(std::uint64_t seed = 2024);
std::vector<OracleReport> theorem_suite(std::uint64_t seed = 2024);
std::vector<OracleReport> coverage_suite(std::uint64_t seed = 2024);
std::vector<OracleReport> run_suite(const std::string& name, std::uint64_t seed = 2024);

}  // namespace stct::oracle
