#pragma once

// Semi-supervised representation learning over feature vectors: an MLP
// encoder with a softmax classification head and a unit-norm projection
// head, trained on labeled cross-entropy, confidence-gated weak→strong
// consistency on unlabeled data, and instance-similarity consistency
// against a random anchor set. Gradients are derived by hand.

#include "stct/random.hpp"
#include "stct/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stct::srl {

/// Parameter tensors in a fixed order: enc0.w, enc0.b, …, cls.w, cls.b,
/// proj.w, proj.b. Weights are in×out, biases 1×out.
struct ParameterSet {
  std::vector<Matrix> tensors;

  std::size_t scalar_count() const;
  std::vector<double> flatten() const;
  void assign(const std::vector<double>& flat);
  ParameterSet zeros_like() const;
};

class SrlModel {
 public:
  SrlModel() = default;

  /// Xavier-uniform initialized model. `layer_sizes` is the encoder layout
  /// starting with the input width, e.g. {d, 64, 32}.
  static SrlModel create(std::vector<int> layer_sizes, int classes, int proj_dim,
                         std::uint64_t seed);

  /// Fixes the input standardization from training features. Not trained.
  void fit_standardizer(const Matrix& x);

  int input_dim() const noexcept { return sizes_.front(); }
  int embed_dim() const noexcept { return sizes_.back(); }
  int classes() const noexcept { return classes_; }
  int proj_dim() const noexcept { return proj_dim_; }
  int encoder_layers() const noexcept { return static_cast<int>(sizes_.size()) - 1; }
  const std::vector<int>& layer_sizes() const noexcept { return sizes_; }

  ParameterSet& params() noexcept { return params_; }
  const ParameterSet& params() const noexcept { return params_; }
  const Vector& input_mean() const noexcept { return mean_; }
  const Vector& input_scale() const noexcept { return scale_; }
  void set_standardizer(Vector mean, Vector scale);

  std::vector<std::string> tensor_names() const;

  const Matrix& enc_w(int l) const { return params_.tensors[2 * l]; }
  const Matrix& enc_b(int l) const { return params_.tensors[2 * l + 1]; }
  const Matrix& cls_w() const { return params_.tensors[2 * encoder_layers()]; }
  const Matrix& cls_b() const { return params_.tensors[2 * encoder_layers() + 1]; }
  const Matrix& proj_w() const { return params_.tensors[2 * encoder_layers() + 2]; }
  const Matrix& proj_b() const { return params_.tensors[2 * encoder_layers() + 3]; }

  /// Encoder output f_enc(x).
  Matrix embed(const Matrix& x) const;
  /// g_cls(f_enc(x)): row-stochastic.
  Matrix predict_proba(const Matrix& x) const;
  /// g_proj(f_enc(x)): unit rows.
  Matrix project(const Matrix& x) const;

  bool finite() const;

 private:
  std::vector<int> sizes_;
  int classes_ = 0;
  int proj_dim_ = 0;
  ParameterSet params_;
  Vector mean_;
  Vector scale_;
};

struct SrlConfig {
  double lambda = 0.95;  ///< confidence gate for the unlabeled loss
  double tau = 0.1;      ///< similarity temperature
  int anchors = 128;     ///< M
  double lr = 0.002;
  double momentum = 0.9;
  int batch_labeled = 64;
  int batch_unlabeled = 128;
  int epochs = 10;
  double sigma_w = 0.05;
  double sigma_s = 0.2;
  double drop_p = 0.1;
  std::uint64_t seed = 0;

  bool use_labeled_loss = true;
  bool use_unlabeled_loss = true;
  bool use_consistency_loss = true;
  /// Gate target as one-hot argmax of the weak prediction instead of the
  /// soft weak prediction.
  bool hard_targets = false;
  /// Treat weak-view targets and anchor projections as constants when
  /// differentiating.
  bool detach_targets = true;

  void validate() const;
};

Vector featurewise_std(const Matrix& x);

/// x + N(0, (sigma_w·std_j)²) per coordinate.
Vector augment_weak(const Vector& x, double sigma_w, const Vector& feature_std, std::uint64_t seed);
/// Gaussian jitter at sigma_s·std_j, then each coordinate zeroed with
/// probability drop_p.
Vector augment_strong(const Vector& x, double sigma_s, double drop_p, const Vector& feature_std,
                      std::uint64_t seed);

Matrix augment_weak_rows(const Matrix& x, double sigma_w, const Vector& feature_std, Rng& rng);
Matrix augment_strong_rows(const Matrix& x, double sigma_s, double drop_p,
                           const Vector& feature_std, Rng& rng);

/// Mean cross-entropy of predictions against one-hot labels.
double loss_labeled(const Matrix& p_w, const HardLabelVector& y);

/// (1/n_U)·Σ 𝕀[max p_w > lambda]·CE(p_s, target), target = p_w row (soft)
/// or its one-hot argmax when `hard_targets`.
double loss_unlabeled(const Matrix& p_w, const Matrix& p_s, double lambda, bool hard_targets = false);

/// softmax_m(⟨anchor_m, z⟩ / tau) over unit-norm anchors and a unit query.
Vector instance_similarity(const Matrix& anchors, const Vector& z, double tau);
Matrix instance_similarity_rows(const Matrix& anchors, const Matrix& z, double tau);

/// Mean CE(S_s row, S_w row).
double loss_consistency(const Matrix& s_s, const Matrix& s_w);

/// Already-augmented inputs for one optimization step.
struct SrlBatch {
  Matrix labeled;            ///< weak views of labeled samples
  HardLabelVector labels;
  Matrix unlabeled_weak;
  Matrix unlabeled_strong;   ///< same rows as unlabeled_weak, strong views
  Matrix anchors;            ///< M unlabeled samples, unaugmented
};

struct LossBreakdown {
  double total = 0.0;
  double labeled = 0.0;
  double unlabeled = 0.0;
  double consistency = 0.0;
  ParameterSet gradients;
};

/// ℒ_L + ℒ_U + ℒ_Con with exact gradients for every parameter tensor.
LossBreakdown srl_total_loss(const SrlModel& model, const SrlBatch& batch, const SrlConfig& cfg);

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;
  double labeled_loss = 0.0;
  double unlabeled_loss = 0.0;
  double consistency_loss = 0.0;
  double labeled_accuracy = 0.0;
};

struct TrainResult {
  SrlModel model;
  std::vector<EpochMetrics> metrics;
};

/// Mini-batch SGD with momentum. Anchors are resampled each step.
/// Throws NonConvergenceError when there is no labeled objective.
TrainResult train_srl(SrlModel model, const Matrix& labeled, const HardLabelVector& labels,
                      const Matrix& unlabeled, const SrlConfig& cfg);

/// Class probabilities with no augmentation.
Matrix predict(const SrlModel& model, const Matrix& x);

double accuracy(const Matrix& proba, const HardLabelVector& truth);

}  // namespace stct::srl
