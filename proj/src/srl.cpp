#include "stct/srl.hpp"

#include "stct/errors.hpp"
#include "stct/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace stct::srl {

using numerics::kCrossEntropyClamp;

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += static_cast<std::size_t>(t.size());
  return n;
}

std::vector<double> ParameterSet::flatten() const {
  std::vector<double> flat;
  flat.reserve(scalar_count());
  for (const auto& t : tensors) flat.insert(flat.end(), t.data(), t.data() + t.size());
  return flat;
}

void ParameterSet::assign(const std::vector<double>& flat) {
  if (flat.size() != scalar_count()) throw InputDomainError("parameter vector has the wrong length");
  std::size_t pos = 0;
  for (auto& t : tensors) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), t.size(), t.data());
    pos += static_cast<std::size_t>(t.size());
  }
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet z;
  z.tensors.reserve(tensors.size());
  for (const auto& t : tensors) z.tensors.push_back(Matrix::Zero(t.rows(), t.cols()));
  return z;
}

SrlModel SrlModel::create(std::vector<int> layer_sizes, int classes, int proj_dim,
                          std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw InputDomainError("srl: encoder needs input and output widths");
  for (int s : layer_sizes) {
    if (s < 1) throw InputDomainError("srl: layer widths must be positive");
  }
  if (classes < 2 || proj_dim < 1) throw InputDomainError("srl: bad head sizes");

  SrlModel m;
  m.sizes_ = std::move(layer_sizes);
  m.classes_ = classes;
  m.proj_dim_ = proj_dim;
  Rng rng(seed);
  auto xavier = [&rng](int in, int out) {
    const double a = std::sqrt(6.0 / static_cast<double>(in + out));
    Matrix w(in, out);
    for (Index i = 0; i < w.size(); ++i) w.data()[i] = (2.0 * uniform01(rng) - 1.0) * a;
    return w;
  };
  for (std::size_t l = 0; l + 1 < m.sizes_.size(); ++l) {
    m.params_.tensors.push_back(xavier(m.sizes_[l], m.sizes_[l + 1]));
    m.params_.tensors.push_back(Matrix::Zero(1, m.sizes_[l + 1]));
  }
  m.params_.tensors.push_back(xavier(m.embed_dim(), classes));
  m.params_.tensors.push_back(Matrix::Zero(1, classes));
  m.params_.tensors.push_back(xavier(m.embed_dim(), proj_dim));
  // Small nonzero bias keeps the projection away from the origin at init.
  Matrix pb(1, proj_dim);
  for (Index j = 0; j < pb.size(); ++j) pb(0, j) = 0.1 * (2.0 * uniform01(rng) - 1.0);
  m.params_.tensors.push_back(pb);
  m.mean_ = Vector::Zero(m.sizes_.front());
  m.scale_ = Vector::Ones(m.sizes_.front());
  return m;
}

void SrlModel::fit_standardizer(const Matrix& x) {
  if (x.cols() != input_dim()) throw InputDomainError("srl: standardizer input width mismatch");
  if (x.rows() == 0) return;
  mean_ = x.colwise().mean().transpose();
  const Vector sd = featurewise_std(x);
  scale_.resize(sd.size());
  for (Index j = 0; j < sd.size(); ++j) scale_(j) = sd(j) > 1e-12 ? 1.0 / sd(j) : 1.0;
}

void SrlModel::set_standardizer(Vector mean, Vector scale) {
  if (mean.size() != input_dim() || scale.size() != input_dim()) {
    throw InputDomainError("srl: standardizer width mismatch");
  }
  mean_ = std::move(mean);
  scale_ = std::move(scale);
}

std::vector<std::string> SrlModel::tensor_names() const {
  std::vector<std::string> names;
  for (int l = 0; l < encoder_layers(); ++l) {
    names.push_back("enc" + std::to_string(l) + ".w");
    names.push_back("enc" + std::to_string(l) + ".b");
  }
  for (const char* n : {"cls.w", "cls.b", "proj.w", "proj.b"}) names.emplace_back(n);
  return names;
}

bool SrlModel::finite() const {
  return std::all_of(params_.tensors.begin(), params_.tensors.end(),
                     [](const Matrix& t) { return all_finite(t); });
}

namespace {

struct Forward {
  std::vector<Matrix> acts;  // acts[0] standardized input, acts[L] embedding
  Matrix proba;
  Matrix u;                  // projection before normalization
  Vector unorm;
  Matrix z;
};

Forward forward(const SrlModel& m, const Matrix& x, bool need_proba, bool need_proj) {
  if (x.cols() != m.input_dim()) {
    throw InputDomainError("srl: input has " + std::to_string(x.cols()) + " columns, model expects " +
                           std::to_string(m.input_dim()));
  }
  Forward f;
  const int layers = m.encoder_layers();
  f.acts.reserve(static_cast<std::size_t>(layers) + 1);
  Matrix a0 = x;
  for (Index i = 0; i < a0.rows(); ++i) {
    a0.row(i) = (a0.row(i) - m.input_mean().transpose()).cwiseProduct(m.input_scale().transpose());
  }
  f.acts.push_back(std::move(a0));
  for (int l = 0; l < layers; ++l) {
    Matrix zl = f.acts.back() * m.enc_w(l);
    zl.rowwise() += m.enc_b(l).row(0);
    f.acts.push_back(zl.array().tanh().matrix());
  }
  const Matrix& h = f.acts.back();
  if (need_proba) {
    Matrix logits = h * m.cls_w();
    logits.rowwise() += m.cls_b().row(0);
    f.proba = numerics::softmax_rows(logits, 1.0);
  }
  if (need_proj) {
    f.u = h * m.proj_w();
    f.u.rowwise() += m.proj_b().row(0);
    f.unorm.resize(f.u.rows());
    f.z.resize(f.u.rows(), f.u.cols());
    for (Index i = 0; i < f.u.rows(); ++i) {
      const double nrm = f.u.row(i).norm();
      f.unorm(i) = nrm > 1e-300 ? nrm : 1e-300;
      f.z.row(i) = f.u.row(i) / f.unorm(i);
    }
  }
  return f;
}

// d(loss)/d(logits) given d(loss)/d(softmax output).
Matrix softmax_backward(const Matrix& p, const Matrix& dp) {
  Matrix out(p.rows(), p.cols());
  for (Index i = 0; i < p.rows(); ++i) {
    const double dot = p.row(i).dot(dp.row(i));
    out.row(i) = p.row(i).cwiseProduct(dp.row(i)) - dot * p.row(i);
  }
  return out;
}

// d/dp of w_i·CE(p_i, q_i) summed over rows.
Matrix ce_grad_pred(const Matrix& p, const Matrix& q, const Vector& w) {
  Matrix g = Matrix::Zero(p.rows(), p.cols());
  for (Index i = 0; i < p.rows(); ++i) {
    if (w(i) == 0.0) continue;
    for (Index j = 0; j < p.cols(); ++j) {
      if (p(i, j) > kCrossEntropyClamp) g(i, j) = -w(i) * q(i, j) / p(i, j);
    }
  }
  return g;
}

// d/dq of w_i·CE(p_i, q_i).
Matrix ce_grad_target(const Matrix& p, const Vector& w) {
  Matrix g(p.rows(), p.cols());
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index j = 0; j < p.cols(); ++j) g(i, j) = -w(i) * std::log(std::max(p(i, j), kCrossEntropyClamp));
  }
  return g;
}

// Accumulates parameter gradients for one forward pass given upstream
// gradients on the class probabilities and/or the unit projections.
void backward(const SrlModel& m, const Forward& f, const Matrix* dproba, const Matrix* dz,
              ParameterSet& grads) {
  const int layers = m.encoder_layers();
  const Matrix& h = f.acts.back();
  Matrix dh = Matrix::Zero(h.rows(), h.cols());
  auto& g = grads.tensors;
  if (dproba) {
    const Matrix dlogits = softmax_backward(f.proba, *dproba);
    g[2 * layers] += h.transpose() * dlogits;
    g[2 * layers + 1] += dlogits.colwise().sum();
    dh += dlogits * m.cls_w().transpose();
  }
  if (dz) {
    Matrix du(f.z.rows(), f.z.cols());
    for (Index i = 0; i < f.z.rows(); ++i) {
      const double dot = f.z.row(i).dot(dz->row(i));
      du.row(i) = (dz->row(i) - dot * f.z.row(i)) / f.unorm(i);
    }
    g[2 * layers + 2] += h.transpose() * du;
    g[2 * layers + 3] += du.colwise().sum();
    dh += du * m.proj_w().transpose();
  }
  Matrix da = std::move(dh);
  for (int l = layers - 1; l >= 0; --l) {
    const Matrix& out = f.acts[static_cast<std::size_t>(l) + 1];
    const Matrix dpre = da.cwiseProduct((1.0 - out.array().square()).matrix());
    g[2 * l] += f.acts[static_cast<std::size_t>(l)].transpose() * dpre;
    g[2 * l + 1] += dpre.colwise().sum();
    if (l > 0) da = dpre * m.enc_w(l).transpose();
  }
}

Matrix one_hot_rows(const HardLabelVector& y, Index classes) {
  Matrix q = Matrix::Zero(static_cast<Index>(y.size()), classes);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || y[i] >= classes) throw InputDomainError("srl: label out of range");
    q(static_cast<Index>(i), y[i]) = 1.0;
  }
  return q;
}

Matrix argmax_one_hot(const Matrix& p) {
  Matrix q = Matrix::Zero(p.rows(), p.cols());
  const HardLabelVector h = harden(p);
  for (Index i = 0; i < p.rows(); ++i) q(i, h[static_cast<std::size_t>(i)]) = 1.0;
  return q;
}

Vector gate(const Matrix& p_w, double lambda, double weight) {
  Vector w(p_w.rows());
  for (Index i = 0; i < p_w.rows(); ++i) w(i) = p_w.row(i).maxCoeff() > lambda ? weight : 0.0;
  return w;
}

}  // namespace

Matrix SrlModel::embed(const Matrix& x) const { return forward(*this, x, false, false).acts.back(); }
Matrix SrlModel::predict_proba(const Matrix& x) const { return forward(*this, x, true, false).proba; }
Matrix SrlModel::project(const Matrix& x) const { return forward(*this, x, false, true).z; }

void SrlConfig::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InputDomainError("srl: lambda must lie in (0,1)");
  if (!(tau > 0.0)) throw InputDomainError("srl: tau must be positive");
  if (anchors < 1) throw InputDomainError("srl: anchor count must be positive");
  if (!(lr >= 0.0)) throw InputDomainError("srl: lr must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InputDomainError("srl: momentum must lie in [0,1)");
  if (batch_labeled < 1 || batch_unlabeled < 1) throw InputDomainError("srl: batch sizes must be positive");
  if (epochs < 0) throw InputDomainError("srl: epochs must be >= 0");
  if (!(sigma_w >= 0.0) || !(sigma_s >= 0.0)) throw InputDomainError("srl: noise scales must be >= 0");
  if (!(drop_p >= 0.0 && drop_p < 1.0)) throw InputDomainError("srl: drop_p must lie in [0,1)");
}

Vector featurewise_std(const Matrix& x) {
  Vector sd = Vector::Zero(x.cols());
  if (x.rows() < 2) return sd;
  const Vector mean = x.colwise().mean().transpose();
  for (Index j = 0; j < x.cols(); ++j) {
    double s = 0.0;
    for (Index i = 0; i < x.rows(); ++i) s += (x(i, j) - mean(j)) * (x(i, j) - mean(j));
    sd(j) = std::sqrt(s / static_cast<double>(x.rows() - 1));
  }
  return sd;
}

Matrix augment_weak_rows(const Matrix& x, double sigma_w, const Vector& feature_std, Rng& rng) {
  if (!(sigma_w >= 0.0)) throw InputDomainError("augment_weak: sigma_w must be >= 0");
  if (feature_std.size() != x.cols()) throw InputDomainError("augment_weak: std width mismatch");
  Matrix out = x;
  if (sigma_w == 0.0) return out;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index i = 0; i < out.rows(); ++i) {
    for (Index j = 0; j < out.cols(); ++j) out(i, j) += sigma_w * feature_std(j) * normal(rng);
  }
  return out;
}

Matrix augment_strong_rows(const Matrix& x, double sigma_s, double drop_p,
                           const Vector& feature_std, Rng& rng) {
  if (!(sigma_s >= 0.0)) throw InputDomainError("augment_strong: sigma_s must be >= 0");
  if (!(drop_p >= 0.0 && drop_p < 1.0)) throw InputDomainError("augment_strong: drop_p must lie in [0,1)");
  if (feature_std.size() != x.cols()) throw InputDomainError("augment_strong: std width mismatch");
  Matrix out = x;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index i = 0; i < out.rows(); ++i) {
    for (Index j = 0; j < out.cols(); ++j) {
      if (sigma_s > 0.0) out(i, j) += sigma_s * feature_std(j) * normal(rng);
      if (drop_p > 0.0 && uniform01(rng) < drop_p) out(i, j) = 0.0;
    }
  }
  return out;
}

Vector augment_weak(const Vector& x, double sigma_w, const Vector& feature_std, std::uint64_t seed) {
  Rng rng(seed);
  return augment_weak_rows(Matrix(x.transpose()), sigma_w, feature_std, rng).row(0).transpose();
}

Vector augment_strong(const Vector& x, double sigma_s, double drop_p, const Vector& feature_std,
                      std::uint64_t seed) {
  Rng rng(seed);
  return augment_strong_rows(Matrix(x.transpose()), sigma_s, drop_p, feature_std, rng).row(0).transpose();
}

double loss_labeled(const Matrix& p_w, const HardLabelVector& y) {
  if (static_cast<Index>(y.size()) != p_w.rows()) throw InputDomainError("loss_labeled: size mismatch");
  if (p_w.rows() == 0) return 0.0;
  double s = 0.0;
  for (Index i = 0; i < p_w.rows(); ++i) {
    const int c = y[static_cast<std::size_t>(i)];
    if (c < 0 || c >= p_w.cols()) throw InputDomainError("loss_labeled: label out of range");
    s -= std::log(std::max(p_w(i, c), kCrossEntropyClamp));
  }
  return s / static_cast<double>(p_w.rows());
}

double loss_unlabeled(const Matrix& p_w, const Matrix& p_s, double lambda, bool hard_targets) {
  if (p_w.rows() != p_s.rows() || p_w.cols() != p_s.cols()) {
    throw InputDomainError("loss_unlabeled: shape mismatch");
  }
  if (p_w.rows() == 0) return 0.0;
  const Matrix target = hard_targets ? argmax_one_hot(p_w) : p_w;
  double s = 0.0;
  for (Index i = 0; i < p_w.rows(); ++i) {
    if (p_w.row(i).maxCoeff() > lambda) s += numerics::cross_entropy_row(p_s.row(i), target.row(i));
  }
  return s / static_cast<double>(p_w.rows());
}

Matrix instance_similarity_rows(const Matrix& anchors, const Matrix& z, double tau) {
  if (anchors.cols() != z.cols()) throw InputDomainError("instance_similarity: width mismatch");
  for (Index m = 0; m < anchors.rows(); ++m) {
    if (std::abs(anchors.row(m).norm() - 1.0) > 1e-8) {
      throw InputDomainError("instance_similarity: anchor " + std::to_string(m) + " is not unit norm");
    }
  }
  for (Index i = 0; i < z.rows(); ++i) {
    if (std::abs(z.row(i).norm() - 1.0) > 1e-8) {
      throw InputDomainError("instance_similarity: query " + std::to_string(i) + " is not unit norm");
    }
  }
  return numerics::softmax_rows(z * anchors.transpose(), tau);
}

Vector instance_similarity(const Matrix& anchors, const Vector& z, double tau) {
  return instance_similarity_rows(anchors, Matrix(z.transpose()), tau).row(0).transpose();
}

double loss_consistency(const Matrix& s_s, const Matrix& s_w) {
  if (s_s.rows() != s_w.rows() || s_s.cols() != s_w.cols()) {
    throw InputDomainError("loss_consistency: shape mismatch");
  }
  if (s_s.rows() == 0) return 0.0;
  double s = 0.0;
  for (Index i = 0; i < s_s.rows(); ++i) s += numerics::cross_entropy_row(s_s.row(i), s_w.row(i));
  return s / static_cast<double>(s_s.rows());
}

LossBreakdown srl_total_loss(const SrlModel& model, const SrlBatch& batch, const SrlConfig& cfg) {
  LossBreakdown out;
  out.gradients = model.params().zeros_like();
  const Index classes = model.classes();

  const Index n_l = batch.labeled.rows();
  if (cfg.use_labeled_loss && n_l > 0) {
    if (static_cast<Index>(batch.labels.size()) != n_l) {
      throw InputDomainError("srl: labeled batch and label count differ");
    }
    const Forward f = forward(model, batch.labeled, true, false);
    out.labeled = loss_labeled(f.proba, batch.labels);
    const Vector w = Vector::Constant(n_l, 1.0 / static_cast<double>(n_l));
    const Matrix dp = ce_grad_pred(f.proba, one_hot_rows(batch.labels, classes), w);
    backward(model, f, &dp, nullptr, out.gradients);
  }

  const Index n_u = batch.unlabeled_weak.rows();
  const bool want_u = cfg.use_unlabeled_loss && n_u > 0;
  const bool want_con = cfg.use_consistency_loss && n_u > 0 && batch.anchors.rows() > 0;
  if (want_u || want_con) {
    if (batch.unlabeled_strong.rows() != n_u) {
      throw InputDomainError("srl: weak and strong unlabeled batches differ in size");
    }
    const Forward fw = forward(model, batch.unlabeled_weak, want_u, want_con);
    const Forward fs = forward(model, batch.unlabeled_strong, want_u, want_con);
    Matrix dpw;
    Matrix dps;
    Matrix dzw;
    Matrix dzs;

    if (want_u) {
      out.unlabeled = loss_unlabeled(fw.proba, fs.proba, cfg.lambda, cfg.hard_targets);
      const Vector w = gate(fw.proba, cfg.lambda, 1.0 / static_cast<double>(n_u));
      const Matrix target = cfg.hard_targets ? argmax_one_hot(fw.proba) : fw.proba;
      dps = ce_grad_pred(fs.proba, target, w);
      // The argmax target is piecewise constant, so only the soft target
      // carries a gradient.
      if (!cfg.detach_targets && !cfg.hard_targets) dpw = ce_grad_target(fs.proba, w);
    }

    if (want_con) {
      const Forward fa = forward(model, batch.anchors, false, true);
      const Matrix s_w = numerics::softmax_rows(fw.z * fa.z.transpose(), cfg.tau);
      const Matrix s_s = numerics::softmax_rows(fs.z * fa.z.transpose(), cfg.tau);
      out.consistency = loss_consistency(s_s, s_w);
      const Vector w = Vector::Constant(n_u, 1.0 / static_cast<double>(n_u));
      const Matrix dlog_s = softmax_backward(s_s, ce_grad_pred(s_s, s_w, w)) / cfg.tau;
      dzs = dlog_s * fa.z;
      Matrix dza = dlog_s.transpose() * fs.z;
      if (!cfg.detach_targets) {
        const Matrix dlog_w = softmax_backward(s_w, ce_grad_target(s_s, w)) / cfg.tau;
        dzw = dlog_w * fa.z;
        dza += dlog_w.transpose() * fw.z;
        backward(model, fa, nullptr, &dza, out.gradients);
      }
    }

    const Matrix* pw = dpw.size() ? &dpw : nullptr;
    const Matrix* zw = dzw.size() ? &dzw : nullptr;
    if (pw || zw) backward(model, fw, pw, zw, out.gradients);
    const Matrix* ps = dps.size() ? &dps : nullptr;
    const Matrix* zs = dzs.size() ? &dzs : nullptr;
    if (ps || zs) backward(model, fs, ps, zs, out.gradients);
  }

  out.total = out.labeled + out.unlabeled + out.consistency;
  if (!std::isfinite(out.total)) throw DivergenceError("srl: loss became non-finite");
  return out;
}

namespace {

std::vector<Index> shuffled(Index n, Rng& rng) {
  std::vector<Index> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(uniform_below(rng, static_cast<std::uint64_t>(i + 1)));
    std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
  }
  return p;
}

Matrix rows_of(const Matrix& m, const std::vector<Index>& idx, std::size_t begin, std::size_t end) {
  Matrix out(static_cast<Index>(end - begin), m.cols());
  for (std::size_t i = begin; i < end; ++i) out.row(static_cast<Index>(i - begin)) = m.row(idx[i]);
  return out;
}

}  // namespace

TrainResult train_srl(SrlModel model, const Matrix& labeled, const HardLabelVector& labels,
                      const Matrix& unlabeled, const SrlConfig& cfg) {
  cfg.validate();
  if (!cfg.use_labeled_loss) {
    throw NonConvergenceError("srl: training without the labeled loss has nothing to anchor the classes");
  }
  if (labeled.rows() == 0) {
    throw NonConvergenceError("srl: no labeled samples were selected; training cannot converge");
  }
  if (static_cast<Index>(labels.size()) != labeled.rows()) {
    throw InputDomainError("srl: labeled features and labels differ in count");
  }
  if (unlabeled.rows() > 0 && unlabeled.cols() != labeled.cols()) {
    throw InputDomainError("srl: labeled and unlabeled widths differ");
  }

  Rng rng(cfg.seed);
  const Matrix all = unlabeled.rows() > 0
                         ? Matrix((Matrix(labeled.rows() + unlabeled.rows(), labeled.cols()) << labeled, unlabeled).finished())
                         : labeled;
  const Vector sd = featurewise_std(all);
  ParameterSet velocity = model.params().zeros_like();

  TrainResult result;
  const Index n_l = labeled.rows();
  const Index n_u = unlabeled.rows();
  const auto bl = static_cast<std::size_t>(cfg.batch_labeled);
  const auto bu = static_cast<std::size_t>(cfg.batch_unlabeled);
  std::vector<Index> u_order;
  std::size_t u_pos = 0;
  std::vector<Index> anchor_pool(static_cast<std::size_t>(n_u));
  std::iota(anchor_pool.begin(), anchor_pool.end(), Index{0});

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const std::vector<Index> l_order = shuffled(n_l, rng);
    EpochMetrics em;
    em.epoch = epoch;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < l_order.size(); start += bl) {
      const std::size_t end = std::min(l_order.size(), start + bl);
      SrlBatch batch;
      batch.labeled = augment_weak_rows(rows_of(labeled, l_order, start, end), cfg.sigma_w, sd, rng);
      std::vector<int> ys;
      for (std::size_t i = start; i < end; ++i) ys.push_back(labels[static_cast<std::size_t>(l_order[i])]);
      batch.labels = HardLabelVector(std::move(ys));

      if (n_u > 0 && (cfg.use_unlabeled_loss || cfg.use_consistency_loss)) {
        std::vector<Index> pick;
        pick.reserve(bu);
        while (pick.size() < std::min<std::size_t>(bu, static_cast<std::size_t>(n_u))) {
          if (u_pos >= u_order.size()) {
            u_order = shuffled(n_u, rng);
            u_pos = 0;
          }
          pick.push_back(u_order[u_pos++]);
        }
        const Matrix raw = rows_of(unlabeled, pick, 0, pick.size());
        batch.unlabeled_weak = augment_weak_rows(raw, cfg.sigma_w, sd, rng);
        batch.unlabeled_strong = augment_strong_rows(raw, cfg.sigma_s, cfg.drop_p, sd, rng);
        if (cfg.use_consistency_loss) {
          const auto m = std::min<std::size_t>(static_cast<std::size_t>(cfg.anchors), anchor_pool.size());
          for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = i + uniform_below(rng, anchor_pool.size() - i);
            std::swap(anchor_pool[i], anchor_pool[j]);
          }
          batch.anchors = rows_of(unlabeled, anchor_pool, 0, m);
        }
      }

      const LossBreakdown lb = srl_total_loss(model, batch, cfg);
      auto& params = model.params().tensors;
      for (std::size_t t = 0; t < params.size(); ++t) {
        velocity.tensors[t] = cfg.momentum * velocity.tensors[t] + lb.gradients.tensors[t];
        params[t] -= cfg.lr * velocity.tensors[t];
      }
      em.loss += lb.total;
      em.labeled_loss += lb.labeled;
      em.unlabeled_loss += lb.unlabeled;
      em.consistency_loss += lb.consistency;
      ++steps;
    }
    if (!model.finite()) throw DivergenceError("srl: parameters became non-finite in epoch " + std::to_string(epoch));
    if (steps > 0) {
      const double s = static_cast<double>(steps);
      em.loss /= s;
      em.labeled_loss /= s;
      em.unlabeled_loss /= s;
      em.consistency_loss /= s;
    }
    em.labeled_accuracy = accuracy(model.predict_proba(labeled), labels);
    result.metrics.push_back(em);
  }
  result.model = std::move(model);
  return result;
}

Matrix predict(const SrlModel& model, const Matrix& x) { return model.predict_proba(x); }

double accuracy(const Matrix& proba, const HardLabelVector& truth) {
  if (static_cast<Index>(truth.size()) != proba.rows()) throw InputDomainError("accuracy: size mismatch");
  if (truth.empty()) return 0.0;
  return label_agreement(harden(proba), truth);
}

}  // namespace stct::srl
