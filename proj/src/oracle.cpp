#include "stct/oracle.hpp"

#include "stct/errors.hpp"
#include "stct/nmc.hpp"
#include "stct/numerics.hpp"
#include "stct/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace stct::oracle {

namespace {

const char* check_name(Check c) {
  switch (c) {
    case Check::Relative: return "relative";
    case Check::Absolute: return "absolute";
    case Check::AtMost: return "at_most";
    case Check::AtLeast: return "at_least";
  }
  return "?";
}

}  // namespace

OracleReport make_report(std::string name, std::string inputs_digest, double oracle_value,
                         double impl_value, double tolerance, Check check) {
  OracleReport r;
  r.name = std::move(name);
  r.inputs_digest = std::move(inputs_digest);
  r.oracle_value = oracle_value;
  r.impl_value = impl_value;
  r.abs_error = std::abs(impl_value - oracle_value);
  r.rel_error = r.abs_error / std::max(std::abs(oracle_value), 1e-300);
  r.tolerance = tolerance;
  r.check = check_name(check);
  double err = 0.0;
  switch (check) {
    case Check::Relative: err = r.rel_error; break;
    case Check::Absolute: err = r.abs_error; break;
    case Check::AtMost: err = std::max(0.0, impl_value - oracle_value); break;
    case Check::AtLeast: err = std::max(0.0, oracle_value - impl_value); break;
  }
  r.pass = std::isfinite(impl_value) && err <= tolerance;
  return r;
}

std::string to_json_line(const OracleReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["inputs_digest"] = r.inputs_digest;
  j["oracle_value"] = r.oracle_value;
  j["impl_value"] = r.impl_value;
  j["abs_error"] = r.abs_error;
  j["rel_error"] = r.rel_error;
  j["tolerance"] = r.tolerance;
  j["check"] = r.check;
  j["pass"] = r.pass;
  return j.dump();
}

OracleReport from_json_line(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  OracleReport r;
  r.name = j.at("name").get<std::string>();
  r.inputs_digest = j.at("inputs_digest").get<std::string>();
  r.oracle_value = j.at("oracle_value").get<double>();
  r.impl_value = j.at("impl_value").get<double>();
  r.abs_error = j.at("abs_error").get<double>();
  r.rel_error = j.at("rel_error").get<double>();
  r.tolerance = j.at("tolerance").get<double>();
  r.check = j.at("check").get<std::string>();
  r.pass = j.at("pass").get<bool>();
  return r;
}

void write_reports(const std::string& path, const std::vector<OracleReport>& reports) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write oracle reports to " + path);
  for (const auto& r : reports) out << to_json_line(r) << '\n';
}

std::vector<OracleReport> read_reports(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read oracle reports from " + path);
  std::vector<OracleReport> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(from_json_line(line));
  }
  return out;
}

std::string digest(std::initializer_list<const Matrix*> mats, std::uint64_t extra) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const Matrix* m : mats) {
    const std::int64_t dims[2] = {m->rows(), m->cols()};
    mix(dims, sizeof dims);
    mix(m->data(), sizeof(double) * static_cast<std::size_t>(m->size()));
  }
  mix(&extra, sizeof extra);
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// --- naive linear algebra -------------------------------------------------

Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw InputDomainError("naive_matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

Matrix naive_transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

Matrix gauss_jordan_inverse(const Matrix& a) {
  const Index n = a.rows();
  if (a.cols() != n) throw InputDomainError("gauss_jordan_inverse: matrix is not square");
  Matrix work(n, 2 * n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      work(i, j) = a(i, j);
      work(i, n + j) = i == j ? 1.0 : 0.0;
    }
  }
  for (Index col = 0; col < n; ++col) {
    Index pivot = col;
    for (Index r = col + 1; r < n; ++r) {
      if (std::abs(work(r, col)) > std::abs(work(pivot, col))) pivot = r;
    }
    if (work(pivot, col) == 0.0) throw SingularityError("gauss_jordan_inverse: singular matrix");
    for (Index j = 0; j < 2 * n; ++j) std::swap(work(col, j), work(pivot, j));
    const double d = work(col, col);
    for (Index j = 0; j < 2 * n; ++j) work(col, j) /= d;
    for (Index r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = work(r, col);
      if (f == 0.0) continue;
      for (Index j = 0; j < 2 * n; ++j) work(r, j) -= f * work(col, j);
    }
  }
  Matrix inv(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) inv(i, j) = work(i, n + j);
  }
  return inv;
}

namespace {

Matrix regularized_gram_inverse(const Matrix& a, double reg) {
  Matrix g = naive_matmul(naive_transpose(a), a);
  for (Index i = 0; i < g.rows(); ++i) g(i, i) += reg;
  return gauss_jordan_inverse(g);
}

}  // namespace

Matrix naive_ridge(const Matrix& a, const Matrix& b, double reg) {
  return naive_matmul(regularized_gram_inverse(a, reg), naive_matmul(naive_transpose(a), b));
}

double naive_validation_loss(const Matrix& ht, const Matrix& hv, const Matrix& yt, const Matrix& yv,
                             double reg) {
  const Matrix w = naive_ridge(ht, yt, reg);
  const Matrix pred = naive_matmul(hv, w);
  double s = 0.0;
  for (Index i = 0; i < yv.rows(); ++i) {
    for (Index j = 0; j < yv.cols(); ++j) {
      const double r = yv(i, j) - pred(i, j);
      s += r * r;
    }
  }
  return s / static_cast<double>(yv.rows());
}

Matrix fd_label_gradient(const Matrix& ht, const Matrix& hv, const Matrix& yt, const Matrix& yv,
                         double reg, double h) {
  if (!(h > 0.0)) throw InputDomainError("fd_label_gradient: step must be positive");
  // The loss is quadratic in Yt, so precomputing the (fixed) inverse does
  // not change what is being differenced.
  const Matrix hat = naive_matmul(hv, naive_matmul(regularized_gram_inverse(ht, reg), naive_transpose(ht)));
  auto loss = [&](const Matrix& y) {
    const Matrix pred = naive_matmul(hat, y);
    double s = 0.0;
    for (Index i = 0; i < yv.rows(); ++i) {
      for (Index j = 0; j < yv.cols(); ++j) {
        const double r = yv(i, j) - pred(i, j);
        s += r * r;
      }
    }
    return s / static_cast<double>(yv.rows());
  };
  Matrix grad(yt.rows(), yt.cols());
  Matrix probe = yt;
  for (Index i = 0; i < yt.rows(); ++i) {
    for (Index j = 0; j < yt.cols(); ++j) {
      const double keep = probe(i, j);
      probe(i, j) = keep + h;
      const double up = loss(probe);
      probe(i, j) = keep - h;
      const double down = loss(probe);
      probe(i, j) = keep;
      grad(i, j) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InputDomainError("relative_error: length mismatch");
  double diff = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

double relative_error(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InputDomainError("relative_error: shape mismatch");
  return relative_error(std::vector<double>(a.data(), a.data() + a.size()),
                        std::vector<double>(b.data(), b.data() + b.size()));
}

// --- SRL scalar re-implementation --------------------------------------------

NaiveForward naive_srl_forward(const srl::SrlModel& model, const Matrix& x) {
  const int layers = model.encoder_layers();
  NaiveForward out;
  out.embedding.resize(x.rows(), model.embed_dim());
  out.proba.resize(x.rows(), model.classes());
  out.projection.resize(x.rows(), model.proj_dim());
  for (Index i = 0; i < x.rows(); ++i) {
    std::vector<double> a(static_cast<std::size_t>(x.cols()));
    for (Index j = 0; j < x.cols(); ++j) {
      a[static_cast<std::size_t>(j)] = (x(i, j) - model.input_mean()(j)) * model.input_scale()(j);
    }
    for (int l = 0; l < layers; ++l) {
      const Matrix& w = model.enc_w(l);
      const Matrix& b = model.enc_b(l);
      std::vector<double> next(static_cast<std::size_t>(w.cols()));
      for (Index o = 0; o < w.cols(); ++o) {
        double s = b(0, o);
        for (Index k = 0; k < w.rows(); ++k) s += a[static_cast<std::size_t>(k)] * w(k, o);
        next[static_cast<std::size_t>(o)] = std::tanh(s);
      }
      a = std::move(next);
    }
    for (std::size_t k = 0; k < a.size(); ++k) out.embedding(i, static_cast<Index>(k)) = a[k];

    std::vector<double> logits(static_cast<std::size_t>(model.classes()));
    double mx = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < model.classes(); ++c) {
      double s = model.cls_b()(0, c);
      for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * model.cls_w()(static_cast<Index>(k), c);
      logits[static_cast<std::size_t>(c)] = s;
      mx = std::max(mx, s);
    }
    double denom = 0.0;
    for (double v : logits) denom += std::exp(v - mx);
    for (int c = 0; c < model.classes(); ++c) {
      out.proba(i, c) = std::exp(logits[static_cast<std::size_t>(c)] - mx) / denom;
    }

    double norm2 = 0.0;
    std::vector<double> u(static_cast<std::size_t>(model.proj_dim()));
    for (int p = 0; p < model.proj_dim(); ++p) {
      double s = model.proj_b()(0, p);
      for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * model.proj_w()(static_cast<Index>(k), p);
      u[static_cast<std::size_t>(p)] = s;
      norm2 += s * s;
    }
    const double norm = std::sqrt(norm2);
    for (int p = 0; p < model.proj_dim(); ++p) out.projection(i, p) = u[static_cast<std::size_t>(p)] / norm;
  }
  return out;
}

namespace {

double ce(const double* p, const double* q, Index n) {
  double s = 0.0;
  for (Index j = 0; j < n; ++j) s -= q[j] * std::log(std::max(p[j], 1e-12));
  return s;
}

Matrix similarity(const Matrix& z, const Matrix& anchors, double tau) {
  Matrix s(z.rows(), anchors.rows());
  for (Index i = 0; i < z.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Index m = 0; m < anchors.rows(); ++m) {
      double d = 0.0;
      for (Index k = 0; k < z.cols(); ++k) d += z(i, k) * anchors(m, k);
      s(i, m) = d / tau;
      mx = std::max(mx, s(i, m));
    }
    double denom = 0.0;
    for (Index m = 0; m < anchors.rows(); ++m) denom += std::exp(s(i, m) - mx);
    for (Index m = 0; m < anchors.rows(); ++m) s(i, m) = std::exp(s(i, m) - mx) / denom;
  }
  return s;
}

}  // namespace

double naive_srl_loss(const srl::SrlModel& model, const srl::SrlBatch& batch, const srl::SrlConfig& cfg,
                      const srl::SrlModel* frozen) {
  const srl::SrlModel& teacher = frozen ? *frozen : model;
  double total = 0.0;
  if (cfg.use_labeled_loss && batch.labeled.rows() > 0) {
    const NaiveForward f = naive_srl_forward(model, batch.labeled);
    double s = 0.0;
    for (Index i = 0; i < f.proba.rows(); ++i) {
      s -= std::log(std::max(f.proba(i, batch.labels[static_cast<std::size_t>(i)]), 1e-12));
    }
    total += s / static_cast<double>(f.proba.rows());
  }
  const Index n_u = batch.unlabeled_weak.rows();
  if (n_u == 0) return total;
  const NaiveForward weak = naive_srl_forward(teacher, batch.unlabeled_weak);
  const NaiveForward strong = naive_srl_forward(model, batch.unlabeled_strong);
  if (cfg.use_unlabeled_loss) {
    double s = 0.0;
    for (Index i = 0; i < n_u; ++i) {
      double mx = 0.0;
      Index arg = 0;
      for (Index c = 0; c < weak.proba.cols(); ++c) {
        if (weak.proba(i, c) > mx) {
          mx = weak.proba(i, c);
          arg = c;
        }
      }
      if (!(mx > cfg.lambda)) continue;
      std::vector<double> target(static_cast<std::size_t>(weak.proba.cols()), 0.0);
      for (Index c = 0; c < weak.proba.cols(); ++c) {
        target[static_cast<std::size_t>(c)] = cfg.hard_targets ? (c == arg ? 1.0 : 0.0) : weak.proba(i, c);
      }
      const Matrix ps_row = strong.proba.row(i);
      s += ce(ps_row.data(), target.data(), weak.proba.cols());
    }
    total += s / static_cast<double>(n_u);
  }
  if (cfg.use_consistency_loss && batch.anchors.rows() > 0) {
    const NaiveForward anchor = naive_srl_forward(teacher, batch.anchors);
    const Matrix sw = similarity(weak.projection, anchor.projection, cfg.tau);
    const Matrix ss = similarity(strong.projection, anchor.projection, cfg.tau);
    double s = 0.0;
    for (Index i = 0; i < n_u; ++i) {
      const Matrix a = ss.row(i);
      const Matrix b = sw.row(i);
      s += ce(a.data(), b.data(), ss.cols());
    }
    total += s / static_cast<double>(n_u);
  }
  return total;
}

std::vector<double> fd_srl_gradient(const srl::SrlModel& model, const srl::SrlBatch& batch,
                                    const srl::SrlConfig& cfg, double h) {
  const srl::SrlModel frozen = model;
  const srl::SrlModel* teacher = cfg.detach_targets ? &frozen : nullptr;
  srl::SrlModel probe = model;
  std::vector<double> flat = probe.params().flatten();
  std::vector<double> grad(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double keep = flat[i];
    flat[i] = keep + h;
    probe.params().assign(flat);
    const double up = naive_srl_loss(probe, batch, cfg, teacher);
    flat[i] = keep - h;
    probe.params().assign(flat);
    const double down = naive_srl_loss(probe, batch, cfg, teacher);
    flat[i] = keep;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

// --- Monte Carlo ------------------------------------------------------------

double CoverageSummary::reach_at(std::size_t beta_index, int s) const {
  if (s <= 0) return 0.0;
  return reach.at(beta_index).at(static_cast<std::size_t>(s - 1));
}

double CoverageSummary::full_at(int s) const {
  if (s <= 0) return 0.0;
  return full.at(static_cast<std::size_t>(s - 1));
}

CoverageSummary mc_coverage(Index n, double p_subtrain, int rounds, int trials, std::uint64_t seed,
                            std::vector<double> betas) {
  if (n < 1 || rounds < 0 || trials < 1) throw InputDomainError("mc_coverage: bad sizes");
  if (!(p_subtrain > 0.0 && p_subtrain < 1.0)) throw InputDomainError("mc_coverage: p must lie in (0,1)");
  CoverageSummary out;
  out.n = n;
  out.p_subtrain = p_subtrain;
  out.rounds = rounds;
  out.trials = trials;
  out.betas = std::move(betas);
  out.reach.assign(out.betas.size(), std::vector<double>(static_cast<std::size_t>(rounds), 0.0));
  out.full.assign(static_cast<std::size_t>(rounds), 0.0);
  out.mean_coverage.assign(static_cast<std::size_t>(rounds), 0.0);

  const auto take = static_cast<Index>(std::llround(p_subtrain * static_cast<double>(n)));
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::vector<unsigned char> covered(static_cast<std::size_t>(n));
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::fill(covered.begin(), covered.end(), 0);
    Index count = 0;
    for (int s = 0; s < rounds; ++s) {
      for (Index i = 0; i < take; ++i) {
        const Index j = i + static_cast<Index>(uniform_below(rng, static_cast<std::uint64_t>(n - i)));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        auto& c = covered[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
        if (!c) {
          c = 1;
          ++count;
        }
      }
      const double frac = static_cast<double>(count) / static_cast<double>(n);
      const auto si = static_cast<std::size_t>(s);
      out.mean_coverage[si] += frac;
      if (count == n) out.full[si] += 1.0;
      for (std::size_t b = 0; b < out.betas.size(); ++b) {
        if (frac >= out.betas[b]) out.reach[b][si] += 1.0;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(trials);
  for (auto& v : out.mean_coverage) v *= inv;
  for (auto& v : out.full) v *= inv;
  for (auto& row : out.reach) {
    for (auto& v : row) v *= inv;
  }
  return out;
}

int brute_force_sampling_times(Index n, double p_subtrain, double beta, int max_rounds) {
  const double miss = 1.0 - p_subtrain;
  double miss_s = 1.0;
  for (int s = 1; s <= max_rounds; ++s) {
    miss_s *= miss;
    double prod = 1.0;
    for (Index i = 0; i < n; ++i) prod *= (1.0 - miss_s);
    if (prod >= beta) return s;
  }
  return -1;
}

HoeffdingSummary mc_hoeffding(const Classifier& classifier, const PopulationSampler& sampler,
                              long long n_v, double eps, int trials, std::uint64_t seed,
                              long long reference_n) {
  if (n_v < 1 || trials < 1 || reference_n < 1) throw InputDomainError("mc_hoeffding: bad sizes");
  HoeffdingSummary out;
  out.trials = trials;
  out.n_v = n_v;
  out.eps = eps;
  Rng ref_rng(derive_seed(seed, 0));
  long long errors = 0;
  for (long long i = 0; i < reference_n; ++i) {
    const LabeledPoint p = sampler(ref_rng);
    errors += classifier(p.x) != p.y;
  }
  out.reference_risk = static_cast<double>(errors) / static_cast<double>(reference_n);
  Rng rng(derive_seed(seed, 1));
  int deviations = 0;
  for (int t = 0; t < trials; ++t) {
    long long e = 0;
    for (long long i = 0; i < n_v; ++i) {
      const LabeledPoint p = sampler(rng);
      e += classifier(p.x) != p.y;
    }
    const double risk = static_cast<double>(e) / static_cast<double>(n_v);
    if (std::abs(risk - out.reference_risk) >= eps) ++deviations;
  }
  out.deviation_frequency = static_cast<double>(deviations) / static_cast<double>(trials);
  out.bound = 2.0 * std::exp(-2.0 * static_cast<double>(n_v) * eps * eps);
  return out;
}

namespace {

int nearest_center(const Matrix& centers, const double* x) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Index c = 0; c < centers.rows(); ++c) {
    double d = 0.0;
    for (Index j = 0; j < centers.cols(); ++j) d += (x[j] - centers(c, j)) * (x[j] - centers(c, j));
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

int draw_row(const Matrix& t, int row, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (Index j = 0; j < t.cols(); ++j) {
    acc += t(row, j);
    if (u < acc) return static_cast<int>(j);
  }
  for (Index j = t.cols() - 1; j > 0; --j) {
    if (t(row, j) > 0.0) return static_cast<int>(j);
  }
  return 0;
}

}  // namespace

Theorem1Summary mc_theorem1(const synthetic::MixtureSpec& mixture, const noise::NoiseTransitionMatrix& t,
                            int trials, std::uint64_t seed) {
  if (t.classes() != mixture.classes) throw InputDomainError("mc_theorem1: class count mismatch");
  const Dataset data = synthetic::gaussian_mixture(mixture);
  const Matrix centers = synthetic::mixture_centers(mixture);
  const Matrix& x = data.features.data();
  const HardLabelVector& clean = *data.clean_labels;
  std::vector<int> pred(clean.size());
  long long clean_hits = 0;
  std::vector<double> freq(static_cast<std::size_t>(mixture.classes), 0.0);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const Matrix row = x.row(static_cast<Index>(i));
    pred[i] = nearest_center(centers, row.data());
    clean_hits += pred[i] == clean[i];
    freq[static_cast<std::size_t>(clean[i])] += 1.0;
  }
  Theorem1Summary out;
  out.clean_accuracy = static_cast<double>(clean_hits) / static_cast<double>(clean.size());
  for (int c = 0; c < mixture.classes; ++c) {
    out.predicted += freq[static_cast<std::size_t>(c)] / static_cast<double>(clean.size()) * t(c, c);
  }
  long long noisy_hits = 0;
  Rng rng(seed);
  for (int trial = 0; trial < trials; ++trial) {
    for (std::size_t i = 0; i < clean.size(); ++i) noisy_hits += pred[i] == draw_row(t.matrix(), clean[i], rng);
  }
  out.noisy_accuracy = static_cast<double>(noisy_hits) / (static_cast<double>(trials) * static_cast<double>(clean.size()));
  return out;
}

// --- suites -----------------------------------------------------------------

namespace {

Matrix random_matrix(Index r, Index c, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

}  // namespace

std::vector<OracleReport> gradient_suite(std::uint64_t seed) {
  std::vector<OracleReport> out;
  Rng rng(seed);

  {
    // Label-update step versus −eta·(finite-difference gradient).
    double worst = 0.0;
    std::uint64_t h = 0;
    for (int inst = 0; inst < 100; ++inst) {
      const int d = uniform_int(rng, 1, 5);
      const int c = uniform_int(rng, 1, 4);
      const int n_t = uniform_int(rng, 2, 20);
      const int n_v = uniform_int(rng, 2, 20);
      const double reg = 0.05 + uniform01(rng);
      const double eta = 0.01 + uniform01(rng);
      const Matrix ht = random_matrix(n_t, d, rng);
      const Matrix hv = random_matrix(n_v, d, rng);
      const Matrix yt = random_matrix(n_t, c, rng);
      const Matrix yv = random_matrix(n_v, c, rng);
      const SoftLabelMatrix updated = nmc::meta_label_update(FeatureMatrix(ht), FeatureMatrix(hv), SoftLabelMatrix(yt),
                                                             SoftLabelMatrix(yv), eta, reg);
      const Matrix step = updated.data() - yt;
      const Matrix expected = -eta * fd_label_gradient(ht, hv, yt, yv, reg, 1e-5);
      worst = std::max(worst, relative_error(expected, step));
      h = h * 31 + static_cast<std::uint64_t>(n_t * 1000 + n_v * 100 + d * 10 + c);
    }
    out.push_back(make_report("label_update_vs_fd_100", digest({}, h), 0.0, worst, 1e-6, Check::Absolute));
  }
  {
    const Matrix a = random_matrix(6, 3, rng);
    const Matrix b = random_matrix(6, 2, rng);
    const Matrix impl = numerics::ridge_solve(a, b, 0.1);
    const Matrix ref = naive_ridge(a, b, 0.1);
    out.push_back(make_report("ridge_vs_gauss_jordan", digest({&a, &b}), 0.0, relative_error(ref, impl), 1e-10,
                              Check::Absolute));
  }
  {
    const Matrix ht = random_matrix(8, 3, rng);
    const Matrix hv = random_matrix(5, 3, rng);
    const Matrix yt = random_matrix(8, 4, rng);
    const Matrix impl =
        nmc::predict_validation(FeatureMatrix(ht), SoftLabelMatrix(yt), FeatureMatrix(hv), 0.2).data();
    const Matrix ref = naive_matmul(hv, naive_ridge(ht, yt, 0.2));
    out.push_back(make_report("predict_validation_two_step", digest({&ht, &hv, &yt}), 0.0,
                              relative_error(ref, impl), 1e-10, Check::Absolute));
  }
  for (const bool detach : {false, true}) {
    double worst = 0.0;
    for (int point = 0; point < 20; ++point) {
      const int d = 6;
      const int classes = 3;
      srl::SrlModel model = srl::SrlModel::create({d, 5, 4}, classes, 3, derive_seed(seed, 100 + point));
      // Scale up the weights so some confidence gates open.
      for (auto& t : model.params().tensors) t *= 1.0 + 2.0 * uniform01(rng);
      srl::SrlBatch batch;
      batch.labeled = random_matrix(5, d, rng);
      std::vector<int> ys;
      for (int i = 0; i < 5; ++i) ys.push_back(uniform_int(rng, 0, classes - 1));
      batch.labels = HardLabelVector(ys);
      batch.unlabeled_weak = random_matrix(6, d, rng);
      batch.unlabeled_strong = batch.unlabeled_weak + 0.3 * random_matrix(6, d, rng);
      batch.anchors = random_matrix(4, d, rng);
      srl::SrlConfig cfg;
      cfg.tau = 0.5;
      cfg.detach_targets = detach;
      // Put the gate between two observed confidences, away from both.
      const Matrix pw = naive_srl_forward(model, batch.unlabeled_weak).proba;
      std::vector<double> conf;
      for (Index i = 0; i < pw.rows(); ++i) conf.push_back(pw.row(i).maxCoeff());
      std::sort(conf.begin(), conf.end());
      cfg.lambda = 0.5 * (conf[2] + conf[3]);
      const auto impl = srl::srl_total_loss(model, batch, cfg).gradients.flatten();
      const auto ref = fd_srl_gradient(model, batch, cfg, 1e-5);
      worst = std::max(worst, relative_error(ref, impl));
    }
    out.push_back(make_report(detach ? "srl_gradients_vs_fd_detached_20" : "srl_gradients_vs_fd_exact_20",
                              digest({}, seed), 0.0, worst, 1e-5, Check::Absolute));
  }
  {
    srl::SrlModel model = srl::SrlModel::create({7, 6, 5}, 4, 3, derive_seed(seed, 7));
    const Matrix x = random_matrix(40, 7, rng);
    model.fit_standardizer(x);
    const HardLabelVector impl = harden(srl::predict(model, x));
    const HardLabelVector ref = harden(naive_srl_forward(model, x).proba);
    out.push_back(make_report("predict_vs_scalar_forward", digest({&x}), 1.0, label_agreement(impl, ref), 0.0,
                              Check::Absolute));
  }
  return out;
}

std::vector<OracleReport> theorem_suite(std::uint64_t seed) {
  std::vector<OracleReport> out;
  const synthetic::MixtureSpec bench = synthetic::standard_benchmark();
  {
    const auto t = noise::make_symmetric_T(10, 0.8, noise::SymmetricConvention::IncludeSelf);
    const Theorem1Summary s = mc_theorem1(bench, t, 20, derive_seed(seed, 1));
    const double impl = noise::theorem1_noisy_accuracy(noise::ClassPrior::uniform(10), t);
    out.push_back(make_report("bayes_noisy_acc_c10_rho0.8_include", digest({&t.matrix()}, bench.seed),
                              s.noisy_accuracy, impl, 0.01, Check::Absolute));
    out.push_back(make_report("bayes_clean_acc_c10_rho0.8_include", digest({&t.matrix()}, bench.seed), 0.999,
                              s.clean_accuracy, 0.0, Check::AtLeast));
  }
  {
    synthetic::MixtureSpec two = bench;
    two.classes = 2;
    const auto t = noise::make_symmetric_T(2, 0.2, noise::SymmetricConvention::ExcludeSelf);
    const Theorem1Summary s = mc_theorem1(two, t, 20, derive_seed(seed, 2));
    const double impl = noise::theorem1_noisy_accuracy(noise::ClassPrior::uniform(2), t);
    out.push_back(make_report("bayes_noisy_acc_c2_rho0.2_exclude", digest({&t.matrix()}, two.seed),
                              s.noisy_accuracy, impl, 0.01, Check::Absolute));
  }
  {
    const auto t = noise::make_symmetric_T(10, 0.0);
    const Theorem1Summary s = mc_theorem1(bench, t, 2, derive_seed(seed, 3));
    out.push_back(make_report("bayes_noisy_acc_identity", digest({&t.matrix()}, bench.seed), s.noisy_accuracy,
                              noise::theorem1_noisy_accuracy(noise::ClassPrior::uniform(10), t), 0.01,
                              Check::Absolute));
  }
  {
    // Nearest-center classifier on the benchmark mixture with labels
    // corrupted so that its population risk is close to one half.
    const Matrix centers = synthetic::mixture_centers(bench);
    const auto t = noise::make_symmetric_T(10, 5.0 / 9.0, noise::SymmetricConvention::IncludeSelf);
    const Matrix tm = t.matrix();
    PopulationSampler sampler = [&centers, &tm](Rng& rng) {
      std::normal_distribution<double> normal(0.0, 1.0);
      const int c = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(centers.rows())));
      LabeledPoint p;
      p.x.resize(centers.cols());
      for (Index j = 0; j < centers.cols(); ++j) p.x(j) = centers(c, j) + normal(rng);
      p.y = draw_row(tm, c, rng);
      return p;
    };
    Classifier classify = [&centers](const Vector& x) { return nearest_center(centers, x.data()); };
    const HoeffdingSummary h = mc_hoeffding(classify, sampler, 1000, 0.05, 10000, derive_seed(seed, 4), 1000000);
    const double bound = noise::hoeffding_bound(1000, 0.05);
    out.push_back(make_report("hoeffding_nv1000_eps0.05_frequency", digest({&tm}, 1000), bound,
                              h.deviation_frequency, 0.0, Check::AtMost));
    out.push_back(make_report("hoeffding_bound_arithmetic", digest({}, 1000), 2.0 * std::exp(-5.0), bound, 1e-12,
                              Check::Relative));
  }
  return out;
}

std::vector<OracleReport> coverage_suite(std::uint64_t seed) {
  std::vector<OracleReport> out;
  {
    const int impl = nmc::required_sampling_times(50000, 0.5, 0.9999);
    const int brute = brute_force_sampling_times(50000, 0.5, 0.9999);
    out.push_back(make_report("sampling_times_n50000_closed_form", digest({}, 50000), 29.0, impl, 0.0,
                              Check::Absolute));
    out.push_back(make_report("sampling_times_n50000_vs_direct_product", digest({}, 50000), brute, impl, 1.0,
                              Check::Absolute));
    const CoverageSummary mc = mc_coverage(50000, 0.5, impl, 1000, derive_seed(seed, 10), {0.9999});
    out.push_back(make_report("coverage_n50000_reach_beta_at_bound", digest({}, 50000), 0.5, mc.reach_at(0, impl),
                              0.0, Check::AtLeast));
  }
  {
    // At n = 1000 the all-covered probability is measurable, so the
    // simulated threshold can be compared with the analytic one directly.
    const int impl = nmc::required_sampling_times(1000, 0.5, 0.99);
    const CoverageSummary mc = mc_coverage(1000, 0.5, 5 * impl, 2000, derive_seed(seed, 11), {0.99});
    int empirical = -1;
    for (int s = 1; s <= 5 * impl; ++s) {
      if (mc.full_at(s) >= 0.99) {
        empirical = s;
        break;
      }
    }
    out.push_back(make_report("coverage_n1000_threshold_within_one_round", digest({}, 1000), empirical, impl, 1.0,
                              Check::Absolute));
    out.push_back(make_report("coverage_n1000_reach_beta_at_bound", digest({}, 1000), 0.5, mc.reach_at(0, impl), 0.0,
                              Check::AtLeast));
    out.push_back(make_report("coverage_n1000_reach_beta_at_5x_bound", digest({}, 1000), 0.999,
                              mc.reach_at(0, 5 * impl), 0.0, Check::AtLeast));
  }
  {
    // Validation fraction r = 0.7 means sub-training probability 0.3.
    const int impl = nmc::required_sampling_times(100, 0.7, 0.99);
    const CoverageSummary mc = mc_coverage(100, 0.3, 3 * impl, 4000, derive_seed(seed, 12), {0.99});
    int empirical = -1;
    for (int s = 1; s <= 3 * impl; ++s) {
      if (mc.full_at(s) >= 0.99) {
        empirical = s;
        break;
      }
    }
    out.push_back(make_report("coverage_n100_val_fraction_0.7_threshold", digest({}, 100), empirical, impl, 1.0,
                              Check::Absolute));
  }
  return out;
}

std::vector<OracleReport> run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "gradients") return gradient_suite(seed);
  if (name == "theorems") return theorem_suite(seed);
  if (name == "coverage") return coverage_suite(seed);
  if (name == "all") {
    auto out = gradient_suite(seed);
    for (auto& r : theorem_suite(seed)) out.push_back(std::move(r));
    for (auto& r : coverage_suite(seed)) out.push_back(std::move(r));
    return out;
  }
  throw UsageError("unknown oracle suite '" + name + "' (expected theorems, gradients, coverage or all)");
}

}  // namespace stct::oracle
