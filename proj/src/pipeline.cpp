#include "stct/pipeline.hpp"

#include "stct/errors.hpp"
#include "stct/io.hpp"
#include "stct/random.hpp"

#include <json.hpp>

#include <chrono>
#include <fstream>
#include <sstream>

namespace stct::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char* to_string(Ablation a) {
  switch (a) {
    case Ablation::None: return "none";
    case Ablation::NoSrl: return "no_srl";
    case Ablation::NoNmc: return "no_nmc";
    case Ablation::NoLabeledLoss: return "no_labeled_loss";
  }
  return "?";
}

const char* to_string(EncoderKind k) {
  switch (k) {
    case EncoderKind::Identity: return "identity";
    case EncoderKind::RandomProjection: return "random_projection";
    case EncoderKind::Precomputed: return "precomputed";
  }
  return "?";
}

void RunConfig::validate() const {
  if (data_dir.empty()) {
    synthetic.validate();
  } else if (!fs::is_directory(data_dir)) {
    throw UsageError("dataset directory not found: " + data_dir.string());
  }
  if (test_n < 0) throw InputDomainError("test_n must be non-negative");
  if (noise.kind != NoiseKind::None && !(noise.rate >= 0.0 && noise.rate <= 1.0)) {
    throw InputDomainError("noise rate must lie in [0, 1]");
  }
  nmc.validate();
  selection.validate();
  srl.validate();
  if (max_epoch < 1) throw InputDomainError("max_epoch must be at least 1");
  if (proj_dim < 1) throw InputDomainError("proj_dim must be positive");
  for (int h : hidden) {
    if (h < 1) throw InputDomainError("hidden layer widths must be positive");
  }
  if (hidden.empty()) throw InputDomainError("at least one hidden layer is required");
  if (encoder.kind == EncoderKind::RandomProjection && encoder.dim < 1) {
    throw InputDomainError("encoder.dim must be positive");
  }
  if (encoder.kind == EncoderKind::Precomputed && !fs::is_regular_file(encoder.embeddings)) {
    throw UsageError("precomputed embeddings not found: " + encoder.embeddings.string());
  }
}

// --- configuration keys --------------------------------------------------------

namespace {

template <class E>
E pick(const config::ConfigFile& f, const std::string& key, E fallback,
       std::initializer_list<std::pair<const char*, E>> options) {
  const auto v = f.get_optional(key);
  if (!v) return fallback;
  std::string allowed;
  for (const auto& [name, value] : options) {
    if (*v == name) return value;
    allowed += allowed.empty() ? name : std::string("|") + name;
  }
  throw UsageError(f.origin() + ": '" + key + "' must be one of " + allowed + ", got '" + *v + "'");
}

int as_int(long long v, const std::string& key) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw UsageError("'" + key + "' is out of range");
  }
  return static_cast<int>(v);
}

}  // namespace

void apply_mixture_keys(const config::ConfigFile& f, synthetic::MixtureSpec& s) {
  s.classes = as_int(f.get_int("synthetic.classes", s.classes), "synthetic.classes");
  s.n = f.get_int("synthetic.n", s.n);
  s.dim = as_int(f.get_int("synthetic.dim", s.dim), "synthetic.dim");
  s.sep = f.get_double("synthetic.sep", s.sep);
  s.balance = f.get_doubles("synthetic.balance", s.balance);
  s.placement = pick(f, "synthetic.placement", s.placement,
                     {{"orthogonal", synthetic::CenterPlacement::Orthogonal},
                      {"random", synthetic::CenterPlacement::Random}});
  s.seed = f.get_u64("synthetic.seed", s.seed);
}

void apply_nmc_keys(const config::ConfigFile& f, nmc::NmcConfig& c) {
  c.r = f.get_double("nmc.r", c.r);
  c.eta = f.get_double("nmc.eta", c.eta);
  c.eta_mode = pick(f, "nmc.eta_mode", c.eta_mode,
                    {{"relative", nmc::EtaMode::RelativeToLipschitz}, {"absolute", nmc::EtaMode::Absolute}});
  c.beta = f.get_double("nmc.beta", c.beta);
  c.delta = f.get_double("nmc.delta", c.delta);
  c.steps_per_split = as_int(f.get_int("nmc.steps_per_split", c.steps_per_split), "nmc.steps_per_split");
  c.reg_scale = f.get_double("nmc.reg_scale", c.reg_scale);
  if (f.has("nmc.reg")) c.reg = f.get_double("nmc.reg", 0.0);
  c.max_rounds = as_int(f.get_int("nmc.max_rounds", c.max_rounds), "nmc.max_rounds");
  c.seed = f.get_u64("nmc.seed", c.seed);
}

void apply_encoder_keys(const config::ConfigFile& f, EncoderSpec& e) {
  e.kind = pick(f, "encoder", e.kind,
                {{"identity", EncoderKind::Identity},
                 {"random_projection", EncoderKind::RandomProjection},
                 {"precomputed", EncoderKind::Precomputed}});
  e.dim = as_int(f.get_int("encoder.dim", e.dim), "encoder.dim");
  e.seed = f.get_u64("encoder.seed", e.seed);
  e.embeddings = f.get_path("encoder.path", e.embeddings);
}

RunConfig run_config_from(const config::ConfigFile& f) {
  RunConfig c;
  if (const auto ds = f.get_optional("dataset"); ds && *ds != "synthetic") c.data_dir = f.get_path("dataset", {});
  apply_mixture_keys(f, c.synthetic);
  c.test_n = f.get_int("test.n", c.test_n);

  c.noise.kind = pick(f, "noise.type", c.noise.kind,
                      {{"sym", NoiseKind::Symmetric}, {"asym", NoiseKind::Asymmetric}, {"none", NoiseKind::None}});
  c.noise.rate = f.get_double("noise.rate", c.noise.rate);
  c.noise.convention = pick(f, "noise.convention", c.noise.convention,
                            {{"include", noise::SymmetricConvention::IncludeSelf},
                             {"exclude", noise::SymmetricConvention::ExcludeSelf}});
  c.noise.seed = f.get_u64("noise.seed", c.noise.seed);

  apply_nmc_keys(f, c.nmc);

  c.selection.k = as_int(f.get_int("selection.k", c.selection.k), "selection.k");
  c.selection.mu = f.get_double("selection.mu", c.selection.mu);

  auto& s = c.srl;
  s.lambda = f.get_double("srl.lambda", s.lambda);
  s.tau = f.get_double("srl.tau", s.tau);
  s.anchors = as_int(f.get_int("srl.anchors", s.anchors), "srl.anchors");
  s.lr = f.get_double("srl.lr", s.lr);
  s.momentum = f.get_double("srl.momentum", s.momentum);
  s.batch_labeled = as_int(f.get_int("srl.batch_labeled", s.batch_labeled), "srl.batch_labeled");
  s.batch_unlabeled = as_int(f.get_int("srl.batch_unlabeled", s.batch_unlabeled), "srl.batch_unlabeled");
  s.epochs = as_int(f.get_int("srl.epochs", s.epochs), "srl.epochs");
  s.sigma_w = f.get_double("srl.sigma_w", s.sigma_w);
  s.sigma_s = f.get_double("srl.sigma_s", s.sigma_s);
  s.drop_p = f.get_double("srl.drop_p", s.drop_p);
  s.seed = f.get_u64("srl.seed", s.seed);
  s.use_unlabeled_loss = f.get_bool("srl.unlabeled_loss", s.use_unlabeled_loss);
  s.use_consistency_loss = f.get_bool("srl.consistency_loss", s.use_consistency_loss);
  s.hard_targets = f.get_bool("srl.hard_targets", s.hard_targets);
  s.detach_targets = f.get_bool("srl.detach_targets", s.detach_targets);
  c.hidden = f.get_ints("srl.hidden", c.hidden);
  c.proj_dim = as_int(f.get_int("srl.proj_dim", c.proj_dim), "srl.proj_dim");

  c.max_epoch = as_int(f.get_int("max_epoch", c.max_epoch), "max_epoch");
  apply_encoder_keys(f, c.encoder);
  c.ablation = pick(f, "ablation", c.ablation,
                    {{"none", Ablation::None},
                     {"no_srl", Ablation::NoSrl},
                     {"no_nmc", Ablation::NoNmc},
                     {"no_labeled_loss", Ablation::NoLabeledLoss}});
  c.output_dir = f.get_path("output_dir", c.output_dir);
  c.record_timing = f.get_bool("record_timing", c.record_timing);
  f.require_all_used();
  return c;
}

RunConfig load_run_config(const fs::path& path) { return run_config_from(config::ConfigFile::load(path)); }

// --- report serialization --------------------------------------------------------

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

json epoch_object(const EpochRecord& r) {
  json j;
  j["type"] = "epoch";
  j["epoch"] = r.epoch;
  j["corrected_label_acc"] = opt(r.corrected_label_acc);
  j["selection_precision"] = opt(r.selection_precision);
  j["selection_recall"] = opt(r.selection_recall);
  j["test_acc"] = opt(r.test_acc);
  j["nmc_rounds"] = r.nmc_rounds;
  j["selected"] = r.selected;
  j["srl_loss"] = r.srl_loss;
  if (r.wall_seconds) j["wall_seconds"] = *r.wall_seconds;
  return j;
}

}  // namespace

std::string epoch_json(const EpochRecord& r) { return epoch_object(r).dump(); }

std::string nmc_record_json(int epoch, const nmc::NmcRecord& r) {
  json j;
  j["type"] = "nmc_round";
  j["epoch"] = epoch;
  j["round"] = r.round;
  j["val_loss"] = r.val_loss;
  j["agreement"] = r.agreement;
  if (r.label_acc) j["label_acc"] = *r.label_acc;
  return j.dump();
}

std::string RunReport::to_jsonl() const {
  std::string out;
  for (const auto& e : epochs) out += epoch_json(e) + "\n";
  json s;
  s["type"] = "summary";
  s["epochs"] = summary.epochs;
  s["noisy_label_acc"] = opt(summary.noisy_label_acc);
  s["final_corrected_label_acc"] = opt(summary.final_corrected_label_acc);
  s["final_test_acc"] = opt(summary.final_test_acc);
  if (summary.wall_seconds) s["wall_seconds"] = *summary.wall_seconds;
  out += s.dump() + "\n";
  return out;
}

RunReport RunReport::from_jsonl(const std::string& text) {
  RunReport r;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError("report line " + std::to_string(number) + ": " + e.what(), -1);
    }
    const std::string type = j.value("type", "");
    if (type == "epoch") {
      EpochRecord e;
      e.epoch = j.at("epoch").get<int>();
      e.corrected_label_acc = opt_from(j, "corrected_label_acc");
      e.selection_precision = opt_from(j, "selection_precision");
      e.selection_recall = opt_from(j, "selection_recall");
      e.test_acc = opt_from(j, "test_acc");
      e.nmc_rounds = j.value("nmc_rounds", 0);
      e.selected = j.value("selected", Index{0});
      e.srl_loss = j.value("srl_loss", 0.0);
      e.wall_seconds = opt_from(j, "wall_seconds");
      r.epochs.push_back(e);
    } else if (type == "summary") {
      r.summary.epochs = j.value("epochs", 0);
      r.summary.noisy_label_acc = opt_from(j, "noisy_label_acc");
      r.summary.final_corrected_label_acc = opt_from(j, "final_corrected_label_acc");
      r.summary.final_test_acc = opt_from(j, "final_test_acc");
      r.summary.wall_seconds = opt_from(j, "wall_seconds");
    }
  }
  return r;
}

// --- checkpoints -----------------------------------------------------------------

void save_checkpoint(const fs::path& dir, const srl::SrlModel& model) {
  fs::create_directories(dir);
  const auto names = model.tensor_names();
  std::ostringstream manifest;
  manifest << "layer_sizes = ";
  for (std::size_t i = 0; i < model.layer_sizes().size(); ++i) manifest << (i ? "," : "") << model.layer_sizes()[i];
  manifest << "\nclasses = " << model.classes() << "\nproj_dim = " << model.proj_dim() << "\ntensors = ";
  for (std::size_t i = 0; i < names.size(); ++i) {
    manifest << (i ? "," : "") << names[i];
    io::save_matrix(dir / (names[i] + ".bin"), model.params().tensors[i]);
  }
  manifest << "\ninput_mean = input_mean.bin\ninput_scale = input_scale.bin\n";
  io::save_matrix(dir / "input_mean.bin", model.input_mean().transpose());
  io::save_matrix(dir / "input_scale.bin", model.input_scale().transpose());
  io::write_text(dir / "manifest.txt", manifest.str());
}

srl::SrlModel load_checkpoint(const fs::path& dir) {
  const auto f = config::ConfigFile::load(dir / "manifest.txt");
  const auto sizes = f.get_ints("layer_sizes", {});
  const auto classes = static_cast<int>(f.get_int("classes", 0));
  const auto proj = static_cast<int>(f.get_int("proj_dim", 0));
  srl::SrlModel model = srl::SrlModel::create(sizes, classes, proj, 0);
  const auto expected = model.tensor_names();
  const std::string listed = f.get_string("tensors", "");
  std::string joined;
  for (std::size_t i = 0; i < expected.size(); ++i) joined += (i ? "," : "") + expected[i];
  if (listed != joined) throw FormatError("checkpoint manifest lists tensors '" + listed + "'", -1);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    Matrix t = io::load_matrix(dir / (expected[i] + ".bin"));
    auto& slot = model.params().tensors[i];
    if (t.rows() != slot.rows() || t.cols() != slot.cols()) {
      throw FormatError("checkpoint tensor " + expected[i] + " has the wrong shape", 8);
    }
    slot = std::move(t);
  }
  const Matrix mean = io::load_matrix(f.get_path("input_mean", "input_mean.bin"));
  const Matrix scale = io::load_matrix(f.get_path("input_scale", "input_scale.bin"));
  if (mean.rows() != 1 || scale.rows() != 1) throw FormatError("checkpoint standardizer must be a row", 8);
  model.set_standardizer(mean.row(0).transpose(), scale.row(0).transpose());
  f.require_all_used();
  return model;
}

// --- the alternating loop ------------------------------------------------------------

namespace {

template <class F>
auto with_context(const std::string& ctx, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const FormatError& e) {
    throw FormatError(ctx + ": " + e.what(), e.offset());
  } catch (const InputDomainError& e) {
    throw InputDomainError(ctx + ": " + e.what());
  } catch (const SingularityError& e) {
    throw SingularityError(ctx + ": " + e.what());
  } catch (const DegenerateSplitError& e) {
    throw DegenerateSplitError(ctx + ": " + e.what());
  } catch (const DivergenceError& e) {
    throw DivergenceError(ctx + ": " + e.what());
  } catch (const NonConvergenceError& e) {
    throw NonConvergenceError(ctx + ": " + e.what());
  } catch (const UsageError& e) {
    throw UsageError(ctx + ": " + e.what());
  }
}

struct PreparedData {
  Matrix x;
  HardLabelVector observed;
  std::optional<HardLabelVector> clean;
  int classes = 0;
  Matrix test_x;
  std::optional<HardLabelVector> test_y;
};

noise::NoiseTransitionMatrix transition_for(const NoiseSpec& spec, int classes) {
  switch (spec.kind) {
    case NoiseKind::None: return noise::make_symmetric_T(classes, 0.0);
    case NoiseKind::Symmetric: return noise::make_symmetric_T(classes, spec.rate, spec.convention);
    case NoiseKind::Asymmetric: return noise::make_asymmetric_T(classes, spec.rate, noise::cyclic_flip_map(classes));
  }
  throw InputDomainError("unknown noise kind");
}

PreparedData prepare(const RunConfig& cfg) {
  PreparedData p;
  if (cfg.data_dir.empty()) {
    const Dataset train = synthetic::gaussian_mixture(cfg.synthetic);
    p.x = train.features.data();
    p.clean = *train.clean_labels;
    p.classes = cfg.synthetic.classes;
    p.observed = noise::inject_noise(*p.clean, transition_for(cfg.noise, p.classes), cfg.noise.seed).labels;
    if (cfg.test_n > 0) {
      const Dataset test = synthetic::sample_mixture(cfg.synthetic, cfg.test_n, derive_seed(cfg.synthetic.seed, 2));
      p.test_x = test.features.data();
      p.test_y = *test.clean_labels;
    }
    return p;
  }
  const Dataset d = io::load_dataset(cfg.data_dir);
  p.x = d.features.data();
  p.clean = d.clean_labels;
  p.classes = static_cast<int>(d.labels.classes());
  if (fs::exists(cfg.data_dir / io::kNoisyLabelsFile) || !p.clean) {
    p.observed = harden(d.labels);
  } else {
    p.observed = noise::inject_noise(*p.clean, transition_for(cfg.noise, p.classes), cfg.noise.seed).labels;
  }
  if (fs::exists(cfg.data_dir / io::kTestFeaturesFile) && fs::exists(cfg.data_dir / io::kTestLabelsFile)) {
    p.test_x = io::load_matrix(cfg.data_dir / io::kTestFeaturesFile);
    p.test_y = io::load_labels(cfg.data_dir / io::kTestLabelsFile);
  }
  return p;
}

std::vector<int> layer_sizes(const RunConfig& cfg, int input_dim) {
  std::vector<int> sizes{input_dim};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  return sizes;
}

srl::SrlConfig supervised_only(srl::SrlConfig s) {
  s.use_unlabeled_loss = false;
  s.use_consistency_loss = false;
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Matrix initial_embeddings(const EncoderSpec& spec, const Matrix& x) {
  switch (spec.kind) {
    case EncoderKind::Identity: return x;
    case EncoderKind::RandomProjection: {
      Rng rng(spec.seed);
      std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(spec.dim)));
      Matrix r(x.cols(), spec.dim);
      for (Index i = 0; i < r.size(); ++i) r.data()[i] = normal(rng);
      return x * r;
    }
    case EncoderKind::Precomputed: {
      Matrix h = io::load_matrix(spec.embeddings);
      if (h.rows() != x.rows()) {
        throw InputDomainError("precomputed embeddings have " + std::to_string(h.rows()) + " rows, expected " +
                               std::to_string(x.rows()));
      }
      return h;
    }
  }
  throw InputDomainError("unknown encoder provider");
}

srl::TrainResult train_supervised(const RunConfig& cfg, const Matrix& x, const HardLabelVector& labels,
                                  std::uint64_t seed) {
  srl::SrlModel model = srl::SrlModel::create(layer_sizes(cfg, static_cast<int>(x.cols())),
                                              std::max(2, labels.inferred_classes()), cfg.proj_dim, seed);
  model.fit_standardizer(x);
  srl::SrlConfig s = supervised_only(cfg.srl);
  s.seed = derive_seed(seed, 1);
  s.epochs = cfg.srl.epochs * cfg.max_epoch;
  return srl::train_srl(std::move(model), x, labels, Matrix(0, x.cols()), s);
}

RunResult run_stct(const RunConfig& cfg) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const PreparedData data = with_context("data", [&] { return prepare(cfg); });
  const Index n = data.x.rows();
  const int classes = data.classes;

  std::ofstream metrics;
  if (!cfg.output_dir.empty()) {
    fs::create_directories(cfg.output_dir);
    metrics.open(cfg.output_dir / "metrics.jsonl", std::ios::binary | std::ios::trunc);
    if (!metrics) throw UsageError("cannot write to " + cfg.output_dir.string());
  }

  const Matrix h0 = with_context("encoder", [&] { return initial_embeddings(cfg.encoder, data.x); });
  srl::SrlModel model = srl::SrlModel::create(layer_sizes(cfg, static_cast<int>(data.x.cols())), classes,
                                              cfg.proj_dim, derive_seed(cfg.srl.seed, 0));
  model.fit_standardizer(data.x);

  RunResult result;
  HardLabelVector current = data.observed;
  SoftLabelMatrix soft = one_hot(current, classes);
  if (data.clean) result.report.summary.noisy_label_acc = label_agreement(current, *data.clean);

  for (int epoch = 1; epoch <= cfg.max_epoch; ++epoch) {
    const auto t_epoch = std::chrono::steady_clock::now();
    const std::string ctx = "epoch " + std::to_string(epoch);
    EpochRecord rec;
    rec.epoch = epoch;

    const bool initial_encoder = epoch == 1 || cfg.ablation == Ablation::NoSrl;
    const Matrix h = initial_encoder ? h0 : model.embed(data.x);

    if (cfg.ablation != Ablation::NoNmc) {
      nmc::NmcConfig ncfg = cfg.nmc;
      ncfg.seed = derive_seed(cfg.nmc.seed, static_cast<std::uint64_t>(epoch));
      const nmc::NmcResult nr = with_context(ctx + " nmc", [&] {
        return nmc::run_nmc(FeatureMatrix(h), one_hot(current, classes), ncfg, data.clean);
      });
      soft = nr.corrected;
      current = harden(soft);
      rec.nmc_rounds = nr.rounds();
      if (metrics.is_open()) {
        for (const auto& r : nr.trace.records) metrics << nmc_record_json(epoch, r) << '\n';
      }
    }
    if (data.clean) rec.corrected_label_acc = label_agreement(current, *data.clean);

    srl::SrlConfig scfg = cfg.srl;
    scfg.seed = derive_seed(cfg.srl.seed, static_cast<std::uint64_t>(epoch));
    if (cfg.ablation == Ablation::NoLabeledLoss) scfg.use_labeled_loss = false;

    srl::TrainResult tr;
    if (cfg.ablation == Ablation::NoSrl) {
      rec.selected = n;
      tr = with_context(ctx + " classifier", [&] {
        return srl::train_srl(std::move(model), data.x, current, Matrix(0, data.x.cols()), supervised_only(scfg));
      });
    } else {
      selection::SelectionConfig sel = cfg.selection;
      sel.epoch = epoch;
      const int k = sel.k > 0 ? sel.k : selection::default_k(n, classes);
      const auto split = with_context(ctx + " selection", [&] {
        const auto yp = selection::knn_pseudo_labels(FeatureMatrix(h), current, k, classes);
        const auto chosen = selection::select_clean(current, yp, sel.mu_hat(), classes);
        return selection::split_labeled_unlabeled(data.x, current, chosen);
      });
      rec.selected = static_cast<Index>(split.labeled.indices.size());
      if (data.clean) {
        std::size_t hit = 0;
        for (Index i : split.labeled.indices) {
          const auto u = static_cast<std::size_t>(i);
          hit += current[u] == (*data.clean)[u];
        }
        std::size_t correct = 0;
        for (std::size_t i = 0; i < current.size(); ++i) correct += current[i] == (*data.clean)[i];
        rec.selection_precision = split.labeled.indices.empty()
                                      ? 0.0
                                      : static_cast<double>(hit) / static_cast<double>(split.labeled.indices.size());
        rec.selection_recall = correct == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(correct);
      }
      const Matrix labeled_x = split.labeled.indices.empty() ? Matrix(0, data.x.cols()) : split.labeled.features.data();
      tr = with_context(ctx + " srl", [&] {
        return srl::train_srl(std::move(model), labeled_x, split.labeled.labels, split.unlabeled.features, scfg);
      });
    }
    model = std::move(tr.model);
    rec.srl_loss = tr.metrics.empty() ? 0.0 : tr.metrics.back().loss;
    if (data.test_y) rec.test_acc = srl::accuracy(srl::predict(model, data.test_x), *data.test_y);
    if (cfg.record_timing) rec.wall_seconds = seconds_since(t_epoch);
    if (metrics.is_open()) {
      metrics << epoch_json(rec) << '\n';
      metrics.flush();
    }
    result.report.epochs.push_back(rec);
  }

  auto& s = result.report.summary;
  s.epochs = static_cast<int>(result.report.epochs.size());
  s.final_corrected_label_acc = result.report.epochs.back().corrected_label_acc;
  s.final_test_acc = result.report.epochs.back().test_acc;
  if (cfg.record_timing) s.wall_seconds = seconds_since(t_start);

  result.model = std::move(model);
  result.corrected = current;
  result.corrected_soft = soft;
  if (!cfg.output_dir.empty()) {
    io::write_text(cfg.output_dir / "report.jsonl", result.report.to_jsonl());
    io::save_matrix(cfg.output_dir / "corrected_labels.bin", result.corrected_soft.data());
    io::save_labels(cfg.output_dir / "corrected_hard_labels.bin", result.corrected);
    save_checkpoint(cfg.output_dir / "model", result.model);
  }
  return result;
}

}  // namespace stct::pipeline
