#include "sparselut/harness/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iterator>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "sparselut/errors.hpp"
#include "sparselut/harness/atomic_file.hpp"
#include "sparselut/harness/mask_io.hpp"
#include "sparselut/harness/model_io.hpp"
#include "sparselut/lut/rtl.hpp"

namespace sparselut {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys = {
    "input_dim",   "layers",       "fanin",        "act_bits",    "input_bits",  "degree",
    "mask_epochs", "phase_boundary_epochs",        "retrain_epochs",             "mask_lr",     "theta_update",
    "retrain_lr",  "eps1",         "eps2",         "noise_std",   "reg_coeff",   "initial_fanin",
    "batch_size",  "weight_decay", "modes",        "seeds",       "runs",        "dataset",
    "data_dir",    "train_csv",    "test_csv",     "synth_train", "synth_test",  "synth_side",
    "synth_classes", "synth_seed", "train_limit",  "test_limit",  "compile_rtl", "output_dir"};

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("config key '") + key + "' has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

RunSpec parse_run(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("run '" + text + "' must be mode:seed");
  RunSpec r;
  r.mode = parse_sparsity_mode(text.substr(0, colon));
  const std::string seed = text.substr(colon + 1);
  std::size_t used = 0;
  try {
    r.seed = std::stoull(seed, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (seed.empty() || used != seed.size()) throw std::invalid_argument("run '" + text + "': bad seed");
  return r;
}

// Rethrows the active exception with `label` prefixed, keeping its type.
[[noreturn]] void rethrow_labelled(const std::string& label) {
  try {
    throw;
  } catch (const FormatError& e) {
    throw FormatError(label + ": " + e.what());
  } catch (const InvalidState& e) {
    throw InvalidState(label + ": " + e.what());
  } catch (const CapacityExceeded& e) {
    throw CapacityExceeded(label + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(label + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(label + ": " + e.what());
  }
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Dataset limit(Dataset d, int n) {
  if (n <= 0 || n >= d.size()) return d;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  return d.subset(idx);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (runs.empty()) throw std::invalid_argument("experiment has no runs");
  for (const auto& r : runs) {
    try {
      model_for(r).validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("config (") + std::string(to_string(r.mode)) + "): " + e.what());
    }
  }
  if (data.kind == DatasetKind::synth) {
    if (data.synth_train < 1 || data.synth_test < 1) throw std::invalid_argument("synth sample counts must be >= 1");
    if (data.synth_side * data.synth_side != model.input_dim()) {
      throw std::invalid_argument("synth_side^2 must equal input_dim");
    }
  }
  if (data.kind == DatasetKind::csv && (data.train_csv.empty() || data.test_csv.empty())) {
    throw std::invalid_argument("csv dataset needs train_csv and test_csv");
  }
  if (data.kind == DatasetKind::mnist && model.input_dim() != 784) {
    throw std::invalid_argument("mnist dataset needs input_dim 784");
  }
}

ModelConfig ExperimentConfig::model_for(const RunSpec& run) const {
  ModelConfig cfg = model;
  cfg.mode = run.mode;
  cfg.seed = run.seed;
  if (run.mode == SparsityMode::dense) {
    for (auto& l : cfg.layers) l.fanin = l.n_in;
  }
  return cfg;
}

ExperimentConfig parse_experiment_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("config: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!kKnownKeys.contains(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
  }

  ExperimentConfig cfg;
  const int input_dim = get_or<int>(j, "input_dim", 0);
  const auto widths = get_or<std::vector<int>>(j, "layers", {});
  if (input_dim < 1) throw std::invalid_argument("config: input_dim must be >= 1");
  if (widths.empty()) throw std::invalid_argument("config: layers must list at least one width");
  const int fanin = get_or<int>(j, "fanin", 6);
  const int bits = get_or<int>(j, "act_bits", 2);
  cfg.model = ModelConfig::uniform(input_dim, widths, fanin, bits, get_or<int>(j, "degree", 1));
  // uniform() caps fan-in at n_in; an oversized request is a config error.
  for (const auto& l : cfg.model.layers) {
    if (fanin > l.n_in) {
      throw std::invalid_argument("config: fanin " + std::to_string(fanin) + " exceeds layer input width " +
                                  std::to_string(l.n_in));
    }
  }
  cfg.model.input_bits = get_or<int>(j, "input_bits", bits);

  auto& t = cfg.model.training;
  t.mask_epochs = get_or<int>(j, "mask_epochs", t.mask_epochs);
  t.phase_boundary_epochs = get_or<int>(j, "phase_boundary_epochs", t.phase_boundary_epochs);
  t.retrain_epochs = get_or<int>(j, "retrain_epochs", t.retrain_epochs);
  t.mask_learning_rate = get_or<double>(j, "mask_lr", t.mask_learning_rate);
  t.theta_update = parse_theta_update(get_or<std::string>(j, "theta_update", std::string(to_string(t.theta_update))));
  t.retrain_learning_rate = get_or<double>(j, "retrain_lr", t.retrain_learning_rate);
  t.eps1 = get_or<double>(j, "eps1", t.eps1);
  t.eps2 = get_or<double>(j, "eps2", t.eps2);
  t.noise_std = get_or<double>(j, "noise_std", t.noise_std);
  t.reg_coeff = get_or<double>(j, "reg_coeff", t.reg_coeff);
  t.initial_fanin = get_or<int>(j, "initial_fanin", t.initial_fanin);
  t.batch_size = get_or<int>(j, "batch_size", t.batch_size);
  t.weight_decay = get_or<double>(j, "weight_decay", t.weight_decay);

  if (j.contains("runs")) {
    for (const auto& r : get_or<std::vector<std::string>>(j, "runs", {})) cfg.runs.push_back(parse_run(r));
  } else {
    const auto modes = get_or<std::vector<std::string>>(j, "modes", {"sparselut"});
    const auto seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", {1});
    for (const auto& m : modes) {
      for (auto s : seeds) cfg.runs.push_back({parse_sparsity_mode(m), s});
    }
  }

  auto& d = cfg.data;
  const auto kind = get_or<std::string>(j, "dataset", "synth");
  if (kind == "mnist") {
    d.kind = DatasetKind::mnist;
  } else if (kind == "csv") {
    d.kind = DatasetKind::csv;
  } else if (kind == "synth") {
    d.kind = DatasetKind::synth;
  } else {
    throw std::invalid_argument("config: dataset must be mnist, csv or synth");
  }
  d.data_dir = resolve(base_dir, get_or<std::string>(j, "data_dir", ""));
  d.train_csv = resolve(base_dir, get_or<std::string>(j, "train_csv", ""));
  d.test_csv = resolve(base_dir, get_or<std::string>(j, "test_csv", ""));
  d.synth_train = get_or<int>(j, "synth_train", d.synth_train);
  d.synth_test = get_or<int>(j, "synth_test", d.synth_test);
  d.synth_side = get_or<int>(j, "synth_side", d.synth_side);
  d.synth_classes = get_or<int>(j, "synth_classes", d.synth_classes);
  d.synth_seed = get_or<std::uint64_t>(j, "synth_seed", d.synth_seed);
  d.train_limit = get_or<int>(j, "train_limit", 0);
  d.test_limit = get_or<int>(j, "test_limit", 0);
  cfg.compile_rtl = get_or<bool>(j, "compile_rtl", false);
  cfg.output_dir = resolve(base_dir, get_or<std::string>(j, "output_dir", "out"));
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_experiment_config(text, path.parent_path());
}

DatasetSplits load_datasets(const DatasetSource& source, int n_features, int n_classes) {
  DatasetSplits s;
  switch (source.kind) {
    case DatasetKind::mnist: {
      std::filesystem::path dir = source.data_dir;
      if (const char* env = std::getenv("SPARSELUT_MNIST_DIR"); dir.empty() && env != nullptr) dir = env;
      if (dir.empty()) throw std::invalid_argument("mnist dataset needs data_dir or SPARSELUT_MNIST_DIR");
      s = load_mnist_dir(dir);
      break;
    }
    case DatasetKind::csv: {
      CsvDataset train = load_csv_dataset(source.train_csv, n_features, n_classes);
      s.test = load_csv_dataset(source.test_csv, n_features, n_classes, &train.scaling).data;
      s.train = std::move(train.data);
      break;
    }
    case DatasetKind::synth: {
      Rng rng(source.synth_seed);
      s.train = synth_centered_blobs(source.synth_train, source.synth_side, source.synth_classes, rng);
      s.test = synth_centered_blobs(source.synth_test, source.synth_side, source.synth_classes, rng);
      break;
    }
  }
  s.train = limit(std::move(s.train), source.train_limit);
  s.test = limit(std::move(s.test), source.test_limit);
  return s;
}

std::string run_label(const RunSpec& run) {
  return std::string(to_string(run.mode)) + "_s" + std::to_string(run.seed);
}

int configured_threads() {
  const char* env = std::getenv("SPARSELUT_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw std::invalid_argument("SPARSELUT_THREADS must be a positive integer");
  return static_cast<int>(std::min<long>(n, 256));
}

RunResult run_single(const ModelConfig& config, const DatasetSplits& data, const ProgressFn& progress) {
  RunResult r;
  r.spec = {config.mode, config.seed};
  const std::string label = run_label(r.spec);
  const auto t0 = std::chrono::steady_clock::now();
  const auto log = [&](const EpochLog& e) {
    if (!progress) return;
    std::ostringstream os;
    os << label << ' ' << e.stage << " epoch " << e.epoch + 1 << " loss " << e.loss;
    if (e.stage == "derive") os << " density " << e.density;
    if (e.test_accuracy >= 0.0) os << " test_acc " << e.test_accuracy;
    progress(os.str());
  };
  try {
    r.derivation = derive_mask(config, data.train, log);
  } catch (...) {
    rethrow_labelled("derive-mask [" + label + "]");
  }
  r.mask_checksum = mask_checksum(r.derivation.mask);
  try {
    r.retrained = retrain(config, r.derivation.mask, data.train, &data.test, log);
  } catch (...) {
    rethrow_labelled("retrain [" + label + "]");
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const DatasetSplits& data,
                                const ProgressFn& progress) {
  config.validate();
  const int threads = configured_threads();
  const auto t0 = std::chrono::steady_clock::now();

  std::mutex log_mutex;
  const ProgressFn locked = progress ? ProgressFn([&](const std::string& s) {
    std::lock_guard lock(log_mutex);
    progress(s);
  })
                                     : ProgressFn{};

  ExperimentReport report;
  report.runs.resize(config.runs.size());
  std::vector<std::exception_ptr> errors(config.runs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < config.runs.size(); i = next++) {
      try {
        report.runs[i] = run_single(config.model_for(config.runs[i]), data, locked);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n_workers = std::min<int>(threads, static_cast<int>(config.runs.size()));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto& out = config.output_dir;
  write_file_atomic(out / "report.csv", report.report_csv());
  write_file_atomic(out / "density.csv", report.density_csv());
  write_file_atomic(out / "epochs.csv", report.epochs_csv());
  write_file_atomic(out / "timing.csv", report.timing_csv());
  for (const auto& r : report.runs) {
    const std::string label = run_label(r.spec);
    write_file_atomic(out / "masks" / (label + ".mask"), mask_to_string(r.derivation.mask));
    save_model(r.retrained.model, out / "models" / (label + ".bin"));
    if (config.compile_rtl) {
      try {
        const CompiledModel compiled = compile_model(r.retrained.model);
        write_compiled(compiled, emit_rtl(compiled.netlist, compiled.tables), out / "rtl" / label);
      } catch (...) {
        rethrow_labelled("compile-rtl [" + label + "]");
      }
    }
  }
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  config.validate();
  DatasetSplits data;
  try {
    data = load_datasets(config.data, config.model.input_dim(), config.model.num_classes());
  } catch (...) {
    rethrow_labelled("load-data");
  }
  return run_experiment(config, data, progress);
}

std::string ExperimentReport::report_csv() const {
  std::string s = "mode,seed,accuracy,best_epoch,density,mask_checksum\n";
  for (const auto& r : runs) {
    const auto& d = r.derivation.density_per_epoch;
    s += std::string(to_string(r.spec.mode)) + ',' + std::to_string(r.spec.seed) + ',' +
         fmt_double(r.retrained.best_accuracy) + ',' + std::to_string(r.retrained.best_epoch) + ',' +
         fmt_double(d.empty() ? 0.0 : d.back()) + ',' + hex64(r.mask_checksum) + '\n';
  }
  return s;
}

std::string ExperimentReport::density_csv() const {
  std::string s = "mode,seed,epoch,density\n";
  for (const auto& r : runs) {
    const auto& d = r.derivation.density_per_epoch;
    for (std::size_t e = 0; e < d.size(); ++e) {
      s += std::string(to_string(r.spec.mode)) + ',' + std::to_string(r.spec.seed) + ',' +
           std::to_string(e) + ',' + fmt_double(d[e]) + '\n';
    }
  }
  return s;
}

std::string ExperimentReport::epochs_csv() const {
  std::string s = "mode,seed,stage,epoch,loss,test_accuracy\n";
  for (const auto& r : runs) {
    const std::string prefix = std::string(to_string(r.spec.mode)) + ',' + std::to_string(r.spec.seed) + ',';
    const auto& dl = r.derivation.loss_per_epoch;
    for (std::size_t e = 0; e < dl.size(); ++e) {
      s += prefix + "derive," + std::to_string(e) + ',' + fmt_double(dl[e]) + ",\n";
    }
    const auto& rl = r.retrained.loss_per_epoch;
    const auto& ra = r.retrained.test_accuracy_per_epoch;
    for (std::size_t e = 0; e < rl.size(); ++e) {
      s += prefix + "retrain," + std::to_string(e) + ',' + fmt_double(rl[e]) + ',' +
           (e < ra.size() ? fmt_double(ra[e]) : std::string()) + '\n';
    }
  }
  return s;
}

std::string ExperimentReport::timing_csv() const {
  std::string s = "mode,seed,seconds\n";
  for (const auto& r : runs) {
    s += std::string(to_string(r.spec.mode)) + ',' + std::to_string(r.spec.seed) + ',' +
         fmt_double(r.seconds) + '\n';
  }
  return s;
}

}  // namespace sparselut
