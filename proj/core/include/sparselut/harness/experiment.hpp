#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "sparselut/harness/dataset.hpp"
#include "sparselut/model/config.hpp"
#include "sparselut/model/training.hpp"

namespace sparselut {

enum class DatasetKind { mnist, csv, synth };

struct DatasetSource {
  DatasetKind kind = DatasetKind::synth;
  std::filesystem::path data_dir;   // mnist: directory of IDX files
  std::filesystem::path train_csv;  // csv
  std::filesystem::path test_csv;   // csv
  int synth_train = 1000;
  int synth_test = 500;
  int synth_side = 16;
  int synth_classes = 2;
  std::uint64_t synth_seed = 7;
  int train_limit = 0;  // 0 keeps every sample
  int test_limit = 0;
};

struct RunSpec {
  SparsityMode mode = SparsityMode::sparselut;
  std::uint64_t seed = 1;
  friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

struct ExperimentConfig {
  ModelConfig model;  // mode and seed are overridden per run
  DatasetSource data;
  std::vector<RunSpec> runs;
  bool compile_rtl = false;
  std::filesystem::path output_dir = "out";

  /// Validates the model for every run's mode. Throws std::invalid_argument.
  void validate() const;
  ModelConfig model_for(const RunSpec& run) const;
};

/// Flat JSON object. Keys:
///   input_dim, layers (widths list), fanin, act_bits, input_bits, degree,
///   mask_epochs, phase_boundary_epochs, retrain_epochs, mask_lr, theta_update ("sgd" | "adam"),
///   retrain_lr,
///   eps1, eps2, noise_std, reg_coeff, initial_fanin, batch_size, weight_decay,
///   modes (list), seeds (list), runs (list of "mode:seed", overrides modes x seeds),
///   dataset ("mnist" | "csv" | "synth"), data_dir, train_csv, test_csv,
///   synth_train, synth_test, synth_side, synth_classes, synth_seed,
///   train_limit, test_limit, compile_rtl, output_dir.
/// Relative paths resolve against `base_dir`. Unknown keys are rejected.
/// Throws FormatError for malformed JSON, std::invalid_argument for bad values.
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Loads or generates the train/test splits described by `source`.
DatasetSplits load_datasets(const DatasetSource& source, int n_features, int n_classes);

struct RunResult {
  RunSpec spec;
  MaskDerivation derivation;
  RetrainResult retrained;
  std::uint64_t mask_checksum = 0;
  double seconds = 0.0;
};

struct ExperimentReport {
  std::vector<RunResult> runs;
  double wall_seconds = 0.0;

  /// mode,seed,accuracy,best_epoch,density,mask_checksum
  std::string report_csv() const;
  /// mode,seed,epoch,density
  std::string density_csv() const;
  /// mode,seed,stage,epoch,loss,test_accuracy
  std::string epochs_csv() const;
  /// mode,seed,seconds
  std::string timing_csv() const;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Step 1 and Step 2 for one mode and seed. Errors carry a stage label.
RunResult run_single(const ModelConfig& config, const DatasetSplits& data, const ProgressFn& progress = {});

/// Runs every configured (mode, seed) pair, in parallel when SPARSELUT_THREADS
/// asks for more than one thread, and writes report.csv, density.csv,
/// epochs.csv, timing.csv, masks/ and optionally rtl/ under output_dir.
/// Validation happens before any training.
ExperimentReport run_experiment(const ExperimentConfig& config, const DatasetSplits& data,
                                const ProgressFn& progress = {});
ExperimentReport run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Base name for a run's artifacts, e.g. "sparselut_s1".
std::string run_label(const RunSpec& run);

/// Threads requested through SPARSELUT_THREADS (default 1).
int configured_threads();

}  // namespace sparselut
