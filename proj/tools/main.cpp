#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sparselut/errors.hpp"
#include "sparselut/harness/atomic_file.hpp"
#include "sparselut/harness/experiment.hpp"
#include "sparselut/harness/heatmap.hpp"
#include "sparselut/harness/mask_io.hpp"
#include "sparselut/harness/model_io.hpp"
#include "sparselut/lut/rtl.hpp"

namespace fs = std::filesystem;
using namespace sparselut;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitFormat = 3;

struct Common {
  bool quiet = false;
};

ProgressFn progress_sink(const Common& c) {
  if (c.quiet) return {};
  return [](const std::string& line) { std::cerr << line << '\n'; };
}

EpochCallback epoch_sink(const Common& c) {
  if (c.quiet) return {};
  return [](const EpochLog& e) {
    std::cerr << e.stage << " epoch " << e.epoch + 1 << " loss " << e.loss;
    if (e.stage == "derive") std::cerr << " density " << e.density;
    if (e.test_accuracy >= 0.0) std::cerr << " test_acc " << e.test_accuracy;
    std::cerr << '\n';
  };
}

// The run a single-run subcommand acts on: --mode/--seed, else the config's first run.
RunSpec pick_run(const ExperimentConfig& cfg, const std::string& mode, std::optional<std::uint64_t> seed) {
  RunSpec r = cfg.runs.front();
  if (!mode.empty()) r.mode = parse_sparsity_mode(mode);
  if (seed) r.seed = *seed;
  return r;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed fan-in sparse connectivity search and LUT compilation"};
  app.require_subcommand(1);
  Common common;
  app.add_flag("-q,--quiet", common.quiet, "Suppress per-epoch progress on stderr");

  // derive-mask
  std::string dm_config, dm_out, dm_mode, dm_density;
  std::optional<std::uint64_t> dm_seed;
  auto* derive = app.add_subcommand("derive-mask", "Step 1: search a fixed fan-in connectivity mask");
  derive->add_option("--config", dm_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  derive->add_option("--out", dm_out, "Output mask file")->required();
  derive->add_option("--mode", dm_mode, "random | deepr_star | sparselut | dense");
  derive->add_option("--seed", dm_seed, "Seed (default: first configured run)");
  derive->add_option("--density-out", dm_density, "Write per-epoch density CSV here");

  // retrain
  std::string rt_config, rt_mask, rt_out, rt_mode;
  std::optional<std::uint64_t> rt_seed;
  auto* retrain_cmd = app.add_subcommand("retrain", "Step 2: quantized training on a frozen mask");
  retrain_cmd->add_option("--config", rt_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  retrain_cmd->add_option("--mask", rt_mask, "Mask file from derive-mask")->required()->check(CLI::ExistingFile);
  retrain_cmd->add_option("--out", rt_out, "Output model file")->required();
  retrain_cmd->add_option("--mode", rt_mode, "Mode recorded for validation (default: first configured run)");
  retrain_cmd->add_option("--seed", rt_seed, "Seed (default: first configured run)");

  // compile-rtl
  std::string cr_model, cr_outdir;
  auto* compile = app.add_subcommand("compile-rtl", "Enumerate truth tables and emit Verilog");
  compile->add_option("--model", cr_model, "Model file from retrain")->required()->check(CLI::ExistingFile);
  compile->add_option("--outdir", cr_outdir, "Output directory")->required();

  // report
  std::string rp_config, rp_modes, rp_outdir;
  int rp_seeds = 0;
  bool rp_rtl = false;
  auto* report = app.add_subcommand("report", "Run every configured mode and seed and write CSV reports");
  report->add_option("--config", rp_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  report->add_option("--modes", rp_modes, "Comma-separated modes, overrides the config");
  report->add_option("--seeds", rp_seeds, "Number of seeds per mode (1..N), overrides the config")
      ->check(CLI::PositiveNumber);
  report->add_option("--outdir", rp_outdir, "Output directory, overrides the config");
  report->add_flag("--rtl", rp_rtl, "Also compile every trained model to RTL");

  // heatmap
  std::string hm_mask, hm_model, hm_out;
  int hm_side = 0;
  auto* heatmap = app.add_subcommand("heatmap", "First-layer connectivity or weight heatmap as CSV");
  auto* hm_mask_opt = heatmap->add_option("--mask", hm_mask, "Mask file: per-pixel connection counts")
                          ->check(CLI::ExistingFile);
  auto* hm_model_opt = heatmap->add_option("--model", hm_model, "Model file: per-pixel mean |W|")
                           ->check(CLI::ExistingFile);
  hm_mask_opt->excludes(hm_model_opt);
  heatmap->add_option("--side", hm_side, "Grid side (default: sqrt of the input width)");
  heatmap->add_option("--out", hm_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*derive) {
      const ExperimentConfig cfg = load_experiment_config(dm_config);
      const ModelConfig model = cfg.model_for(pick_run(cfg, dm_mode, dm_seed));
      model.validate();
      const DatasetSplits data = load_datasets(cfg.data, model.input_dim(), model.num_classes());
      const MaskDerivation d = derive_mask(model, data.train, epoch_sink(common));
      write_mask(d.mask, fs::path(dm_out));
      if (!dm_density.empty()) {
        ExperimentReport r;
        r.runs.push_back({{model.mode, model.seed}, d, {}, mask_checksum(d.mask), 0.0});
        write_file_atomic(dm_density, r.density_csv());
      }
    } else if (*retrain_cmd) {
      const ExperimentConfig cfg = load_experiment_config(rt_config);
      const ModelConfig model = cfg.model_for(pick_run(cfg, rt_mode, rt_seed));
      model.validate();
      const FeatureMask mask = read_mask(fs::path(rt_mask));
      const DatasetSplits data = load_datasets(cfg.data, model.input_dim(), model.num_classes());
      const RetrainResult r = retrain(model, mask, data.train, &data.test, epoch_sink(common));
      save_model(r.model, rt_out);
      std::cout << "best_accuracy " << r.best_accuracy << " epoch " << r.best_epoch << '\n';
    } else if (*compile) {
      const TrainedModel model = load_model(cr_model);
      const CompiledModel compiled = compile_model(model);
      write_compiled(compiled, emit_rtl(compiled.netlist, compiled.tables), cr_outdir);
      std::cout << "tables " << compiled.tables.size() << " entries " << compiled.total_entries() << '\n';
    } else if (*report) {
      ExperimentConfig cfg = load_experiment_config(rp_config);
      if (!rp_modes.empty() || rp_seeds > 0) {
        std::vector<SparsityMode> modes;
        if (rp_modes.empty()) {
          for (const auto& r : cfg.runs) {
            if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
          }
        } else {
          for (const auto& m : split_csv(rp_modes)) modes.push_back(parse_sparsity_mode(m));
        }
        const int n_seeds = rp_seeds > 0 ? rp_seeds : 1;
        cfg.runs.clear();
        for (auto m : modes) {
          for (int s = 1; s <= n_seeds; ++s) cfg.runs.push_back({m, static_cast<std::uint64_t>(s)});
        }
      }
      if (!rp_outdir.empty()) cfg.output_dir = rp_outdir;
      cfg.compile_rtl = cfg.compile_rtl || rp_rtl;
      const ExperimentReport r = run_experiment(cfg, progress_sink(common));
      std::cout << r.report_csv();
    } else if (*heatmap) {
      Matrix grid;
      if (!hm_mask.empty()) {
        grid = connectivity_heatmap(read_mask(fs::path(hm_mask)).layers.front(), hm_side);
      } else if (!hm_model.empty()) {
        grid = weight_heatmap(load_model(hm_model), hm_side);
      } else {
        throw std::invalid_argument("heatmap needs --mask or --model");
      }
      write_grid_csv(grid, hm_out);
      const WindowStats s = central_window_stats(grid);
      std::cout << "center_mean " << s.center_mean << " border_mean " << s.border_mean << " center_share "
                << s.center_share << '\n';
    }
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kExitFormat;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}
