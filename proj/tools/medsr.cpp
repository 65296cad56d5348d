// medsr command-line entry point.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numeric/model
// error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "medsr/bench.hpp"
#include "medsr/degrade.hpp"
#include "medsr/io.hpp"
#include "medsr/metrics.hpp"
#include "medsr/models.hpp"
#include "medsr/synth.hpp"

namespace fs = std::filesystem;
using namespace medsr;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return 1;
    case ErrorKind::model: return 3;
    default: return 2;
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ModelWeights weights_or_seed(models::ModelKind kind, int scale, const std::string& path, const std::optional<std::uint64_t>& init_seed) {
  if (!path.empty()) return load_weights(path);
  if (init_seed) return models::init_weights(kind, scale, *init_seed);
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Medical image super-resolution benchmark toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("medsr ") + MEDSR_VERSION);

  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("--seed", seed, "Random seed (default 0)")->capture_default_str();
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads, 0 = machine default")
                          ->envname("MEDSR_THREADS")
                          ->check(CLI::NonNegativeNumber);

  // degrade
  auto* degrade_cmd = app.add_subcommand("degrade", "Make an LR image (or an HR/LR pair directory) from HR input");
  std::string deg_in, deg_out, deg_profile = "classical";
  int deg_scale = 2;
  double deg_blur = 0.0, deg_noise = 0.0;
  std::optional<int> deg_quality;
  degrade_cmd->add_option("--in", deg_in, "HR image or corpus directory")->required();
  degrade_cmd->add_option("--out", deg_out, "LR image or pairs directory")->required();
  degrade_cmd->add_option("--scale", deg_scale, "Downscale factor")->check(CLI::IsMember({2, 3, 4}))->capture_default_str();
  degrade_cmd->add_option("--profile", deg_profile, "classical or high-order")
      ->check(CLI::IsMember({"classical", "high-order", "high_order"}))
      ->capture_default_str();
  degrade_cmd->add_option("--blur", deg_blur, "Classical blur sigma (pixels)");
  degrade_cmd->add_option("--noise", deg_noise, "Classical noise sigma (0-255 scale)");
  degrade_cmd->add_option("--quality", deg_quality, "Classical compression quality 1-100");

  // upscale
  auto* upscale_cmd = app.add_subcommand("upscale", "Super-resolve an LR image");
  std::string up_model, up_weights, up_in, up_out;
  int up_scale = 2;
  std::optional<std::uint64_t> up_init_seed;
  upscale_cmd->add_option("--model", up_model, "bicubic, srcnn, swinlite or rrdblite")
      ->required()
      ->check(CLI::IsMember({"bicubic", "srcnn", "swinlite", "rrdblite"}));
  upscale_cmd->add_option("--weights", up_weights, "MSRW weight file");
  upscale_cmd->add_option("--init-seed", up_init_seed, "Use seeded initial weights instead of a file");
  upscale_cmd->add_option("--scale", up_scale, "Upscale factor")->check(CLI::IsMember({2, 3, 4}))->capture_default_str();
  upscale_cmd->add_option("--in", up_in, "LR image")->required();
  upscale_cmd->add_option("--out", up_out, "SR image (.pgm or .msrf)")->required();

  // metric
  auto* metric_cmd = app.add_subcommand("metric", "Score a test image against a reference");
  std::string met_ref, met_test, met_list = "all";
  bool met_json = false;
  metric_cmd->add_option("--ref", met_ref, "Reference (HR) image")->required();
  metric_cmd->add_option("--test", met_test, "Test (SR) image")->required();
  metric_cmd->add_option("--metrics", met_list, "Comma-separated metric names or 'all'")->capture_default_str();
  metric_cmd->add_flag("--json", met_json, "Print a JSON object");

  // train-srcnn
  auto* train_cmd = app.add_subcommand("train-srcnn", "Train SRCNN on an HR/LR pairs directory");
  std::string tr_pairs, tr_out, tr_log;
  int tr_scale = 2, tr_iters = 1000, tr_batch = 16;
  double tr_lr = 1e-4;
  train_cmd->add_option("--pairs", tr_pairs, "Directory made by 'degrade' (hr/ and lr/)")->required();
  train_cmd->add_option("--scale", tr_scale, "Scale of the pairs")->check(CLI::IsMember({2, 3, 4}))->capture_default_str();
  train_cmd->add_option("--iters", tr_iters, "SGD iterations")->check(CLI::NonNegativeNumber)->capture_default_str();
  train_cmd->add_option("--lr", tr_lr, "Learning rate")->check(CLI::NonNegativeNumber)->capture_default_str();
  train_cmd->add_option("--batch", tr_batch, "Patches per iteration")->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--out", tr_out, "Output MSRW weight file")->required();
  train_cmd->add_option("--log", tr_log, "Loss log CSV (default: <out>.loss.csv)");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Run the benchmark grid from a JSON config");
  std::string bench_config;
  bench_cmd->add_option("--config", bench_config, "Bench config JSON")->required();

  // report
  auto* report_cmd = app.add_subcommand("report", "Re-render a results.json");
  std::string rep_run, rep_format = "md";
  report_cmd->add_option("--run", rep_run, "results.json from a bench run")->required();
  report_cmd->add_option("--format", rep_format, "md or csv")->check(CLI::IsMember({"md", "csv"}))->capture_default_str();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Write the procedural phantom corpus");
  std::string syn_out;
  int syn_count = 6, syn_size = 96;
  synth_cmd->add_option("--out", syn_out, "Output directory (one subdirectory per domain)")->required();
  synth_cmd->add_option("--count", syn_count, "Images per domain")->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--size", syn_size, "Image side length")->check(CLI::Range(8, 4096))->capture_default_str();

  // init-weights
  auto* init_cmd = app.add_subcommand("init-weights", "Write seeded initial weights for a learned model");
  std::string init_model, init_out;
  int init_scale = 2;
  init_cmd->add_option("--model", init_model, "srcnn, swinlite or rrdblite")
      ->required()
      ->check(CLI::IsMember({"srcnn", "swinlite", "rrdblite"}));
  init_cmd->add_option("--scale", init_scale, "Scale")->check(CLI::IsMember({2, 3, 4}))->capture_default_str();
  init_cmd->add_option("--out", init_out, "Output MSRW file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::cerr << "seed: " << seed << "\n";

  try {
    if (*degrade_cmd) {
      DegradationSpec spec;
      spec.profile = parse_profile(deg_profile);
      spec.scale = deg_scale;
      spec.blur_sigma = deg_blur;
      spec.noise_sigma = deg_noise;
      spec.compression_quality = deg_quality;
      spec.seed = seed;
      spec.validate();
      if (fs::is_directory(deg_in)) {
        const auto n = make_pairs(deg_in, spec, deg_out, threads);
        std::cerr << "wrote " << n << " pairs to " << deg_out << "\n";
      } else {
        spec.seed = per_image_seed(seed, fs::path(deg_in).filename().string());
        save_image(degrade(load_image(deg_in), spec), deg_out);
      }
    } else if (*upscale_cmd) {
      const auto kind = models::parse_model_kind(up_model);
      const ModelWeights w = weights_or_seed(kind, up_scale, up_weights, up_init_seed);
      save_image(models::upscale(load_image(up_in), kind, &w, up_scale), up_out);
    } else if (*metric_cmd) {
      const Image ref = load_image(met_ref);
      const Image test = load_image(met_test);
      std::vector<std::string> names;
      if (met_list == "all") {
        for (const auto& m : metrics::registry()) names.emplace_back(m.name);
      } else {
        names = split_list(met_list);
        if (names.empty()) fail(ErrorKind::usage, "--metrics: empty list");
      }
      const auto report = metrics::evaluate(ref, test, names);
      if (met_json) {
        std::cout << report.to_json() << "\n";
      } else {
        std::cout.precision(6);
        for (const auto& v : report.values) std::cout << v.name << " " << std::fixed << v.value << "\n";
      }
    } else if (*train_cmd) {
      models::SrcnnConfig cfg;
      cfg.scale = tr_scale;
      models::TrainOptions opt;
      opt.iters = tr_iters;
      opt.lr = tr_lr;
      opt.batch_size = tr_batch;
      opt.seed = seed;
      opt.loss_log = tr_log.empty() ? fs::path(tr_out + ".loss.csv") : fs::path(tr_log);
      const auto result = models::srcnn_train(fs::path(tr_pairs), cfg, opt);
      save_weights(result.weights, tr_out);
      std::cerr << "mse " << result.initial_mse << " -> " << result.final_mse << "\n";
    } else if (*bench_cmd) {
      auto cfg = bench::load_bench_config(bench_config);
      if (threads_opt->count() > 0) cfg.threads = threads;
      const auto run = bench::run_bench(cfg);
      bench::write_outputs(run, cfg);
      std::cerr << "results in " << cfg.resolve(cfg.output_dir).string() << "\n";
    } else if (*report_cmd) {
      const auto run = bench::parse_results_json(read_file(rep_run));
      std::cout << (rep_format == "md" ? bench::emit_markdown(run) : bench::emit_csv(run));
    } else if (*synth_cmd) {
      const auto n = write_synth_corpus(syn_out, syn_count, syn_size, seed);
      std::cerr << "wrote " << n << " images to " << syn_out << "\n";
    } else if (*init_cmd) {
      const auto kind = models::parse_model_kind(init_model);
      if (!models::supports_scale(kind, init_scale)) {
        fail(ErrorKind::usage, "--scale: " + init_model + " does not support x" + std::to_string(init_scale));
      }
      save_weights(models::init_weights(kind, init_scale, seed), init_out);
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
