#include "medsr/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "medsr/io.hpp"
#include "medsr/parallel.hpp"
#include "medsr/prng.hpp"

#ifndef MEDSR_VERSION
#define MEDSR_VERSION "0.0.0"
#endif

namespace medsr::bench {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string two_decimals(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

ModelWeights weights_for(const BenchConfig& cfg, const ModelSpec& m, int scale) {
  std::optional<std::string> path;
  if (auto it = m.scale_weights.find(scale); it != m.scale_weights.end()) {
    path = it->second;
  } else if (m.weights) {
    path = m.weights;
  }
  if (path) {
    try {
      return load_weights(cfg.resolve(*path));
    } catch (const Error& e) {
      throw e.with_context(std::string(models::to_string(m.kind)) + " x" + std::to_string(scale));
    }
  }
  if (m.init_seed) return models::init_weights(m.kind, scale, *m.init_seed);
  fail(ErrorKind::config,
       std::string(models::to_string(m.kind)) + " has no weights for scale " + std::to_string(scale));
}

ojson metrics_object(const std::vector<metrics::MetricValue>& values) {
  ojson o = ojson::object();
  for (const auto& v : values) o[v.name] = v.value;
  return o;
}

std::vector<metrics::MetricValue> metrics_from(const json& o) {
  std::vector<metrics::MetricValue> values;
  for (const auto& info : metrics::registry()) {
    const std::string name(info.name);
    if (!o.contains(name)) fail(ErrorKind::format, "results entry lacks metric '" + name + "'");
    values.push_back({name, o.at(name).get<double>(), info.higher_is_better});
  }
  return values;
}

}  // namespace

void BenchConfig::validate() const {
  if (domains.empty()) fail(ErrorKind::config, "config needs at least one domain");
  if (scales.empty()) fail(ErrorKind::config, "config needs at least one scale");
  if (models.empty()) fail(ErrorKind::config, "config needs at least one model");
  std::set<std::string> names;
  for (const auto& d : domains) {
    if (d.name.empty()) fail(ErrorKind::config, "domain name is empty");
    if (!names.insert(d.name).second) fail(ErrorKind::config, "duplicate domain '" + d.name + "'");
  }
  std::set<int> seen_scales;
  for (int s : scales) {
    if (s < 2 || s > 4) fail(ErrorKind::config, "scale " + std::to_string(s) + " not in {2,3,4}");
    if (!seen_scales.insert(s).second) fail(ErrorKind::config, "duplicate scale " + std::to_string(s));
  }
  std::set<models::ModelKind> kinds;
  for (const auto& m : models) {
    const std::string kind(models::to_string(m.kind));
    if (!kinds.insert(m.kind).second) fail(ErrorKind::config, "model '" + kind + "' listed twice");
    if (!models::is_learned(m.kind)) continue;
    for (int s : scales) {
      if (!models::supports_scale(m.kind, s)) continue;
      const bool has_file = m.scale_weights.count(s) || m.weights;
      if (!has_file && !m.init_seed) {
        fail(ErrorKind::config, "model '" + kind + "' has no weights for scale " + std::to_string(s));
      }
      if (has_file) {
        const auto path = resolve(m.scale_weights.count(s) ? m.scale_weights.at(s) : *m.weights);
        if (!fs::exists(path)) fail(ErrorKind::config, "weight file " + path.string() + " does not exist");
      }
    }
  }
  degradation(scales.front()).validate();
  if (threads < 0) fail(ErrorKind::config, "threads must be >= 0");
}

fs::path BenchConfig::resolve(const std::string& path) const {
  const fs::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

DegradationSpec BenchConfig::degradation(int scale) const {
  DegradationSpec spec;
  spec.profile = profile;
  spec.scale = scale;
  spec.blur_sigma = blur_sigma;
  spec.noise_sigma = noise_sigma;
  spec.compression_quality = compression_quality;
  spec.seed = seed;
  return spec;
}

BenchConfig parse_bench_config(const std::string& json_text, const fs::path& base_dir) {
  BenchConfig cfg;
  cfg.base_dir = base_dir;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) fail(ErrorKind::config, "config must be a JSON object");
    for (const auto& d : j.at("domains")) cfg.domains.push_back({d.at("name").get<std::string>(),
                                                                d.at("corpus").get<std::string>()});
    cfg.scales = j.at("scales").get<std::vector<int>>();
    for (const auto& m : j.at("models")) {
      ModelSpec spec;
      spec.kind = models::parse_model_kind(m.at("kind").get<std::string>());
      if (m.contains("weights")) {
        const auto& w = m.at("weights");
        if (w.is_string()) {
          spec.weights = w.get<std::string>();
        } else if (w.is_object()) {
          for (const auto& [key, value] : w.items()) spec.scale_weights[std::stoi(key)] = value.get<std::string>();
        } else if (!w.is_null()) {
          fail(ErrorKind::config, "model weights must be a path or an object keyed by scale");
        }
      }
      if (m.contains("init_seed") && !m.at("init_seed").is_null()) spec.init_seed = m.at("init_seed").get<std::uint64_t>();
      cfg.models.push_back(std::move(spec));
    }
    if (j.contains("degradation")) {
      const auto& d = j.at("degradation");
      cfg.profile = parse_profile(get_or<std::string>(d, "profile", "classical"));
      cfg.blur_sigma = get_or<double>(d, "blur_sigma", 0.0);
      cfg.noise_sigma = get_or<double>(d, "noise_sigma", 0.0);
      if (d.contains("compression_quality") && !d.at("compression_quality").is_null()) {
        cfg.compression_quality = d.at("compression_quality").get<int>();
      }
    }
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
    cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir);
    cfg.threads = get_or<int>(j, "threads", 0);
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("invalid bench config: ") + e.what());
  } catch (const std::invalid_argument&) {
    fail(ErrorKind::config, "invalid bench config: weight keys must be scales");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::usage) fail(ErrorKind::config, e.what());
    throw;
  }
  cfg.validate();
  return cfg;
}

BenchConfig load_bench_config(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_bench_config(text, path.parent_path().empty() ? fs::path(".") : path.parent_path());
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

std::string canonical_json(const BenchConfig& cfg) {
  json j;
  json domains = json::array();
  for (const auto& d : cfg.domains) domains.push_back({{"name", d.name}, {"corpus", d.corpus}});
  j["domains"] = domains;
  j["scales"] = cfg.scales;
  json models = json::array();
  for (const auto& m : cfg.models) {
    json o;
    o["kind"] = std::string(models::to_string(m.kind));
    o["weights"] = m.weights ? json(*m.weights) : json(nullptr);
    json per = json::object();
    for (const auto& [s, p] : m.scale_weights) per[std::to_string(s)] = p;
    o["scale_weights"] = per;
    o["init_seed"] = m.init_seed ? json(*m.init_seed) : json(nullptr);
    models.push_back(o);
  }
  j["models"] = models;
  j["degradation"] = {{"profile", std::string(to_string(cfg.profile))},
                      {"blur_sigma", cfg.blur_sigma},
                      {"noise_sigma", cfg.noise_sigma},
                      {"compression_quality",
                       cfg.compression_quality ? json(*cfg.compression_quality) : json(nullptr)}};
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["threads"] = cfg.threads;
  return j.dump();
}

std::string config_hash(const BenchConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_json(cfg))));
  return buf;
}

const Cell* BenchRun::find(const std::string& domain, int scale, const std::string& model) const {
  for (const auto& c : cells) {
    if (c.domain == domain && c.scale == scale && c.model == model) return &c;
  }
  return nullptr;
}

BenchRun run_bench(const BenchConfig& cfg) {
  cfg.validate();
  BenchRun run;
  run.manifest.tool_version = MEDSR_VERSION;
  run.manifest.seed = cfg.seed;
  run.manifest.config_hash = config_hash(cfg);
  run.manifest.started_at = utc_now();
  run.manifest.threads = resolve_threads(cfg.threads);
  const int threads = run.manifest.threads;

  for (const auto& d : cfg.domains) run.domains.push_back(d.name);
  run.scales = cfg.scales;
  for (const auto& m : cfg.models) run.models.emplace_back(models::to_string(m.kind));

  const fs::path out_dir = cfg.resolve(cfg.output_dir);

  for (const auto& domain : cfg.domains) {
    for (int scale : cfg.scales) {
      const fs::path pairs = out_dir / "pairs" / domain.name / ("x" + std::to_string(scale));
      try {
        make_pairs(cfg.resolve(domain.corpus), cfg.degradation(scale), pairs, threads);
      } catch (const Error& e) {
        throw e.with_context("domain " + domain.name);
      }
      const auto files = list_images(pairs / "hr");
      std::vector<Image> hr, lr;
      std::vector<std::string> names;
      for (const auto& f : files) {
        hr.push_back(load_image(f));
        lr.push_back(load_image(pairs / "lr" / f.filename()));
        names.push_back(f.filename().string());
      }

      for (const auto& m : cfg.models) {
        Cell cell;
        cell.domain = domain.name;
        cell.scale = scale;
        cell.model = std::string(models::to_string(m.kind));
        cell.supported = models::supports_scale(m.kind, scale);
        if (!cell.supported) {
          run.cells.push_back(std::move(cell));
          continue;
        }
        std::optional<ModelWeights> weights;
        if (models::is_learned(m.kind)) weights = weights_for(cfg, m, scale);

        std::vector<std::optional<metrics::MetricReport>> reports(files.size());
        parallel_for(files.size(), threads, [&](std::size_t i) {
          try {
            const Image sr = models::upscale(lr[i], m.kind, weights ? &*weights : nullptr, scale);
            reports[i] = metrics::evaluate_all(hr[i], sr);
          } catch (const Error& e) {
            throw e.with_context(domain.name + " x" + std::to_string(scale) + " " + cell.model + " " + names[i]);
          }
        });

        const auto& reg = metrics::registry();
        cell.means.resize(reg.size());
        for (std::size_t k = 0; k < reg.size(); ++k) {
          cell.means[k] = {std::string(reg[k].name), 0.0, reg[k].higher_is_better};
        }
        for (std::size_t i = 0; i < files.size(); ++i) {
          for (std::size_t k = 0; k < reg.size(); ++k) cell.means[k].value += reports[i]->values[k].value;
          cell.images.push_back({names[i], std::move(*reports[i])});
        }
        for (auto& v : cell.means) v.value /= static_cast<double>(files.size());
        run.cells.push_back(std::move(cell));
      }
    }
  }
  run.manifest.finished_at = utc_now();
  return run;
}

std::string model_label(const std::string& model) {
  if (model == "bicubic") return "Bicubic";
  if (model == "srcnn") return "SRCNN";
  if (model == "swinlite") return "SwinIR-lite";
  if (model == "rrdblite") return "RRDB-lite";
  return model;
}

std::string emit_markdown(const BenchRun& run) {
  std::ostringstream out;
  out << "# Super-resolution benchmark\n\n";
  out << "Config hash `" << run.manifest.config_hash << "`, seed " << run.manifest.seed
      << ". Values are means over each domain's images. LPIPS-proxy and ODI: lower is better. "
         "\"--\" marks a scale the model does not support.\n";
  for (const auto& domain : run.domains) {
    out << "\n## " << domain << "\n\n| Scale | Metric |";
    for (const auto& m : run.models) out << " " << model_label(m) << " |";
    out << "\n|---|---|";
    for (std::size_t i = 0; i < run.models.size(); ++i) out << "---:|";
    out << "\n";
    for (int scale : run.scales) {
      const auto& reg = metrics::registry();
      for (std::size_t k = 0; k < reg.size(); ++k) {
        out << "| " << (k == 0 ? "×" + std::to_string(scale) : std::string()) << " | " << reg[k].label << " |";
        for (const auto& m : run.models) {
          const Cell* cell = run.find(domain, scale, m);
          out << " " << (cell && cell->supported ? two_decimals(cell->means[k].value) : std::string("--")) << " |";
        }
        out << "\n";
      }
    }
  }
  return out.str();
}

std::string emit_csv(const BenchRun& run) {
  std::ostringstream out;
  out << "domain,scale,model,metric,mean\n";
  for (const auto& cell : run.cells) {
    for (std::size_t k = 0; k < metrics::registry().size(); ++k) {
      out << cell.domain << "," << cell.scale << "," << cell.model << "," << metrics::registry()[k].name << ",";
      if (cell.supported) out << shortest(cell.means[k].value);
      out << "\n";
    }
  }
  return out.str();
}

std::string emit_json(const BenchRun& run) {
  ojson j;
  j["tool_version"] = run.manifest.tool_version;
  j["seed"] = run.manifest.seed;
  j["config_hash"] = run.manifest.config_hash;
  j["domains"] = run.domains;
  j["scales"] = run.scales;
  j["models"] = run.models;
  ojson results = ojson::array();
  for (const auto& cell : run.cells) {
    ojson c;
    c["domain"] = cell.domain;
    c["scale"] = cell.scale;
    c["model"] = cell.model;
    c["supported"] = cell.supported;
    c["means"] = cell.supported ? metrics_object(cell.means) : ojson(nullptr);
    ojson images = ojson::array();
    for (const auto& img : cell.images) images.push_back({{"image", img.image}, {"metrics", metrics_object(img.report.values)}});
    c["images"] = images;
    results.push_back(c);
  }
  j["results"] = results;
  return j.dump(2) + "\n";
}

std::string emit_manifest(const BenchRun& run, const BenchConfig& cfg) {
  ojson j;
  j["tool"] = "medsr";
  j["tool_version"] = run.manifest.tool_version;
  j["config_hash"] = run.manifest.config_hash;
  j["config"] = ojson::parse(canonical_json(cfg));
  j["seed"] = run.manifest.seed;
  j["threads"] = run.manifest.threads;
  j["started_at"] = run.manifest.started_at;
  j["finished_at"] = run.manifest.finished_at;
  ojson models = ojson::array();
  for (const auto& m : cfg.models) {
    ojson o;
    o["kind"] = std::string(models::to_string(m.kind));
    o["weights"] = m.scale_weights.empty() && !m.weights
                       ? (m.init_seed ? "init_seed " + std::to_string(*m.init_seed) : std::string("none"))
                       : std::string("file");
    o["lite_config"] = models::is_learned(m.kind);
    models.push_back(o);
  }
  j["models"] = models;
  return j.dump(2) + "\n";
}

BenchRun parse_results_json(const std::string& text) {
  BenchRun run;
  try {
    const json j = json::parse(text);
    run.manifest.tool_version = j.at("tool_version").get<std::string>();
    run.manifest.seed = j.at("seed").get<std::uint64_t>();
    run.manifest.config_hash = j.at("config_hash").get<std::string>();
    run.domains = j.at("domains").get<std::vector<std::string>>();
    run.scales = j.at("scales").get<std::vector<int>>();
    run.models = j.at("models").get<std::vector<std::string>>();
    for (const auto& c : j.at("results")) {
      Cell cell;
      cell.domain = c.at("domain").get<std::string>();
      cell.scale = c.at("scale").get<int>();
      cell.model = c.at("model").get<std::string>();
      cell.supported = c.at("supported").get<bool>();
      if (cell.supported) cell.means = metrics_from(c.at("means"));
      for (const auto& img : c.at("images")) {
        cell.images.push_back({img.at("image").get<std::string>(), {metrics_from(img.at("metrics"))}});
      }
      run.cells.push_back(std::move(cell));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::format, std::string("invalid results file: ") + e.what());
  }
  return run;
}

void write_outputs(const BenchRun& run, const BenchConfig& cfg) {
  const fs::path out_dir = cfg.resolve(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create output directory " + out_dir.string() + ": " + ec.message());
  write_file(out_dir / "results.csv", emit_csv(run));
  write_file(out_dir / "results.json", emit_json(run));
  write_file(out_dir / "report.md", emit_markdown(run));
  write_file(out_dir / "manifest.json", emit_manifest(run, cfg));
}

}  // namespace medsr::bench
