#include "docenh/cli.hpp"

#include <CLI11.hpp>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <set>
#include <sstream>

#include "docenh/augment.hpp"
#include "docenh/config.hpp"
#include "docenh/enhance.hpp"
#include "docenh/harness.hpp"
#include "docenh/image_io.hpp"
#include "docenh/iqa.hpp"
#include "docenh/judgments.hpp"
#include "docenh/parallel.hpp"
#include "docenh/server.hpp"

namespace docenh::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<MetricDescriptor> pick_metrics(const MetricRegistry& registry, const std::string& csv) {
  if (csv.empty()) {
    std::vector<MetricDescriptor> out{registry.get("psnr"), registry.get("ms-ssim")};
    for (const auto& m : registry.all()) {
      if (m.is_external()) out.push_back(m);
    }
    return out;
  }
  for (const auto& id : split_csv(csv)) {
    if (!registry.contains(id)) throw UsageError("unknown metric '" + id + "'");
  }
  return registry.select(csv);
}

std::vector<EngineDescriptor> pick_engines(const Config& cfg, const Manifest& manifest,
                                           const std::string& csv) {
  std::vector<std::string> from_manifest;
  for (const auto& e : manifest.entries) {
    for (const auto& [engine, path] : e.enhanced) {
      if (std::find(from_manifest.begin(), from_manifest.end(), engine) == from_manifest.end()) {
        from_manifest.push_back(engine);
      }
    }
  }
  auto lookup = [&](const std::string& id) -> std::optional<EngineDescriptor> {
    if (id == "classical") return EngineDescriptor::classical("classical", cfg.tone);
    for (const auto& e : cfg.engines) {
      if (e.id == id) return e;
    }
    if (std::find(from_manifest.begin(), from_manifest.end(), id) != from_manifest.end()) {
      return EngineDescriptor::precomputed_outputs(id);
    }
    return std::nullopt;
  };
  std::vector<std::string> ids;
  if (csv.empty()) {
    ids.push_back("classical");
    for (const auto& e : cfg.engines) ids.push_back(e.id);
    for (const auto& id : from_manifest) {
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
  } else {
    ids = split_csv(csv);
  }
  std::vector<EngineDescriptor> engines;
  for (const auto& id : ids) {
    auto e = lookup(id);
    if (!e) throw UsageError("unknown engine '" + id + "'");
    engines.push_back(std::move(*e));
  }
  return engines;
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string fmt_score(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

IlluminationSurface surface_for(const Image& surface, const Image& clean) {
  IlluminationSurface s = IlluminationSurface::clamped(surface);
  if (s.width() != clean.width() || s.height() != clean.height()) {
    s = resample_surface(s, clean.width(), clean.height());
  }
  return match_channels(s, clean.channels());
}

int serve_forever(ReviewServer& server, std::ostream& out) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  const int port = server.start();
  out << "serving on http://127.0.0.1:" << port << "/ (Ctrl-C to stop)" << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
  return kOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Document image enhancement, augmentation and quality assessment", "docenh"};
  app.require_subcommand(1, 1);

  std::string config_path, format = "text";
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON config file (default: $DOCENH_CONFIG)");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "records"}));

  // enhance
  auto* enhance = app.add_subcommand("enhance", "Remove the illumination surface from a capture");
  std::string enh_in, enh_out, enh_surface;
  enhance->add_option("in", enh_in, "Raw capture")->required();
  enhance->add_option("out", enh_out, "Enhanced output")->required();
  enhance->add_option("--surface", enh_surface, "Also write the estimated surface");

  // surface
  auto* surface = app.add_subcommand("surface", "Extract or apply illumination surfaces");
  surface->require_subcommand(1, 1);
  auto* extract = surface->add_subcommand("extract", "Recover L = R / E from a raw/enhanced pair");
  std::string ex_raw, ex_enh, ex_out;
  extract->add_option("raw", ex_raw)->required();
  extract->add_option("enhanced", ex_enh)->required();
  extract->add_option("out", ex_out)->required();
  auto* apply = surface->add_subcommand("apply", "Compose a clean page with a surface");
  std::string ap_clean, ap_surface, ap_out;
  apply->add_option("clean", ap_clean)->required();
  apply->add_option("surface", ap_surface)->required();
  apply->add_option("out", ap_out)->required();

  // augment
  auto* augment = app.add_subcommand("augment", "Synthesize paired training crops");
  std::string au_manifest, au_bank, au_out;
  std::optional<int> au_crops, au_size;
  std::optional<double> au_threshold;
  augment->add_option("manifest", au_manifest, "Clean pages (enhanced, else reference)")->required();
  augment->add_option("bank", au_bank, "Directory of illumination surfaces")->required();
  augment->add_option("out", au_out, "Output directory")->required();
  augment->add_option("--crops", au_crops, "Crops kept per page");
  augment->add_option("--seed", seed, "Random seed");
  augment->add_option("--threshold", au_threshold, "Laplacian energy threshold");
  augment->add_option("--size", au_size, "Crop side");

  // iqa
  auto* iqa = app.add_subcommand("iqa", "Full-reference quality scores");
  iqa->require_subcommand(1, 1);
  auto* score = iqa->add_subcommand("score", "Score a test image against a reference");
  std::string sc_ref, sc_test, sc_metrics;
  score->add_option("ref", sc_ref)->required();
  score->add_option("test", sc_test)->required();
  score->add_option("--metrics", sc_metrics, "Comma-separated metric ids");
  auto* gate = iqa->add_subcommand("gate", "Raw/white error table over a manifest");
  std::string ga_manifest, ga_metrics, ga_engine, ga_work = "docenh-work";
  std::optional<int> ga_jobs;
  gate->add_option("manifest", ga_manifest)->required();
  gate->add_option("--metrics", ga_metrics, "Comma-separated metric ids");
  gate->add_option("--engine", ga_engine, "Manifest engine whose outputs are gated");
  gate->add_option("--jobs", ga_jobs)->check(CLI::PositiveNumber);
  gate->add_option("--work-dir", ga_work);

  // eval
  auto* eval = app.add_subcommand("eval", "Benchmark harness");
  eval->require_subcommand(1, 1);
  auto* run = eval->add_subcommand("run", "Run engines over a manifest and score the outputs");
  std::string ev_manifest, ev_engines, ev_metrics, ev_out, ev_csv, ev_work = "docenh-work";
  std::optional<int> ev_jobs;
  run->add_option("manifest", ev_manifest)->required();
  run->add_option("--engines", ev_engines, "Comma-separated engine ids");
  run->add_option("--metrics", ev_metrics, "Comma-separated metric ids");
  run->add_option("--jobs", ev_jobs)->check(CLI::PositiveNumber);
  run->add_option("--out", ev_out, "Write the structured report here");
  run->add_option("--csv", ev_csv, "Write the mean table as CSV here");
  run->add_option("--work-dir", ev_work, "Where engine outputs go");

  // serve
  auto* serve = app.add_subcommand("serve", "Review server for manual inspection");
  std::string sv_manifest, sv_report, sv_judgments = "judgments.jsonl", sv_static = "www",
                                      sv_host = "127.0.0.1";
  int sv_port = 8080;
  serve->add_option("manifest", sv_manifest)->required();
  serve->add_option("--report", sv_report, "Structured report from eval run");
  serve->add_option("--port", sv_port)->check(CLI::Range(0, 65535));
  serve->add_option("--host", sv_host);
  serve->add_option("--judgments", sv_judgments, "Judgment log");
  serve->add_option("--static", sv_static, "UI bundle directory");

  // curate
  auto* curate = app.add_subcommand("curate", "Keep only accepted pairs of a manifest");
  std::string cu_manifest, cu_judgments, cu_out, cu_report;
  curate->add_option("manifest", cu_manifest)->required();
  curate->add_option("judgments", cu_judgments)->required();
  curate->add_option("out", cu_out)->required();
  curate->add_option("--report", cu_report, "Report supplying engine output paths");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  const bool records = format == "records";
  try {
    Config cfg = resolve_config(config_path.empty() ? std::nullopt
                                                    : std::optional<fs::path>(config_path));
    if (seed) {
      cfg.seed = *seed;
      cfg.augment.seed = *seed;
    }
    const MetricRegistry registry = metric_registry(cfg);

    if (enhance->parsed()) {
      const EnhanceResult r = enhance_document(load_image(enh_in), cfg.tone);
      save_image(r.enhanced, enh_out);
      if (!enh_surface.empty()) save_image(r.surface.gains(), enh_surface);
      return kOk;
    }

    if (extract->parsed()) {
      save_image(extract_surface(load_image(ex_raw), load_image(ex_enh)).gains(), ex_out);
      return kOk;
    }
    if (apply->parsed()) {
      const Image clean = load_image(ap_clean);
      save_image(apply_surface(clean, surface_for(load_image(ap_surface), clean)), ap_out);
      return kOk;
    }

    if (augment->parsed()) {
      AugmentConfig acfg = cfg.augment;
      if (au_crops) acfg.crops_per_page = *au_crops;
      if (au_size) acfg.crop_size = *au_size;
      if (au_threshold) acfg.energy_threshold = *au_threshold;
      try {
        acfg.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const Manifest manifest = load_manifest(au_manifest);
      std::vector<Image> pages;
      for (const auto& e : manifest.entries) {
        pages.push_back(load_image(e.enhanced.empty() ? e.reference : e.enhanced.begin()->second));
      }
      const SurfaceBank bank = SurfaceBank::load_directory(au_bank);
      AugmentedStream stream(pages, bank, acfg);
      const fs::path dir(au_out);
      fs::create_directories(dir / "input");
      fs::create_directories(dir / "target");
      std::ofstream log(dir / "provenance.jsonl", std::ios::trunc);
      std::size_t n = 0;
      while (auto pair = stream.next()) {
        char name[32];
        std::snprintf(name, sizeof name, "%06zu.png", n++);
        save_image(pair->input, dir / "input" / name);
        save_image(pair->target, dir / "target" / name);
        log << provenance_record(pair->provenance) << '\n';
      }
      if (!log) throw std::runtime_error("cannot write " + (dir / "provenance.jsonl").string());
      if (records) {
        out << json{{"type", "augment"}, {"pages", pages.size()}, {"pairs", n}, {"seed", acfg.seed}}.dump()
            << '\n';
      } else {
        out << n << " pairs from " << pages.size() << " pages written to " << dir.string() << '\n';
      }
      return kOk;
    }

    if (score->parsed()) {
      const auto metrics = pick_metrics(registry, sc_metrics);
      EvalImage ref{load_image(sc_ref), sc_ref};
      const Image test_raw = load_image(sc_test);
      Image aligned = align_to(test_raw, ref.image);
      EvalImage test{aligned, aligned == test_raw ? fs::path(sc_test) : fs::path()};
      for (const auto& m : metrics) {
        if (m.is_external()) materialize(test, fs::temp_directory_path(), "docenh-score-test");
        const MetricScore s = evaluate_metric(m, ref, test);
        if (records) {
          json j = {{"type", "score"}, {"metric", m.id}, {"value", s.value}};
          if (std::isinf(s.value)) {
            j["value"] = nullptr;
            j["sentinel"] = s.value > 0 ? "+inf" : "-inf";
          }
          out << j.dump() << '\n';
        } else {
          out << m.display_name() << ": " << fmt_score(s.value) << '\n';
        }
      }
      return kOk;
    }

    if (gate->parsed()) {
      const auto metrics = pick_metrics(registry, ga_metrics);
      GateRunOptions opts;
      if (!ga_engine.empty()) opts.engine = ga_engine;
      opts.jobs = ga_jobs.value_or(cfg.jobs.value_or(default_jobs()));
      opts.process_cap = cfg.process_cap;
      opts.work_dir = ga_work;
      const GateReport report = run_gate(load_manifest(ga_manifest), metrics, opts);
      if (records) {
        out << render_gate_records(report);
      } else {
        out << render_gate_table(report, metrics);
        if (report.skipped > 0) err << "warning: " << report.skipped << " entries skipped\n";
      }
      for (const auto& row : report.rows) {
        for (const auto& f : row.failures) err << "warning: " << row.metric << ": " << f << '\n';
      }
      return kOk;
    }

    if (run->parsed()) {
      const Manifest manifest = load_manifest(ev_manifest);
      const auto engines = pick_engines(cfg, manifest, ev_engines);
      const auto metrics = pick_metrics(registry, ev_metrics);
      EvaluationOptions opts;
      opts.jobs = ev_jobs.value_or(cfg.jobs.value_or(default_jobs()));
      opts.process_cap = cfg.process_cap;
      opts.work_dir = ev_work;
      const EvaluationReport report = run_evaluation(manifest, engines, metrics, opts);
      const std::string structured = report_records(report);
      if (!ev_out.empty()) write_text_file(ev_out, structured);
      const ResultTable table = result_table(report);
      if (!ev_csv.empty()) write_text_file(ev_csv, render_csv(table));
      out << (records ? structured : render_table(table));
      for (const auto& s : report.summaries) {
        if (s.fully_failed) err << "warning: engine '" << s.engine << "' failed on every entry\n";
        else if (s.failed > 0) err << "warning: engine '" << s.engine << "' failed on " << s.failed << " entries\n";
      }
      return kOk;
    }

    if (serve->parsed()) {
      std::optional<EvaluationReport> report;
      if (!sv_report.empty()) report = load_report(sv_report);
      ServerOptions opts;
      opts.host = sv_host;
      opts.port = sv_port;
      opts.judgments = sv_judgments;
      opts.static_dir = sv_static;
      ReviewServer server(load_manifest(sv_manifest), std::move(report), opts);
      return serve_forever(server, out);
    }

    if (curate->parsed()) {
      const Manifest manifest = load_manifest(cu_manifest);
      std::optional<EvaluationReport> report;
      if (!cu_report.empty()) report = load_report(cu_report);
      std::ifstream in(cu_judgments);
      if (!in) throw std::runtime_error("cannot read judgment log " + cu_judgments);
      const auto log = parse_judgment_log(in);
      const Manifest curated = export_curated(log, manifest, report ? &*report : nullptr);
      write_manifest(curated, cu_out);
      if (records) {
        out << json{{"type", "curate"}, {"entries", curated.entries.size()}}.dump() << '\n';
      } else {
        out << curated.entries.size() << " of " << manifest.entries.size() << " entries kept\n";
      }
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kOperationalError;
  }
  err << app.help();
  return kUsageError;
}

}  // namespace docenh::cli
