#include "docenh/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "docenh/image_io.hpp"
#include "docenh/parallel.hpp"
#include "docenh/process.hpp"

namespace docenh {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string msg = "invalid manifest (" + std::to_string(issues.size()) + " problem" +
                    (issues.size() == 1 ? "" : "s") + ")";
  for (const auto& i : issues) msg += "\n  " + i;
  return msg;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return (path.is_relative() ? base / path : path).lexically_normal();
}

std::string safe_name(const std::string& id) {
  std::string out = id;
  for (char& ch : out) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.')) ch = '_';
  }
  return out;
}

bool any_external(std::span<const MetricDescriptor> metrics) {
  return std::any_of(metrics.begin(), metrics.end(), [](const auto& m) { return m.is_external(); });
}

const char* status_name(ScoreRecord::Status s) {
  switch (s) {
    case ScoreRecord::Status::ok: return "ok";
    case ScoreRecord::Status::failed: return "failed";
    case ScoreRecord::Status::skipped: return "skipped";
  }
  return "ok";
}

ScoreRecord::Status parse_status(const std::string& s) {
  if (s == "ok") return ScoreRecord::Status::ok;
  if (s == "failed") return ScoreRecord::Status::failed;
  if (s == "skipped") return ScoreRecord::Status::skipped;
  throw std::invalid_argument("unknown record status '" + s + "'");
}

void put_value(json& j, const char* key, double v) {
  if (std::isinf(v)) {
    j[key] = nullptr;
    j["sentinel"] = v > 0 ? "+inf" : "-inf";
  } else {
    j[key] = v;
  }
}

double get_value(const json& j, const char* key) {
  if (j.contains("sentinel")) {
    return j["sentinel"] == "+inf" ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
  }
  return j.at(key).get<double>();
}

std::string shortest(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return json(v).dump();
}

std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char ch : s) n += (ch & 0xC0) != 0x80;
  return n;
}

std::string pad(const std::string& s, std::size_t width, bool left_align) {
  const std::size_t w = display_width(s);
  if (w >= width) return s;
  const std::string fill(width - w, ' ');
  return left_align ? s + fill : fill + s;
}

std::string fmt2(const std::optional<double>& v) {
  if (!v) return "-";
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

}  // namespace

// --- manifests -------------------------------------------------------------

ManifestError::ManifestError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

const ManifestEntry* Manifest::find(const std::string& id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

Manifest parse_manifest(std::istream& in, const fs::path& base_dir, bool check_files) {
  Manifest manifest;
  std::vector<std::string> issues;
  std::map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      issues.push_back(where + "not valid JSON");
      continue;
    }
    if (!j.is_object()) {
      issues.push_back(where + "record must be an object");
      continue;
    }
    bool ok = true;
    auto need_string = [&](const char* key) -> std::string {
      if (!j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty()) {
        issues.push_back(where + "field '" + key + "' must be a non-empty string");
        ok = false;
        return {};
      }
      return j[key].get<std::string>();
    };
    ManifestEntry e;
    e.id = need_string("id");
    const std::string raw = need_string("raw");
    const std::string ref = need_string("reference");
    if (j.contains("enhanced")) {
      if (!j["enhanced"].is_object()) {
        issues.push_back(where + "field 'enhanced' must map engine ids to paths");
        ok = false;
      } else {
        for (const auto& [engine, p] : j["enhanced"].items()) {
          if (!p.is_string() || engine.empty()) {
            issues.push_back(where + "enhanced path for engine '" + engine + "' must be a string");
            ok = false;
          } else {
            e.enhanced[engine] = resolve(base_dir, p.get<std::string>());
          }
        }
      }
    }
    if (!ok) continue;
    e.raw = resolve(base_dir, raw);
    e.reference = resolve(base_dir, ref);
    if (auto [it, inserted] = seen.emplace(e.id, lineno); !inserted) {
      issues.push_back(where + "duplicate id '" + e.id + "' (first on line " +
                       std::to_string(it->second) + ")");
      continue;
    }
    if (check_files) {
      auto check = [&](const fs::path& p, const std::string& role) {
        if (!fs::is_regular_file(p)) {
          issues.push_back(where + "entry '" + e.id + "': " + role + " file not found: " + p.string());
        }
      };
      check(e.raw, "raw");
      check(e.reference, "reference");
      for (const auto& [engine, p] : e.enhanced) check(p, "enhanced/" + engine);
    }
    manifest.entries.push_back(std::move(e));
  }
  if (!issues.empty()) throw ManifestError(std::move(issues));
  return manifest;
}

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError({"cannot read manifest " + path.string()});
  return parse_manifest(in, fs::absolute(path).parent_path());
}

std::string manifest_records(const Manifest& manifest) {
  std::ostringstream out;
  for (const auto& e : manifest.entries) {
    json j;
    j["id"] = e.id;
    j["raw"] = fs::absolute(e.raw).lexically_normal().string();
    j["reference"] = fs::absolute(e.reference).lexically_normal().string();
    if (!e.enhanced.empty()) {
      json enh = json::object();
      for (const auto& [engine, p] : e.enhanced) enh[engine] = fs::absolute(p).lexically_normal().string();
      j["enhanced"] = enh;
    }
    out << j.dump() << '\n';
  }
  return out.str();
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << manifest_records(manifest);
}

// --- engines ---------------------------------------------------------------

EngineDescriptor EngineDescriptor::classical(std::string id, ToneParams tone) {
  EngineDescriptor e;
  e.id = std::move(id);
  e.kind = Kind::builtin_classical;
  e.tone = tone;
  return e;
}

EngineDescriptor EngineDescriptor::external_command(std::string id, std::string command) {
  EngineDescriptor e;
  e.id = std::move(id);
  e.kind = Kind::external;
  e.command = std::move(command);
  return e;
}

EngineDescriptor EngineDescriptor::precomputed_outputs(std::string id) {
  EngineDescriptor e;
  e.id = std::move(id);
  e.kind = Kind::precomputed;
  return e;
}

Image run_engine(const EngineDescriptor& engine, const fs::path& raw, const fs::path& out) {
  switch (engine.kind) {
    case EngineDescriptor::Kind::builtin_classical: {
      Image enhanced = enhance_document(load_image(raw), engine.tone).enhanced;
      if (!out.empty()) {
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        save_image(enhanced, out);
      }
      return enhanced;
    }
    case EngineDescriptor::Kind::external: {
      if (out.empty()) throw EngineError("engine '" + engine.id + "': external engines need an output path");
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      std::error_code ec;
      fs::remove(out, ec);
      const std::string cmd =
          substitute_placeholders(engine.command, {{"in", raw.string()}, {"out", out.string()}});
      ProcessResult r;
      try {
        r = run_shell(cmd, engine.timeout);
      } catch (const std::system_error& e) {
        throw EngineError("engine '" + engine.id + "' could not start: " + e.what());
      }
      if (r.timed_out) {
        throw EngineError("engine '" + engine.id + "' timed out after " +
                          std::to_string(engine.timeout.count()) + " ms [command: " + cmd + "]");
      }
      if (r.exit_code != 0) {
        throw EngineError("engine '" + engine.id + "' exited with code " +
                          std::to_string(r.exit_code) + " [command: " + cmd + "]");
      }
      if (!fs::is_regular_file(out)) {
        throw EngineError("engine '" + engine.id + "' did not write " + out.string() +
                          " [command: " + cmd + "]");
      }
      return load_image(out);
    }
    case EngineDescriptor::Kind::precomputed:
      throw EngineError("engine '" + engine.id + "' has no runner; it only reuses manifest outputs");
  }
  throw EngineError("unknown engine kind");
}

Image align_to(const Image& test, const Image& reference) {
  Image out = convert_channels(test, reference.channels());
  if (out.width() != reference.width() || out.height() != reference.height()) {
    out = resize_bilinear(out, reference.width(), reference.height());
  }
  return out;
}

// --- evaluation ------------------------------------------------------------

const MeanRow* EvaluationReport::mean(const std::string& engine, const std::string& metric) const {
  for (const auto& m : means) {
    if (m.engine == engine && m.metric == metric) return &m;
  }
  return nullptr;
}

std::vector<MeanRow> recompute_means(const EvaluationReport& report) {
  std::vector<MeanRow> rows;
  for (const auto& engine : report.engines) {
    for (const auto& metric : report.metrics) {
      MeanRow row{engine, metric.id, std::nullopt, 0, 0, 0};
      double sum = 0.0;
      for (const auto& r : report.records) {
        if (r.engine != engine || r.metric != metric.id) continue;
        if (r.status == ScoreRecord::Status::failed) ++row.failed;
        if (r.status != ScoreRecord::Status::ok) continue;
        if (std::isinf(r.value)) {
          ++row.infinite;
        } else {
          sum += r.value;
          ++row.count;
        }
      }
      if (row.count > 0) row.mean = sum / row.count;
      rows.push_back(row);
    }
  }
  return rows;
}

EvaluationReport run_evaluation(const Manifest& manifest, std::span<const EngineDescriptor> engines,
                                std::span<const MetricDescriptor> metrics,
                                const EvaluationOptions& options) {
  if (manifest.entries.empty()) throw std::invalid_argument("run_evaluation: empty manifest");
  if (engines.empty()) throw std::invalid_argument("run_evaluation: no engines");
  if (metrics.empty()) throw std::invalid_argument("run_evaluation: no metrics");

  const std::size_t n_eng = engines.size();
  const std::size_t tasks = manifest.entries.size() * n_eng;
  std::vector<std::vector<ScoreRecord>> results(tasks);
  enum class TaskState { scored, failed, skipped };
  std::vector<TaskState> states(tasks, TaskState::scored);
  const bool needs_files = any_external(metrics);
  ProcessLimiter limiter(options.process_cap);

  parallel_for_index(tasks, options.jobs, [&](std::size_t t) {
    const ManifestEntry& entry = manifest.entries[t / n_eng];
    const EngineDescriptor& engine = engines[t % n_eng];
    std::vector<ScoreRecord>& out = results[t];
    auto fill_all = [&](ScoreRecord::Status status, const std::string& error,
                        const std::string& output) {
      for (const auto& m : metrics) out.push_back({entry.id, engine.id, m.id, status, 0.0, error, output});
    };

    const auto reuse = entry.enhanced.find(engine.id);
    fs::path output;
    EvalImage reference, test;
    try {
      reference.image = load_image(entry.reference);
      reference.path = entry.reference;
      Image enhanced;
      if (reuse != entry.enhanced.end()) {
        output = reuse->second;
        enhanced = load_image(output);
      } else if (engine.kind == EngineDescriptor::Kind::precomputed) {
        states[t] = TaskState::skipped;
        fill_all(ScoreRecord::Status::skipped, "no enhanced image in manifest", "");
        return;
      } else {
        output = options.work_dir / safe_name(engine.id) / (safe_name(entry.id) + ".png");
        enhanced = run_engine(engine, entry.raw, output);
      }
      test.image = align_to(enhanced, reference.image);
      if (test.image == enhanced && reuse != entry.enhanced.end()) test.path = output;
      if (needs_files) {
        materialize(test, options.work_dir / "aligned" / safe_name(engine.id), safe_name(entry.id));
      }
    } catch (const std::exception& e) {
      states[t] = TaskState::failed;
      fill_all(ScoreRecord::Status::failed, e.what(), output.string());
      return;
    }

    for (const auto& m : metrics) {
      ScoreRecord rec{entry.id, engine.id, m.id, ScoreRecord::Status::ok, 0.0, "", output.string()};
      try {
        rec.value = evaluate_metric(m, reference, test, &limiter).value;
      } catch (const std::exception& e) {
        rec.status = ScoreRecord::Status::failed;
        rec.error = e.what();
      }
      out.push_back(std::move(rec));
    }
  });

  EvaluationReport report;
  report.corpus_size = static_cast<int>(manifest.entries.size());
  for (const auto& e : engines) report.engines.push_back(e.id);
  for (const auto& m : metrics) report.metrics.push_back({m.id, m.display_name(), m.polarity});
  for (const auto& e : engines) {
    if (e.kind == EngineDescriptor::Kind::builtin_classical) {
      report.tone = e.tone;
      break;
    }
  }
  for (auto& r : results) {
    for (auto& rec : r) report.records.push_back(std::move(rec));
  }
  for (std::size_t j = 0; j < n_eng; ++j) {
    EngineSummary s{engines[j].id, 0, 0, 0, false};
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
      switch (states[i * n_eng + j]) {
        case TaskState::scored: ++s.scored; break;
        case TaskState::failed: ++s.failed; break;
        case TaskState::skipped: ++s.skipped; break;
      }
    }
    s.fully_failed = s.scored == 0 && s.failed > 0;
    report.summaries.push_back(s);
  }
  report.means = recompute_means(report);
  return report;
}

std::string score_record(const ScoreRecord& r) {
  json j = {{"type", "record"}, {"entry", r.entry}, {"engine", r.engine},
            {"metric", r.metric}, {"status", status_name(r.status)}};
  if (r.status == ScoreRecord::Status::ok) {
    put_value(j, "value", r.value);
  } else {
    j["value"] = nullptr;
    j["error"] = r.error;
  }
  if (!r.output.empty()) j["output"] = r.output;
  return j.dump();
}

std::string report_records(const EvaluationReport& report) {
  std::ostringstream out;
  json head;
  head["type"] = "header";
  head["corpus_size"] = report.corpus_size;
  head["engines"] = report.engines;
  head["metrics"] = json::array();
  for (const auto& m : report.metrics) {
    head["metrics"].push_back({{"id", m.id}, {"label", m.label}, {"polarity", to_string(m.polarity)}});
  }
  head["tone"] = {{"black_point", report.tone.black_point},
                  {"white_point", report.tone.white_point},
                  {"gamma", report.tone.gamma}};
  out << head.dump() << '\n';
  for (const auto& r : report.records) out << score_record(r) << '\n';
  for (const auto& m : report.means) {
    json j = {{"type", "mean"},          {"engine", m.engine},     {"metric", m.metric},
              {"count", m.count},        {"infinite", m.infinite}, {"failed", m.failed}};
    j["mean"] = m.mean ? json(*m.mean) : json(nullptr);
    out << j.dump() << '\n';
  }
  for (const auto& s : report.summaries) {
    json j = {{"type", "engine"},      {"engine", s.engine},   {"scored", s.scored},
              {"failed", s.failed},    {"skipped", s.skipped}, {"fully_failed", s.fully_failed}};
    out << j.dump() << '\n';
  }
  return out.str();
}

EvaluationReport parse_report_records(std::istream& in) {
  EvaluationReport report;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        report.corpus_size = j.at("corpus_size").get<int>();
        report.engines = j.at("engines").get<std::vector<std::string>>();
        for (const auto& m : j.at("metrics")) {
          report.metrics.push_back({m.at("id").get<std::string>(), m.at("label").get<std::string>(),
                                    parse_polarity(m.at("polarity").get<std::string>())});
        }
        const auto& t = j.at("tone");
        report.tone = {t.at("black_point").get<double>(), t.at("white_point").get<double>(),
                       t.at("gamma").get<double>()};
      } else if (type == "record") {
        ScoreRecord r;
        r.entry = j.at("entry").get<std::string>();
        r.engine = j.at("engine").get<std::string>();
        r.metric = j.at("metric").get<std::string>();
        r.status = parse_status(j.at("status").get<std::string>());
        if (r.status == ScoreRecord::Status::ok) {
          r.value = get_value(j, "value");
        } else {
          r.error = j.value("error", "");
        }
        r.output = j.value("output", "");
        report.records.push_back(std::move(r));
      } else if (type == "mean") {
        MeanRow m;
        m.engine = j.at("engine").get<std::string>();
        m.metric = j.at("metric").get<std::string>();
        if (!j.at("mean").is_null()) m.mean = j["mean"].get<double>();
        m.count = j.at("count").get<int>();
        m.infinite = j.at("infinite").get<int>();
        m.failed = j.at("failed").get<int>();
        report.means.push_back(m);
      } else if (type == "engine") {
        report.summaries.push_back({j.at("engine").get<std::string>(), j.at("scored").get<int>(),
                                    j.at("failed").get<int>(), j.at("skipped").get<int>(),
                                    j.at("fully_failed").get<bool>()});
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("report line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return report;
}

EvaluationReport load_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read report " + path.string());
  return parse_report_records(in);
}

ResultTable result_table(const EvaluationReport& report) {
  ResultTable table;
  table.columns = report.metrics;
  for (const auto& engine : report.engines) {
    ResultTable::Row row{engine, {}};
    for (const auto& m : report.metrics) {
      const MeanRow* mr = report.mean(engine, m.id);
      if (mr && mr->mean) {
        row.values.push_back(mr->mean);
      } else if (mr && mr->infinite > 0) {
        row.values.push_back(std::numeric_limits<double>::infinity());
      } else {
        row.values.push_back(std::nullopt);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string render_table(const ResultTable& table) {
  std::vector<std::string> header{"Engine/Model"};
  for (const auto& c : table.columns) {
    header.push_back(c.label + (c.polarity == Polarity::higher_is_better ? " ↑" : " ↓"));
  }
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : table.rows) {
    std::vector<std::string> row{r.engine};
    for (const auto& v : r.values) row.push_back(fmt2(v));
    cells.push_back(std::move(row));
  }
  std::vector<std::size_t> widths;
  for (const auto& h : header) widths.push_back(display_width(h));
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], display_width(row[i]));
  }
  auto emit = [&](const std::vector<std::string>& row) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) line += "  ";
      line += pad(row[i], widths[i], i == 0);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    return line + "\n";
  };
  std::string out = emit(header);
  std::vector<std::string> rule;
  for (auto w : widths) rule.emplace_back(w, '-');
  out += emit(rule);
  for (const auto& row : cells) out += emit(row);
  return out;
}

std::string render_csv(const ResultTable& table) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  std::string out = "engine";
  for (const auto& c : table.columns) out += "," + quote(c.id);
  out += "\n";
  for (const auto& r : table.rows) {
    out += quote(r.engine);
    for (const auto& v : r.values) out += "," + (v ? shortest(*v) : std::string());
    out += "\n";
  }
  return out;
}

// --- gating run ------------------------------------------------------------

GateReport run_gate(const Manifest& manifest, std::span<const MetricDescriptor> metrics,
                    const GateRunOptions& options) {
  std::vector<EvalTriple> triples;
  int skipped = 0;
  const bool needs_files = any_external(metrics);
  for (const auto& entry : manifest.entries) {
    auto it = options.engine ? entry.enhanced.find(*options.engine) : entry.enhanced.begin();
    if (it == entry.enhanced.end()) {
      ++skipped;
      continue;
    }
    try {
      EvalTriple t;
      t.id = entry.id;
      t.reference = {load_image(entry.reference), entry.reference};
      auto aligned = [&](const fs::path& p) {
        Image img = load_image(p);
        Image a = align_to(img, t.reference.image);
        const bool unchanged = a == img;
        return EvalImage{std::move(a), unchanged ? p : fs::path()};
      };
      t.raw = aligned(entry.raw);
      t.enhanced = aligned(it->second);
      t.white = {white_control(t.reference.image), {}};
      if (needs_files) {
        const fs::path scratch = options.work_dir / "gate";
        const std::string base = safe_name(entry.id);
        materialize(t.raw, scratch, base + "_raw");
        materialize(t.enhanced, scratch, base + "_enhanced");
        materialize(t.white, scratch, base + "_white");
      }
      triples.push_back(std::move(t));
    } catch (const std::exception&) {
      ++skipped;
    }
  }
  if (triples.empty()) {
    throw std::invalid_argument("run_gate: no manifest entry has an enhanced image to gate");
  }
  GateReport report = gate_metrics(triples, metrics, {options.jobs, options.process_cap});
  report.skipped = skipped;
  return report;
}

}  // namespace docenh
