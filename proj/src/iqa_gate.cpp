#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <json.hpp>
#include <sstream>
#include <system_error>

#include "docenh/iqa.hpp"
#include "docenh/parallel.hpp"
#include "docenh/process.hpp"

namespace docenh {

namespace {

const char* external_kind_name(ExternalMetricError::Kind kind) {
  switch (kind) {
    case ExternalMetricError::Kind::nonzero_exit: return "nonzero exit";
    case ExternalMetricError::Kind::unparsable_output: return "unparsable output";
    case ExternalMetricError::Kind::timeout: return "timeout";
    case ExternalMetricError::Kind::spawn_failure: return "spawn failure";
  }
  return "error";
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  s.erase(0, first);
  s.erase(s.find_last_not_of(" \t\r\n") + 1);
  return s;
}

std::string last_nonempty_line(const std::string& text) {
  std::istringstream in(text);
  std::string line, last;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) last = line;
  }
  return last;
}

struct Outcome {
  bool ok = false;
  bool raw_beats_enhanced = false;
  bool white_beats_raw = false;
  std::string error;
};

std::string fmt1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

}  // namespace

ExternalMetricError::ExternalMetricError(Kind kind, std::string command, const std::string& detail,
                                         int exit_code)
    : MetricError(std::string("external metric ") + external_kind_name(kind) + ": " + detail +
                  " [command: " + command + "]"),
      kind_(kind),
      command_(std::move(command)),
      exit_code_(exit_code) {}

MetricScore external_metric(const MetricDescriptor& descriptor,
                            const std::filesystem::path& reference,
                            const std::filesystem::path& test) {
  if (!descriptor.external) {
    throw MetricError("metric '" + descriptor.id + "' is not external");
  }
  const std::string command = substitute_placeholders(
      descriptor.external->command, {{"ref", reference.string()}, {"test", test.string()}});
  using Kind = ExternalMetricError::Kind;
  ProcessResult result;
  try {
    result = run_shell(command, descriptor.external->timeout);
  } catch (const std::system_error& e) {
    throw ExternalMetricError(Kind::spawn_failure, command, e.what());
  }
  if (result.timed_out) {
    throw ExternalMetricError(Kind::timeout, command,
                              "no result after " +
                                  std::to_string(descriptor.external->timeout.count()) + " ms");
  }
  if (result.exit_code != 0) {
    throw ExternalMetricError(Kind::nonzero_exit, command,
                              "exit code " + std::to_string(result.exit_code) +
                                  (result.err.empty() ? "" : ": " + trim(result.err)),
                              result.exit_code);
  }
  const std::string line = last_nonempty_line(result.out);
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(line.c_str(), &end);
  const bool parsed = !line.empty() && end == line.c_str() + line.size() && errno != ERANGE;
  if (!parsed || std::isnan(value) || value == -HUGE_VAL) {
    throw ExternalMetricError(Kind::unparsable_output, command,
                              "expected one real number, got '" + line + "'");
  }
  return {descriptor.id, value};
}

const GateRow& GateReport::row(const std::string& metric) const {
  for (const auto& r : rows) {
    if (r.metric == metric) return r;
  }
  throw std::out_of_range("gate report has no row for metric '" + metric + "'");
}

GateReport gate_metrics(std::span<const EvalTriple> triples,
                        std::span<const MetricDescriptor> registry, const GateOptions& options) {
  if (triples.empty()) throw std::invalid_argument("gate_metrics needs at least one triple");
  const std::size_t m = registry.size();
  std::vector<Outcome> outcomes(triples.size() * m);
  ProcessLimiter limiter(options.process_cap);

  parallel_for_index(triples.size(), options.jobs, [&](std::size_t t) {
    const EvalTriple& triple = triples[t];
    for (std::size_t k = 0; k < m; ++k) {
      const MetricDescriptor& metric = registry[k];
      Outcome& out = outcomes[t * m + k];
      try {
        const MetricScore raw = evaluate_metric(metric, triple.reference, triple.raw, &limiter);
        const MetricScore enh = evaluate_metric(metric, triple.reference, triple.enhanced, &limiter);
        const MetricScore white = evaluate_metric(metric, triple.reference, triple.white, &limiter);
        out.raw_beats_enhanced = is_better(metric, raw, enh);
        out.white_beats_raw = is_better(metric, white, raw);
        out.ok = true;
      } catch (const std::exception& e) {
        out.error = e.what();
      }
    }
  });

  GateReport report;
  report.corpus = static_cast<int>(triples.size());
  for (std::size_t k = 0; k < m; ++k) {
    GateRow row;
    row.metric = registry[k].id;
    int raw = 0, white = 0;
    for (std::size_t t = 0; t < triples.size(); ++t) {
      const Outcome& o = outcomes[t * m + k];
      if (!o.ok) {
        ++row.failed;
        row.failures.push_back(triples[t].id + ": " + o.error);
        continue;
      }
      ++row.scored;
      raw += o.raw_beats_enhanced;
      white += o.white_beats_raw;
    }
    if (row.scored > 0) {
      row.raw_error = 100.0 * raw / row.scored;
      row.white_error = 100.0 * white / row.scored;
    }
    row.total = row.raw_error + row.white_error;
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<std::string> rank_metrics(const GateReport& report) {
  if (report.rows.empty()) throw std::invalid_argument("rank_metrics: empty report");
  std::vector<const GateRow*> rows;
  for (const auto& r : report.rows) rows.push_back(&r);
  std::sort(rows.begin(), rows.end(), [](const GateRow* a, const GateRow* b) {
    if (a->total != b->total) return a->total < b->total;
    if (a->raw_error != b->raw_error) return a->raw_error < b->raw_error;
    return a->metric < b->metric;
  });
  std::vector<std::string> ids;
  for (const auto* r : rows) ids.push_back(r->metric);
  return ids;
}

std::string render_gate_table(const GateReport& report, std::span<const MetricDescriptor> registry) {
  auto name_of = [&](const std::string& id) {
    for (const auto& d : registry) {
      if (d.id == id) return d.display_name();
    }
    return id;
  };
  std::size_t name_width = 6;  // "Metric"
  for (const auto& r : report.rows) name_width = std::max(name_width, name_of(r.metric).size());

  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %9s  %11s  %6s\n", static_cast<int>(name_width), "Metric",
                "Raw error", "White error", "Total");
  out << line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-*s  %9s  %11s  %6s\n", static_cast<int>(name_width),
                  name_of(r.metric).c_str(), fmt1(r.raw_error).c_str(),
                  fmt1(r.white_error).c_str(), fmt1(r.total).c_str());
    out << line;
  }
  return out.str();
}

std::string render_gate_records(const GateReport& report) {
  std::ostringstream out;
  nlohmann::json head = {{"type", "gate"}, {"corpus", report.corpus}, {"skipped", report.skipped}};
  out << head.dump() << '\n';
  for (const auto& r : report.rows) {
    nlohmann::json j = {{"type", "gate_metric"},  {"metric", r.metric},
                        {"raw_error", r.raw_error}, {"white_error", r.white_error},
                        {"total", r.total},         {"scored", r.scored},
                        {"failed", r.failed},       {"failures", r.failures}};
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace docenh
