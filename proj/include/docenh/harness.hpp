#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "docenh/enhance.hpp"
#include "docenh/image.hpp"
#include "docenh/iqa.hpp"

namespace docenh {

// --- manifests -------------------------------------------------------------
//
// One JSON object per line:
//   {"id": "doc-001", "raw": "raw/001.png", "reference": "ref/001.png",
//    "enhanced": {"classical": "out/001.png"}}
// Relative paths resolve against the manifest's directory. Blank lines are
// ignored. Test images are resampled bilinearly to the reference dimensions
// before scoring.

struct ManifestEntry {
  std::string id;
  std::filesystem::path raw;
  std::filesystem::path reference;
  std::map<std::string, std::filesystem::path> enhanced;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  const ManifestEntry* find(const std::string& id) const;
  friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// Every validation problem found while loading, reported together.
class ManifestError : public std::runtime_error {
 public:
  explicit ManifestError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir,
                        bool check_files = true);
/// Writes absolute paths so the file can live anywhere.
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
std::string manifest_records(const Manifest& manifest);

// --- engines ---------------------------------------------------------------

struct EngineDescriptor {
  enum class Kind {
    builtin_classical,  // enhance_document
    external,           // command template with {in} and {out}
    precomputed,        // only the manifest's enhanced paths
  };

  std::string id;
  Kind kind = Kind::builtin_classical;
  std::string command;
  std::chrono::milliseconds timeout{std::chrono::seconds(300)};
  ToneParams tone;

  static EngineDescriptor classical(std::string id = "classical", ToneParams tone = {});
  static EngineDescriptor external_command(std::string id, std::string command);
  static EngineDescriptor precomputed_outputs(std::string id);
};

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Enhances the capture at `raw` and returns the result. Builtin engines
/// also write it to `out` when `out` is non-empty; external engines must
/// write `out` themselves.
Image run_engine(const EngineDescriptor& engine, const std::filesystem::path& raw,
                 const std::filesystem::path& out);

/// Brings `test` to the reference's dimensions (bilinear) and channel count.
Image align_to(const Image& test, const Image& reference);

// --- evaluation ------------------------------------------------------------

struct EvaluationOptions {
  int jobs = 1;
  int process_cap = 4;
  std::filesystem::path work_dir = "docenh-work";
};

struct ScoreRecord {
  std::string entry;
  std::string engine;
  std::string metric;
  enum class Status { ok, failed, skipped } status = Status::ok;
  double value = 0.0;  // +inf allowed
  std::string error;
  std::string output;  // enhanced image path, when one exists

  friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

struct MeanRow {
  std::string engine;
  std::string metric;
  std::optional<double> mean;  // over finite ok values
  int count = 0;               // finite values averaged
  int infinite = 0;            // +inf values left out of the mean
  int failed = 0;

  friend bool operator==(const MeanRow&, const MeanRow&) = default;
};

struct EngineSummary {
  std::string engine;
  int scored = 0;
  int failed = 0;
  int skipped = 0;
  bool fully_failed = false;

  friend bool operator==(const EngineSummary&, const EngineSummary&) = default;
};

struct MetricColumn {
  std::string id;
  std::string label;
  Polarity polarity = Polarity::higher_is_better;

  friend bool operator==(const MetricColumn&, const MetricColumn&) = default;
};

struct EvaluationReport {
  int corpus_size = 0;
  std::vector<std::string> engines;
  std::vector<MetricColumn> metrics;
  ToneParams tone;
  std::vector<ScoreRecord> records;  // manifest order, then engine, then metric
  std::vector<MeanRow> means;        // engine order, then metric
  std::vector<EngineSummary> summaries;

  const MeanRow* mean(const std::string& engine, const std::string& metric) const;
  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

/// For each entry and engine: take the manifest's enhanced path if present
/// (always, for precomputed engines), otherwise run the engine into
/// work_dir/<engine>/<entry>.png; align to the reference; score under every
/// metric. Per-entry failures are recorded and the run continues. The
/// report is identical for any `jobs`.
EvaluationReport run_evaluation(const Manifest& manifest, std::span<const EngineDescriptor> engines,
                                std::span<const MetricDescriptor> metrics,
                                const EvaluationOptions& options = {});

/// Recomputes the MeanRow list from the records.
std::vector<MeanRow> recompute_means(const EvaluationReport& report);

/// Line-delimited JSON: a header, one line per record, mean and engine lines.
std::string report_records(const EvaluationReport& report);
/// One record line, without the trailing newline.
std::string score_record(const ScoreRecord& record);
EvaluationReport parse_report_records(std::istream& in);
EvaluationReport load_report(const std::filesystem::path& path);

/// Table of per-engine means, rendered with two decimals.
struct ResultTable {
  std::vector<MetricColumn> columns;
  struct Row {
    std::string engine;
    std::vector<std::optional<double>> values;  // nullopt renders as "-"; +inf as "inf"
  };
  std::vector<Row> rows;
};

ResultTable result_table(const EvaluationReport& report);
std::string render_table(const ResultTable& table);
std::string render_csv(const ResultTable& table);

// --- gating run ------------------------------------------------------------

struct GateRunOptions {
  std::optional<std::string> engine;  // manifest engine to gate; first available by default
  int jobs = 1;
  int process_cap = 4;
  std::filesystem::path work_dir = "docenh-work";
};

/// Builds (reference, raw, enhanced, white) triples from the manifest
/// (entries without an enhanced image are skipped and counted) and
/// delegates to gate_metrics.
GateReport run_gate(const Manifest& manifest, std::span<const MetricDescriptor> metrics,
                    const GateRunOptions& options = {});

}  // namespace docenh
