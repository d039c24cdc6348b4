#pragma once

#include <chrono>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "docenh/image.hpp"

namespace docenh {

class ProcessLimiter;

enum class Polarity { higher_is_better, lower_is_better };

std::string to_string(Polarity polarity);
/// Accepts "higher"/"lower" (and the long forms).
Polarity parse_polarity(const std::string& text);

/// External metric: a command template with {ref} and {test} placeholders
/// that prints one real number (last line of standard output).
struct ExternalCommand {
  std::string command;
  std::chrono::milliseconds timeout{std::chrono::seconds(120)};
};

struct MetricDescriptor {
  std::string id;
  std::string label;  // column header; defaults to the upper-cased id
  Polarity polarity = Polarity::higher_is_better;
  std::optional<ExternalCommand> external;  // empty for builtins

  bool is_external() const noexcept { return external.has_value(); }
  std::string display_name() const;
};

/// A scored comparison. PSNR (and SNR) on identical images use +inf.
struct MetricScore {
  std::string metric;
  double value = 0.0;

  bool is_infinite() const noexcept { return value == std::numeric_limits<double>::infinity(); }
};

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure of an external scorer. `exit_code` is set for nonzero exits.
class ExternalMetricError : public MetricError {
 public:
  enum class Kind { nonzero_exit, unparsable_output, timeout, spawn_failure };
  ExternalMetricError(Kind kind, std::string command, const std::string& detail, int exit_code = 0);

  Kind kind() const noexcept { return kind_; }
  const std::string& command() const noexcept { return command_; }
  int exit_code() const noexcept { return exit_code_; }

 private:
  Kind kind_;
  std::string command_;
  int exit_code_;
};

// --- builtin metrics, all on the 8-bit scale (values * 255) ----------------

struct PixelStats {
  double mse = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  double snr = 0.0;  // 10 log10(mean(ref^2) / mse), +inf when mse == 0
};

PixelStats pixel_stats(const Image& reference, const Image& test);

/// 20 log10(255) - 10 log10(MSE), evaluated as 10 log10(255^2 / MSE);
/// +inf when MSE == 0.
double psnr(const Image& reference, const Image& test);

/// Multi-scale SSIM on the luminance plane: 11x11 Gaussian window
/// (sigma 1.5, valid positions only), K1 = 0.01, K2 = 0.03, L = 255, up to
/// five dyadic scales with weights (0.0448, 0.2856, 0.3001, 0.2363, 0.1333).
/// Contrast-structure at the finer scales, full SSIM at the coarsest.
/// A scale is used only while its plane is at least 11 pixels on each side;
/// the weights of the used scales are renormalized. Negative per-scale terms
/// are clipped to zero before the weighted product.
double ms_ssim(const Image& reference, const Image& test);

/// Number of pyramid levels ms_ssim uses for a w x h input.
int ms_ssim_scales(int width, int height);

/// Spawns the descriptor's command with {ref} and {test} substituted.
MetricScore external_metric(const MetricDescriptor& descriptor,
                            const std::filesystem::path& reference,
                            const std::filesystem::path& test);

/// Strict polarity-aware comparison; ties are not "better".
/// Throws MetricError if a score belongs to another metric.
bool is_better(const MetricDescriptor& metric, const MetricScore& a, const MetricScore& b);

/// Registry of uniquely named metrics, seeded with the builtins
/// psnr, ms-ssim, mse, mae, rmse and snr.
class MetricRegistry {
 public:
  MetricRegistry();

  void add(MetricDescriptor descriptor);  // throws on duplicate id
  const MetricDescriptor& get(const std::string& id) const;
  bool contains(const std::string& id) const;
  const std::vector<MetricDescriptor>& all() const noexcept { return metrics_; }

  /// Resolves a comma-separated id list in the given order.
  std::vector<MetricDescriptor> select(const std::string& csv) const;

 private:
  std::vector<MetricDescriptor> metrics_;
};

bool is_builtin_metric(const std::string& id);

/// An image as a metric sees it: the pixels, plus an on-disk copy for
/// external scorers (empty path until materialized).
struct EvalImage {
  Image image;
  std::filesystem::path path;
};

/// Writes `img.image` to `scratch/name.png` if it has no path yet.
void materialize(EvalImage& img, const std::filesystem::path& scratch, const std::string& name);

/// Scores `test` against `reference` with any metric.
MetricScore evaluate_metric(const MetricDescriptor& metric, const EvalImage& reference,
                            const EvalImage& test, ProcessLimiter* limiter = nullptr);

// --- metric gating ---------------------------------------------------------

struct EvalTriple {
  std::string id;
  EvalImage reference;
  EvalImage raw;
  EvalImage enhanced;
  EvalImage white;  // all 1.0 at reference dimensions
};

/// White control for a reference: every value 1.0, same shape.
Image white_control(const Image& reference);

struct GateRow {
  std::string metric;
  double raw_error = 0.0;    // percent of scored triples where raw beat enhanced
  double white_error = 0.0;  // percent where white beat raw
  double total = 0.0;        // raw_error + white_error
  int scored = 0;
  int failed = 0;
  std::vector<std::string> failures;  // "<triple id>: <reason>"

  friend bool operator==(const GateRow&, const GateRow&) = default;
};

struct GateReport {
  std::vector<GateRow> rows;  // registry order
  int corpus = 0;             // triples offered
  int skipped = 0;            // entries the harness could not turn into triples

  const GateRow& row(const std::string& metric) const;
};

struct GateOptions {
  int jobs = 1;
  int process_cap = 4;
};

/// Scores every (triple, metric) pair and counts raw and white errors. A
/// failed evaluation drops that triple from that metric's denominator.
GateReport gate_metrics(std::span<const EvalTriple> triples,
                        std::span<const MetricDescriptor> registry,
                        const GateOptions& options = {});

/// Ascending total, then ascending raw error, then id.
std::vector<std::string> rank_metrics(const GateReport& report);

/// Metric | Raw error | White error | Total, one decimal.
std::string render_gate_table(const GateReport& report,
                              std::span<const MetricDescriptor> registry = {});
/// One JSON object per line, one line per metric.
std::string render_gate_records(const GateReport& report);

}  // namespace docenh
