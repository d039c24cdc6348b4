#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "docenh/harness.hpp"

namespace docenh {

struct Criteria {
  bool illumination_removal = false;
  bool content_preservation = false;
  bool contrast = false;
  bool color_accuracy = false;

  bool all() const noexcept {
    return illumination_removal && content_preservation && contrast && color_accuracy;
  }
  friend bool operator==(const Criteria&, const Criteria&) = default;
};

enum class Verdict { accept, discard };
const char* to_string(Verdict v) noexcept;
Verdict parse_verdict(const std::string& s);

class JudgmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Judgment {
  std::string entry;
  std::string engine;
  Criteria criteria;
  Verdict verdict = Verdict::discard;
  std::string note;
  std::string timestamp;  // ISO 8601 UTC, e.g. 2026-01-31T09:15:02.041Z

  /// Accepting with a failed criterion needs a note explaining the override.
  void validate() const;
  friend bool operator==(const Judgment&, const Judgment&) = default;
};

struct StoredJudgment {
  std::int64_t record_id = 0;
  Judgment judgment;

  friend bool operator==(const StoredJudgment&, const StoredJudgment&) = default;
};

std::string utc_timestamp_now();

/// JSON object text. The record id is included when non-zero.
std::string judgment_json(const StoredJudgment& j);
/// Reads the fields of a judgment from a JSON object. `require_timestamp`
/// is off for request bodies, where the server stamps the time.
Judgment parse_judgment(const std::string& text, bool require_timestamp = true);

std::vector<StoredJudgment> parse_judgment_log(std::istream& in);

using PairKey = std::pair<std::string, std::string>;  // (entry, engine)

/// Latest judgment per pair: the one with the highest record id.
std::map<PairKey, StoredJudgment> latest_judgments(std::span<const StoredJudgment> log);

/// Append-only judgment log, one JSON object per line. Appends are serialized
/// and flushed before returning.
class JudgmentLog {
 public:
  explicit JudgmentLog(std::filesystem::path path);

  std::int64_t append(Judgment judgment);
  std::vector<StoredJudgment> all() const;
  std::vector<StoredJudgment> history(const std::string& entry, const std::string& engine) const;
  std::map<PairKey, StoredJudgment> latest() const;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::vector<StoredJudgment> records_;
  std::int64_t next_id_ = 1;
};

/// Keeps each manifest entry that has at least one accepted engine, with its
/// enhanced map reduced to the accepted engines. Paths come from the manifest
/// or, for engines the harness ran, from the report's output records.
Manifest export_curated(std::span<const StoredJudgment> log, const Manifest& manifest,
                        const EvaluationReport* report = nullptr);

}  // namespace docenh
