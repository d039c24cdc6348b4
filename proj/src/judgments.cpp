#include "docenh/judgments.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace docenh {

using nlohmann::json;

const char* to_string(Verdict v) noexcept { return v == Verdict::accept ? "accept" : "discard"; }

Verdict parse_verdict(const std::string& s) {
  if (s == "accept") return Verdict::accept;
  if (s == "discard") return Verdict::discard;
  throw JudgmentError("verdict must be 'accept' or 'discard', got '" + s + "'");
}

void Judgment::validate() const {
  if (entry.empty()) throw JudgmentError("judgment needs an entry id");
  if (engine.empty()) throw JudgmentError("judgment needs an engine id");
  if (verdict == Verdict::accept && !criteria.all() &&
      note.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw JudgmentError("accepting with a failed criterion requires an override note");
  }
}

std::string utc_timestamp_now() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const std::time_t secs = system_clock::to_time_t(now);
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  const std::size_t n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::snprintf(buf + n, sizeof buf - n, ".%03dZ", static_cast<int>(ms));
  return buf;
}

std::string judgment_json(const StoredJudgment& s) {
  const Judgment& j = s.judgment;
  json out;
  if (s.record_id != 0) out["record_id"] = s.record_id;
  out["entry"] = j.entry;
  out["engine"] = j.engine;
  out["criteria"] = {{"illumination_removal", j.criteria.illumination_removal},
                     {"content_preservation", j.criteria.content_preservation},
                     {"contrast", j.criteria.contrast},
                     {"color_accuracy", j.criteria.color_accuracy}};
  out["verdict"] = to_string(j.verdict);
  out["note"] = j.note;
  out["timestamp"] = j.timestamp;
  return out.dump();
}

namespace {

Judgment from_json(const json& in, bool require_timestamp) {
  if (!in.is_object()) throw JudgmentError("judgment must be a JSON object");
  auto str = [&](const char* key, bool required) -> std::string {
    if (!in.contains(key)) {
      if (required) throw JudgmentError(std::string("missing field '") + key + "'");
      return {};
    }
    if (!in[key].is_string()) throw JudgmentError(std::string("field '") + key + "' must be a string");
    return in[key].get<std::string>();
  };
  Judgment j;
  j.entry = str("entry", true);
  j.engine = str("engine", true);
  j.verdict = parse_verdict(str("verdict", true));
  j.note = str("note", false);
  j.timestamp = str("timestamp", require_timestamp);
  if (!in.contains("criteria") || !in["criteria"].is_object()) {
    throw JudgmentError("missing object field 'criteria'");
  }
  const json& c = in["criteria"];
  auto flag = [&](const char* key) {
    if (!c.contains(key) || !c[key].is_boolean()) {
      throw JudgmentError(std::string("criterion '") + key + "' must be true or false");
    }
    return c[key].get<bool>();
  };
  j.criteria = {flag("illumination_removal"), flag("content_preservation"), flag("contrast"),
                flag("color_accuracy")};
  return j;
}

}  // namespace

Judgment parse_judgment(const std::string& text, bool require_timestamp) {
  json in;
  try {
    in = json::parse(text);
  } catch (const json::parse_error& e) {
    throw JudgmentError(std::string("malformed judgment: ") + e.what());
  }
  return from_json(in, require_timestamp);
}

std::vector<StoredJudgment> parse_judgment_log(std::istream& in) {
  std::vector<StoredJudgment> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      StoredJudgment s{j.at("record_id").get<std::int64_t>(), from_json(j, true)};
      out.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw JudgmentError("judgment log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::map<PairKey, StoredJudgment> latest_judgments(std::span<const StoredJudgment> log) {
  std::map<PairKey, StoredJudgment> latest;
  for (const auto& s : log) {
    const PairKey key{s.judgment.entry, s.judgment.engine};
    auto it = latest.find(key);
    if (it == latest.end() || it->second.record_id < s.record_id) latest[key] = s;
  }
  return latest;
}

JudgmentLog::JudgmentLog(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  std::ifstream in(path_);
  if (!in) throw JudgmentError("cannot read judgment log " + path_.string());
  records_ = parse_judgment_log(in);
  for (const auto& r : records_) next_id_ = std::max(next_id_, r.record_id + 1);
}

std::int64_t JudgmentLog::append(Judgment judgment) {
  judgment.validate();
  if (judgment.timestamp.empty()) judgment.timestamp = utc_timestamp_now();
  std::lock_guard lock(mutex_);
  StoredJudgment stored{next_id_, std::move(judgment)};
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  out << judgment_json(stored) << '\n';
  out.flush();
  if (!out) throw JudgmentError("cannot append to judgment log " + path_.string());
  records_.push_back(stored);
  return next_id_++;
}

std::vector<StoredJudgment> JudgmentLog::all() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::vector<StoredJudgment> JudgmentLog::history(const std::string& entry,
                                                 const std::string& engine) const {
  std::lock_guard lock(mutex_);
  std::vector<StoredJudgment> out;
  for (const auto& r : records_) {
    if (r.judgment.entry == entry && r.judgment.engine == engine) out.push_back(r);
  }
  return out;
}

std::map<PairKey, StoredJudgment> JudgmentLog::latest() const {
  std::lock_guard lock(mutex_);
  return latest_judgments(records_);
}

Manifest export_curated(std::span<const StoredJudgment> log, const Manifest& manifest,
                        const EvaluationReport* report) {
  const auto latest = latest_judgments(log);
  Manifest curated;
  for (const auto& entry : manifest.entries) {
    ManifestEntry kept = entry;
    kept.enhanced.clear();
    for (const auto& [key, s] : latest) {
      if (key.first != entry.id || s.judgment.verdict != Verdict::accept) continue;
      if (auto it = entry.enhanced.find(key.second); it != entry.enhanced.end()) {
        kept.enhanced[key.second] = it->second;
        continue;
      }
      if (!report) continue;
      for (const auto& r : report->records) {
        if (r.entry == entry.id && r.engine == key.second && !r.output.empty()) {
          kept.enhanced[key.second] = r.output;
          break;
        }
      }
    }
    if (!kept.enhanced.empty()) curated.entries.push_back(std::move(kept));
  }
  return curated;
}

}  // namespace docenh
