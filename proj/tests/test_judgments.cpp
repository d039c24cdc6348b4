#include <doctest.h>

#include <set>
#include <sstream>

#include "docenh/judgments.hpp"
#include "support.hpp"

using namespace docenh;
using testsupport::TempDir;

namespace {

constexpr Criteria kAllPass{true, true, true, true};

Judgment judgment(const std::string& entry, const std::string& engine, Verdict v, Criteria c = kAllPass,
                  std::string note = "") {
  return Judgment{entry, engine, c, v, std::move(note), ""};
}

Manifest toy_manifest(int n, const std::vector<std::string>& engines) {
  Manifest m;
  for (int i = 0; i < n; ++i) {
    ManifestEntry e;
    e.id = "e" + std::to_string(i);
    e.raw = "/data/raw/" + e.id + ".png";
    e.reference = "/data/ref/" + e.id + ".png";
    for (const auto& eng : engines) e.enhanced[eng] = "/data/" + eng + "/" + e.id + ".png";
    m.entries.push_back(std::move(e));
  }
  return m;
}

}  // namespace

TEST_CASE("override requires a note") {
  Criteria weak = kAllPass;
  weak.contrast = false;
  CHECK_NOTHROW(judgment("a", "b", Verdict::accept).validate());
  CHECK_NOTHROW(judgment("a", "b", Verdict::discard, weak).validate());
  CHECK_THROWS_AS(judgment("a", "b", Verdict::accept, weak).validate(), JudgmentError);
  CHECK_THROWS_AS(judgment("a", "b", Verdict::accept, weak, " \n").validate(), JudgmentError);
  CHECK_NOTHROW(judgment("a", "b", Verdict::accept, weak, "faint but legible").validate());
  CHECK_THROWS_AS(judgment("", "b", Verdict::discard).validate(), JudgmentError);
  CHECK_THROWS_AS(parse_verdict("maybe"), JudgmentError);
}

TEST_CASE("judgment JSON") {
  StoredJudgment s{4, judgment("p1", "classical", Verdict::accept, {true, false, true, true}, "ok \"quoted\"")};
  s.judgment.timestamp = "2026-01-31T09:15:02.041Z";
  const std::string text = judgment_json(s);
  CHECK(parse_judgment(text) == s.judgment);
  std::istringstream log(text + "\n\n" + text + "\n");
  const auto parsed = parse_judgment_log(log);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0] == s);
  CHECK(judgment_json({0, s.judgment}).find("record_id") == std::string::npos);

  CHECK_THROWS_AS(parse_judgment("{"), JudgmentError);
  CHECK_THROWS_AS(parse_judgment(R"({"entry":"a","engine":"b","verdict":"accept","criteria":{}})", false),
                  JudgmentError);
  const std::string body =
      R"({"entry":"a","engine":"b","verdict":"discard","criteria":{"illumination_removal":true,)"
      R"("content_preservation":true,"contrast":false,"color_accuracy":true}})";
  CHECK_THROWS_AS(parse_judgment(body), JudgmentError);
  CHECK(parse_judgment(body, false).criteria.contrast == false);

  const std::string now = utc_timestamp_now();
  CHECK(now.size() == 24);
  CHECK(now.back() == 'Z');
  CHECK(now[10] == 'T');
}

TEST_CASE("later judgments supersede earlier ones and history is kept") {
  TempDir dir;
  const auto path = dir / "sub" / "judgments.jsonl";
  {
    JudgmentLog log(path);
    CHECK(log.append(judgment("p", "x", Verdict::discard)) == 1);
    CHECK(log.append(judgment("p", "y", Verdict::accept)) == 2);
    CHECK(log.append(judgment("p", "x", Verdict::accept)) == 3);
    CHECK_THROWS_AS(log.append(judgment("p", "x", Verdict::accept, Criteria{})), JudgmentError);
    const auto latest = log.latest();
    CHECK(latest.size() == 2);
    CHECK(latest.at({"p", "x"}).record_id == 3);
    CHECK(latest.at({"p", "x"}).judgment.verdict == Verdict::accept);
    const auto hist = log.history("p", "x");
    REQUIRE(hist.size() == 2);
    CHECK(hist[0].judgment.verdict == Verdict::discard);
    CHECK_FALSE(hist[0].judgment.timestamp.empty());
  }
  JudgmentLog reopened(path);
  CHECK(reopened.all().size() == 3);
  CHECK(reopened.append(judgment("q", "x", Verdict::discard)) == 4);
  CHECK(reopened.latest().size() == 3);
}

TEST_CASE("curated export") {
  const std::vector<std::string> engines{"classical", "unet", "srgan"};
  const Manifest manifest = toy_manifest(10, engines);

  SUBCASE("everything accepted") {
    std::vector<StoredJudgment> log;
    std::int64_t id = 1;
    for (const auto& e : manifest.entries)
      for (const auto& eng : engines) log.push_back({id++, judgment(e.id, eng, Verdict::accept)});
    const Manifest out = export_curated(log, manifest);
    REQUIRE(out.entries.size() == manifest.entries.size());
    for (std::size_t i = 0; i < out.entries.size(); ++i) CHECK(out.entries[i].enhanced == manifest.entries[i].enhanced);
  }

  SUBCASE("everything rejected") {
    std::vector<StoredJudgment> log;
    std::int64_t id = 1;
    for (const auto& e : manifest.entries) log.push_back({id++, judgment(e.id, "unet", Verdict::discard)});
    CHECK(export_curated(log, manifest).entries.empty());
  }

  SUBCASE("mixed log agrees with a backwards scan") {
    Rng rng(8);
    std::vector<StoredJudgment> log;
    for (std::int64_t id = 1; id <= 200; ++id) {
      const auto& e = manifest.entries[rng.uniform_int(0, 9)];
      const auto& eng = engines[rng.uniform_int(0, 2)];
      log.push_back({id, judgment(e.id, eng, rng.uniform() < 0.4 ? Verdict::accept : Verdict::discard)});
    }
    std::set<PairKey> accepted;
    for (const auto& e : manifest.entries)
      for (const auto& eng : engines)
        for (auto it = log.rbegin(); it != log.rend(); ++it) {
          if (it->judgment.entry != e.id || it->judgment.engine != eng) continue;
          if (it->judgment.verdict == Verdict::accept) accepted.insert({e.id, eng});
          break;
        }
    std::set<PairKey> exported;
    for (const auto& e : export_curated(log, manifest).entries) {
      CHECK_FALSE(e.enhanced.empty());
      CHECK(e.raw == manifest.find(e.id)->raw);
      for (const auto& [eng, path] : e.enhanced) {
        exported.insert({e.id, eng});
        CHECK(path == manifest.find(e.id)->enhanced.at(eng));
      }
    }
    CHECK(exported == accepted);
  }

  SUBCASE("outputs from a report") {
    Manifest bare = toy_manifest(2, {});
    EvaluationReport report;
    ScoreRecord rec;
    rec.entry = "e1";
    rec.engine = "classical";
    rec.metric = "psnr";
    rec.output = "/work/classical/e1.png";
    report.records.push_back(rec);
    const std::vector<StoredJudgment> log{{1, judgment("e1", "classical", Verdict::accept)},
                                          {2, judgment("e0", "classical", Verdict::accept)}};
    CHECK(export_curated(log, bare).entries.empty());
    const Manifest out = export_curated(log, bare, &report);
    REQUIRE(out.entries.size() == 1);
    CHECK(out.entries[0].enhanced.at("classical") == "/work/classical/e1.png");
  }
}
