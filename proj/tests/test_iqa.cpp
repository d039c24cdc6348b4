#include <doctest.h>

#include <chrono>
#include <limits>

#include "support.hpp"

using namespace docenh;
using testsupport::make_image;
using testsupport::TempDir;

namespace {

MetricDescriptor external(const std::string& id, const std::string& command, Polarity p = Polarity::higher_is_better,
                          std::chrono::milliseconds timeout = std::chrono::seconds(20)) {
  return MetricDescriptor{id, "", p, ExternalCommand{command, timeout}};
}

std::vector<EvalTriple> synthetic_triples(std::size_t n) {
  std::vector<EvalTriple> out;
  synth::PageOptions opts;
  opts.width = 176;
  opts.height = 176;
  for (std::size_t i = 0; i < n; ++i) {
    const auto page = testsupport::shaded_page(555, i, opts);
    EvalTriple t;
    t.id = "t" + std::to_string(i);
    t.reference.image = page.clean;
    t.raw.image = page.raw;
    t.enhanced.image = enhance_document(page.raw).enhanced;
    t.white.image = white_control(page.clean);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

TEST_CASE("psnr analytic values") {
  const Image black = Image::filled(16, 16, 3, 0.0), white = Image::filled(16, 16, 3, 1.0);
  CHECK(psnr(black, white) == 0.0);
  const Image one = Image::filled(16, 16, 3, 1.0 / 255.0);
  CHECK(psnr(black, one) == doctest::Approx(48.1308).epsilon(1e-3 / 48.1308));
  CHECK(psnr(one, one) == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(psnr(black, Image::filled(16, 15, 3, 0.0)), ShapeError);
}

TEST_CASE("pixel statistics") {
  const Image ref(2, 1, 1, {1.0, 0.0});
  const Image test(2, 1, 1, {0.0, 0.0});
  const PixelStats s = pixel_stats(ref, test);
  CHECK(s.mse == doctest::Approx(255.0 * 255.0 / 2));
  CHECK(s.mae == doctest::Approx(127.5));
  CHECK(s.rmse == doctest::Approx(255.0 / std::sqrt(2.0)));
  CHECK(s.snr == doctest::Approx(0.0));
  const PixelStats same = pixel_stats(ref, ref);
  CHECK(same.mse == 0.0);
  CHECK(same.snr == std::numeric_limits<double>::infinity());
}

TEST_CASE("ms-ssim of identical images is exactly one") {
  Rng rng(2);
  const Image img = testsupport::random_image(64, 48, 3, rng);
  CHECK(ms_ssim(img, img) == 1.0);
  CHECK(ms_ssim(Image::filled(40, 40, 1, 0.3), Image::filled(40, 40, 1, 0.3)) == 1.0);
}

TEST_CASE("ms-ssim matches a direct windowed computation") {
  Rng rng(12);
  for (int i = 0; i < 3; ++i) {
    const Image a = synth::text_page({176, 176, 1}, rng);
    const Image b = synth::add_gaussian_noise(a, 0.03 * (i + 1), rng);
    CHECK(ms_ssim(a, b) == doctest::Approx(testsupport::brute_ms_ssim(a, b)).epsilon(1e-10));
  }
  const Image c = testsupport::random_image(48, 30, 3, rng);
  const Image d = testsupport::random_image(48, 30, 3, rng);
  CHECK(ms_ssim(c, d) == doctest::Approx(testsupport::brute_ms_ssim(c, d)).epsilon(1e-10));
}

TEST_CASE("ms-ssim range and scales") {
  CHECK(ms_ssim_scales(256, 256) == 5);
  CHECK(ms_ssim_scales(100, 100) == 4);
  CHECK(ms_ssim_scales(11, 300) == 1);
  Rng rng(4);
  for (int i = 0; i < 5; ++i) {
    const Image a = testsupport::random_image(32, 32, 1, rng);
    const Image b = make_image(32, 32, 1, [&](int x, int y, int) { return 1.0 - a.at(x, y, 0); });
    const double v = ms_ssim(a, b);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  const Image tiny = testsupport::random_image(6, 4, 1, rng);
  CHECK(ms_ssim(tiny, tiny) == 1.0);
  const double small = ms_ssim(tiny, testsupport::random_image(6, 4, 1, rng));
  CHECK(small >= 0.0);
  CHECK(small < 1.0);
  CHECK_THROWS_AS(ms_ssim(Image::filled(1, 5, 1, 0.0), Image::filled(1, 5, 1, 0.0)), MetricError);
}

TEST_CASE("polarity-aware comparison") {
  const MetricRegistry reg;
  const auto& p = reg.get("psnr");
  const auto& mse = reg.get("mse");
  CHECK(is_better(p, {"psnr", 30.0}, {"psnr", 20.0}));
  CHECK_FALSE(is_better(p, {"psnr", 20.0}, {"psnr", 20.0}));
  CHECK(is_better(p, {"psnr", std::numeric_limits<double>::infinity()}, {"psnr", 99.0}));
  CHECK_FALSE(is_better(p, {"psnr", std::nan("")}, {"psnr", 1.0}));
  CHECK(is_better(mse, {"mse", 1.0}, {"mse", 2.0}));
  CHECK_FALSE(is_better(mse, {"mse", 2.0}, {"mse", 2.0}));
  CHECK_THROWS_AS(is_better(p, {"psnr", 1.0}, {"mse", 2.0}), MetricError);
}

TEST_CASE("metric registry") {
  MetricRegistry reg;
  for (const char* id : {"psnr", "ms-ssim", "mse", "mae", "rmse", "snr"}) {
    CHECK(reg.contains(id));
    CHECK(is_builtin_metric(id));
  }
  CHECK(reg.get("mse").polarity == Polarity::lower_is_better);
  CHECK(reg.get("ms-ssim").display_name() == "MS-SSIM");
  CHECK_THROWS(reg.add({"psnr", "", Polarity::higher_is_better, ExternalCommand{"echo 1"}}));
  CHECK_THROWS(reg.add({"nocmd", "", Polarity::higher_is_better, std::nullopt}));
  reg.add(external("pie", "echo 1", Polarity::lower_is_better));
  const auto sel = reg.select("pie, psnr");
  REQUIRE(sel.size() == 2);
  CHECK(sel[0].id == "pie");
  CHECK(sel[1].id == "psnr");
  CHECK_THROWS(reg.select("psnr,bogus"));
  CHECK(parse_polarity("lower") == Polarity::lower_is_better);
  CHECK(std::string(to_string(Polarity::higher_is_better)) == "higher");
  CHECK_THROWS(parse_polarity("sideways"));
}

TEST_CASE("external scorer protocol") {
  TempDir dir;
  const Image img = Image::filled(4, 4, 1, 0.5);
  save_image(img, dir / "ref image.png");
  save_image(img, dir / "test.png");
  const auto ref = dir / "ref image.png", test = dir / "test.png";
  testsupport::write_script(dir.path(), "ok.sh", "test -f \"$1\" && test -f \"$2\" || exit 9\necho noise\necho '  0.75  '\n");
  testsupport::write_script(dir.path(), "fail.sh", "echo oops >&2\nexit 3\n");
  testsupport::write_script(dir.path(), "nan.sh", "echo nan\n");
  testsupport::write_script(dir.path(), "word.sh", "echo 1.5x\n");
  testsupport::write_script(dir.path(), "inf.sh", "echo inf\n");
  testsupport::write_script(dir.path(), "slow.sh", "sleep 5\necho 1\n");
  const std::string d = dir.path().string();

  CHECK(external_metric(external("ok", d + "/ok.sh {ref} {test}"), ref, test).value == 0.75);
  CHECK(external_metric(external("inf", d + "/inf.sh"), ref, test).is_infinite());
  try {
    external_metric(external("fail", d + "/fail.sh {ref} {test}"), ref, test);
    FAIL("expected failure");
  } catch (const ExternalMetricError& e) {
    CHECK(e.kind() == ExternalMetricError::Kind::nonzero_exit);
    CHECK(e.exit_code() == 3);
    CHECK(e.command().find("fail.sh") != std::string::npos);
  }
  for (const char* script : {"nan.sh", "word.sh"}) {
    try {
      external_metric(external("bad", d + "/" + script), ref, test);
      FAIL("expected failure");
    } catch (const ExternalMetricError& e) {
      CHECK(e.kind() == ExternalMetricError::Kind::unparsable_output);
    }
  }
  const auto start = std::chrono::steady_clock::now();
  try {
    external_metric(external("slow", d + "/slow.sh", Polarity::higher_is_better, std::chrono::milliseconds(200)),
                    ref, test);
    FAIL("expected timeout");
  } catch (const ExternalMetricError& e) {
    CHECK(e.kind() == ExternalMetricError::Kind::timeout);
  }
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(3));
  CHECK_THROWS_AS(external_metric(MetricRegistry().get("psnr"), ref, test), MetricError);
}

TEST_CASE("evaluate_metric materializes images for external scorers") {
  TempDir dir;
  const MetricRegistry reg;
  EvalImage ref{Image::filled(8, 8, 3, 1.0), {}}, test{Image::filled(8, 8, 3, 128.0 / 255.0), {}};
  CHECK(evaluate_metric(reg.get("psnr"), ref, test).value == doctest::Approx(psnr(ref.image, test.image)));
  testsupport::write_script(dir.path(), "size.sh", "wc -c < \"$2\"\n");
  const auto m = external("size", (dir / "size.sh").string() + " {ref} {test}");
  CHECK_THROWS_AS(evaluate_metric(m, ref, test), MetricError);
  materialize(ref, dir.path(), "ref");
  materialize(test, dir.path(), "test");
  CHECK(ref.path == dir / "ref.png");
  CHECK(load_image(test.path) == test.image);
  CHECK(evaluate_metric(m, ref, test).value == static_cast<double>(std::filesystem::file_size(test.path)));
}

TEST_CASE("gate report equals a per-triple recount") {
  const auto triples = synthetic_triples(6);
  const MetricRegistry reg;
  const std::vector<MetricDescriptor> metrics{reg.get("psnr"), reg.get("ms-ssim"), reg.get("mse")};
  for (int jobs : {1, 3}) {
    const GateReport report = gate_metrics(triples, metrics, {jobs, 2});
    CHECK(report.corpus == 6);
    const auto brute_psnr = testsupport::brute_gate(triples, [](const Image& a, const Image& b) { return psnr(a, b); }, true);
    const auto brute_ssim = testsupport::brute_gate(triples, [](const Image& a, const Image& b) { return ms_ssim(a, b); }, true);
    const auto brute_mse = testsupport::brute_gate(
        triples, [](const Image& a, const Image& b) { return pixel_stats(a, b).mse; }, false);
    for (auto [id, brute] : {std::pair{"psnr", brute_psnr}, {"ms-ssim", brute_ssim}, {"mse", brute_mse}}) {
      const GateRow& row = report.row(id);
      CHECK(row.scored == brute.scored);
      CHECK(row.failed == 0);
      CHECK(row.raw_error == 100.0 * brute.raw / brute.scored);
      CHECK(row.white_error == 100.0 * brute.white / brute.scored);
      CHECK(row.total == row.raw_error + row.white_error);
    }
    CHECK(report.row("psnr").raw_error == 0.0);
  }
  CHECK_THROWS_AS(gate_metrics({}, metrics), std::invalid_argument);
}

TEST_CASE("gate with external scorers and failures") {
  TempDir dir;
  auto triples = synthetic_triples(4);
  for (auto& t : triples) {
    materialize(t.reference, dir.path(), t.id + "_reference");
    materialize(t.raw, dir.path(), t.id + "_raw");
    materialize(t.enhanced, dir.path(), t.id + "_enhanced");
    materialize(t.white, dir.path(), t.id + "_white");
  }
  testsupport::write_script(dir.path(), "good.sh",
                            "case \"$2\" in *_raw*) echo 2;; *_enhanced*) echo 5;; *_white*) echo 1;; esac\n");
  testsupport::write_script(dir.path(), "fooled.sh",
                            "case \"$2\" in *_raw*) echo 2;; *_enhanced*) echo 5;; *_white*) echo 1;; esac\n");
  testsupport::write_script(dir.path(), "flaky.sh",
                            "case \"$2\" in *t0_*) exit 4;; *_raw*) echo 2;; *_enhanced*) echo 5;; *_white*) echo 9;; esac\n");
  const std::string d = dir.path().string();
  const std::vector<MetricDescriptor> metrics{
      external("good", d + "/good.sh {ref} {test}"),
      external("fooled", d + "/fooled.sh {ref} {test}", Polarity::lower_is_better),
      external("flaky", d + "/flaky.sh {ref} {test}")};
  const GateReport report = gate_metrics(triples, metrics, {2, 2});
  CHECK(report.row("good").raw_error == 0.0);
  CHECK(report.row("good").white_error == 0.0);
  CHECK(report.row("fooled").raw_error == 100.0);
  CHECK(report.row("fooled").white_error == 100.0);
  const GateRow& flaky = report.row("flaky");
  CHECK(flaky.failed == 1);
  CHECK(flaky.scored == 3);
  CHECK(flaky.white_error == 100.0);
  REQUIRE(flaky.failures.size() == 1);
  CHECK(flaky.failures[0].rfind("t0: ", 0) == 0);

  const std::string table = render_gate_table(report, metrics);
  CHECK(table.find("Raw error") != std::string::npos);
  CHECK(table.find("200.0") != std::string::npos);
  const std::string records = render_gate_records(report);
  CHECK(records.find("\"type\":\"gate\"") < records.find("\n"));
}

TEST_CASE("ranking orders by total, then raw error, then id") {
  GateReport report;
  report.rows = {{"psnr", 28.8, 0.0, 28.8, 1, 0, {}},
                 {"pie", 0.5, 0.0, 0.5, 1, 0, {}},
                 {"ms-ssim", 3.5, 0.0, 3.5, 1, 0, {}},
                 {"wadiqam", 3.0, 0.0, 3.0, 1, 0, {}}};
  CHECK(rank_metrics(report) == std::vector<std::string>{"pie", "wadiqam", "ms-ssim", "psnr"});
  report.rows = {{"b", 1.0, 1.0, 2.0, 1, 0, {}}, {"a", 2.0, 0.0, 2.0, 1, 0, {}}, {"c", 1.0, 1.0, 2.0, 1, 0, {}}};
  CHECK(rank_metrics(report) == std::vector<std::string>{"b", "c", "a"});
  CHECK_THROWS(rank_metrics(GateReport{}));
}
