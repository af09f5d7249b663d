// Apache License, Version 2.0, refer to LICENSE.txt

#include <catch_amalgamated.hpp>

#include <madpfi/corpus.hpp>
#include <madpfi/diversity.hpp>
#include <madpfi/lmm.hpp>
#include <madpfi/planted_fixture.hpp>
#include <madpfi/pipeline.hpp>
#include <madpfi/stats.hpp>
#include <madpfi/synthetic.hpp>

#include "oracle_helpers.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using namespace madpfi;

namespace {

// Scratch directories live under the build tree, not /tmp: the large fixture
// round trip writes ~300 MB and /tmp may be a small tmpfs.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::current_path() /
           ("madpfi_synth_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

SynthParams small_params(std::uint64_t seed) {
  SynthParams p;
  p.countries = 6;
  p.days = 10;
  p.topics_per_day = 12;
  p.topic_pool_size = 40;
  p.reuse_probability = 0.4;
  p.comentions_per_topic = 2;
  p.coupling = -5.0;
  p.noise_sd = 2.0;
  p.seed = seed;
  return p;
}

std::string corpus_digest(const Corpus& corpus) {
  std::string out;
  for (const auto& [code, days] : corpus.snapshots())
    for (const auto& [date, snap] : days) serialize_snapshot_record(snap, out);
  return out;
}

int run_cli(const std::string& args, std::string& output,
            const fs::path& capture) {
  const std::string cmd =
      std::string(MADPFI_BIN) + " " + args + " > " +
      capture.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  output = read_file(capture);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("corpus generator is deterministic and validates parameters") {
  const SynthParams p = small_params(99);
  const Corpus a = gen_corpus(p);
  const Corpus b = gen_corpus(p);
  CHECK(a.country_count() == 6);
  CHECK(a.day_count() == 10);
  CHECK(corpus_digest(a) == corpus_digest(b));

  SynthParams other = p;
  other.seed = 100;
  CHECK(corpus_digest(gen_corpus(other)) != corpus_digest(a));

  // Countries are the first N ISO codes in sorted order.
  const auto& codes = iso_country_codes();
  std::size_t i = 0;
  for (const auto& [code, days] : a.snapshots()) {
    CHECK(code == codes[i]);
    CHECK(days.size() == 10);
    for (const auto& [date, snap] : days) {
      CHECK(snap.mentions.size() == 12);
      for (std::size_t r = 0; r < snap.mentions.size(); ++r)
        CHECK(snap.mentions[r].rank == static_cast<int>(r) + 1);
    }
    ++i;
  }

  auto reject = [](auto mutate) {
    SynthParams bad = small_params(1);
    mutate(bad);
    CHECK_THROWS_AS(gen_corpus(bad), ValidationError);
  };
  reject([](SynthParams& q) { q.countries = 0; });
  reject([](SynthParams& q) { q.countries = 500; });
  reject([](SynthParams& q) { q.days = 0; });
  reject([](SynthParams& q) { q.topics_per_day = 0; });
  reject([](SynthParams& q) { q.topics_per_day = 101; });
  reject([](SynthParams& q) { q.topic_pool_size = q.topics_per_day - 1; });
  reject([](SynthParams& q) { q.reuse_probability = -0.1; });
  reject([](SynthParams& q) { q.reuse_probability = 1.1; });
  reject([](SynthParams& q) { q.comentions_per_topic = -1; });
}

TEST_CASE("indicator generator couples press freedom to diversity") {
  SynthParams p = small_params(7);
  p.countries = 12;
  p.days = 20;
  const Corpus corpus = gen_corpus(p);

  // Noiseless generation is purely linear in the centered log-diversity
  // driver, so doubling the coupling doubles every deviation from 50.
  const auto zero = gen_indicators(corpus, 0.0, 0.0, 11);
  const auto one = gen_indicators(corpus, -2.0, 0.0, 11);
  const auto two = gen_indicators(corpus, -4.0, 0.0, 11);
  REQUIRE(zero.size() == 12);
  REQUIRE(one.size() == 12);
  std::vector<std::string> codes_in_corpus;
  for (const auto& [code, days] : corpus.snapshots())
    codes_in_corpus.push_back(code);
  for (std::size_t i = 0; i < zero.size(); ++i) {
    REQUIRE(zero[i].pfi.has_value());
    CHECK(*zero[i].pfi == Catch::Approx(50.0).margin(1e-12));
    REQUIRE(one[i].pfi.has_value());
    REQUIRE(two[i].pfi.has_value());
    CHECK(*two[i].pfi - 50.0 ==
          Catch::Approx(2.0 * (*one[i].pfi - 50.0)).margin(1e-9));
    // Auxiliary indicators depend on the seed only, not on the coupling.
    CHECK(zero[i].cellular_per_100 == one[i].cellular_per_100);
    CHECK(zero[i].gdp_per_capita == one[i].gdp_per_capita);
    CHECK(zero[i].country == codes_in_corpus.at(i));
    REQUIRE(zero[i].cellular_per_100.has_value());
    CHECK(*zero[i].cellular_per_100 >= 20.0);
    CHECK(*zero[i].cellular_per_100 <= 130.0);
    REQUIRE(zero[i].gdp_per_capita.has_value());
    CHECK(*zero[i].gdp_per_capita > 0.0);
    REQUIRE(zero[i].unemployment_pct.has_value());
    CHECK(*zero[i].unemployment_pct >= 2.0);
    CHECK(*zero[i].unemployment_pct <= 25.0);
  }

  const auto again = gen_indicators(corpus, -2.0, 0.0, 11);
  for (std::size_t i = 0; i < one.size(); ++i)
    CHECK(*again[i].pfi == *one[i].pfi);

  // Noisy rows stay above the clamp floor.
  const auto noisy = gen_indicators(corpus, -5.0, 40.0, 3);
  for (const auto& row : noisy) CHECK(*row.pfi >= 0.01);

  CHECK_THROWS_AS(gen_indicators(corpus, 1.0, -1.0, 0), ValidationError);
  CHECK_THROWS_AS(gen_indicators(Corpus{}, 1.0, 1.0, 0), ValidationError);
}

// The planted benchmark corpus is large, so this case avoids SECTIONs (each
// section would rebuild the fixture) and verifies everything in one pass.
TEST_CASE("planted benchmark fixture matches its recorded shape") {
  const PlantedFixture fix = make_planted_fixture();

  CHECK(fix.seed == kPlantedFixtureSeed);
  CHECK(fix.corpus.country_count() == 196);
  const auto& observed = fix.corpus.observed_dates();
  REQUIRE(observed.size() == 211);
  const auto range = fix.corpus.date_range();
  CHECK(range.first == Date{2016, 3, 7});
  CHECK(range.last == Date{2016, 10, 9});
  CHECK(range.calendar_days() == 217);

  // Survival pins and monotone nesting of the elimination cohorts.
  std::vector<int> all_ks(100);
  for (int k = 1; k <= 100; ++k) all_ks[static_cast<std::size_t>(k - 1)] = k;
  const auto curve_rows = survival_curve(fix.corpus, all_ks);
  const std::map<int, std::size_t> curve(curve_rows.begin(),
                                         curve_rows.end());
  CHECK(curve.at(1) == 196);
  CHECK(curve.at(10) == 129);
  CHECK(curve.at(50) == 103);
  CHECK(curve.at(90) == 88);
  CHECK(curve.at(100) == 0);
  for (int k = 2; k <= 100; ++k)
    CHECK(curve.at(k) <= curve.at(k - 1));

  const auto c10 = eligible_countries(fix.corpus, 10);
  const auto c50 = eligible_countries(fix.corpus, 50);
  const auto c90 = eligible_countries(fix.corpus, 90);
  const std::set<std::string> s10(c10.begin(), c10.end());
  const std::set<std::string> s50(c50.begin(), c50.end());
  const std::set<std::string> s90(c90.begin(), c90.end());
  for (const auto& c : c90) CHECK(s50.count(c) == 1);
  for (const auto& c : c50) CHECK(s10.count(c) == 1);

  // Planted full-period unions must equal the measured ones exactly.
  const DateInterval full = range;
  std::map<std::string, long> u10, u50, u90;
  {
    const auto d10 = build_topk_dataset(fix.corpus, 10);
    for (const auto& c : d10.countries())
      u10[c] = static_cast<long>(topic_diversity(d10, c, full));
    const auto d50 = build_topk_dataset(fix.corpus, 50);
    for (const auto& c : d50.countries())
      u50[c] = static_cast<long>(topic_diversity(d50, c, full));
    const auto d90 = build_topk_dataset(fix.corpus, 90);
    for (const auto& c : d90.countries())
      u90[c] = static_cast<long>(topic_diversity(d90, c, full));
  }
  CHECK(u10 == fix.planted_u10);
  CHECK(u50 == fix.planted_u50);
  CHECK(u90 == fix.planted_u90);

  // Documented extremes of the planted layout.
  CHECK(u90.at("LU") == 4012);
  CHECK(u90.at("EG") == 959);
  for (const auto& [code, v] : u90) {
    CHECK(v <= 4012L);
    CHECK(v >= 959L);
  }
  const std::vector<std::pair<std::string, long>> bottom = {
      {"YE", 86}, {"IQ", 107}, {"SA", 120}, {"EG", 124}, {"AE", 126}};
  for (const auto& [code, v] : bottom) CHECK(u10.at(code) == v);
  for (const auto& [code, v] : u10) {
    bool is_bottom = false;
    for (const auto& [bc, bv] : bottom) is_bottom = is_bottom || bc == code;
    if (!is_bottom) CHECK(v > 126L);
  }

  // Planted pair-level diversity; Yemen is pinned and is the k=10 minimum.
  CHECK(fix.planted_subtopic_u10.at("YE") == 795);
  {
    const auto d10 = build_topk_dataset(fix.corpus, 10);
    for (const auto& [code, v] : fix.planted_subtopic_u10) {
      CHECK(static_cast<long long>(
                subtopic_diversity(d10, code, 3, full)) == v);
      if (code != "YE") CHECK(v > 795LL);
    }
  }

  // Countries with withheld indicator rows all survive the deepest filter.
  REQUIRE(fix.pfi_missing.size() == 8);
  std::map<std::string, const CountryIndicators*> by_code;
  for (const auto& row : fix.indicators) by_code[row.country] = &row;
  CHECK(fix.indicators.size() == 196);
  for (const auto& code : fix.pfi_missing) {
    CHECK(s90.count(code) == 1);
    REQUIRE(by_code.count(code) == 1);
    CHECK_FALSE(by_code.at(code)->pfi.has_value());
  }

  // Recorded correlations reproduce from the corpus and indicators alone.
  auto corr_at = [&](const std::map<std::string, long>& u) {
    std::vector<double> xs, ys;
    for (const auto& [code, v] : u) {
      const auto* row = by_code.at(code);
      if (!row->pfi.has_value()) continue;
      xs.push_back(std::log(static_cast<double>(v)));
      ys.push_back(*row->pfi);
    }
    return std::pair(pearson_r(xs, ys), xs.size());
  };
  const auto [r90, n90] = corr_at(u90);
  const auto [r50, n50] = corr_at(u50);
  const auto [r10, n10] = corr_at(u10);
  CHECK(n90 == 80);
  CHECK(n50 == 95);
  CHECK(n10 == 121);
  CHECK(r90 == Catch::Approx(fix.r90).margin(1e-12));
  CHECK(r50 == Catch::Approx(fix.r50).margin(1e-12));
  CHECK(r10 == Catch::Approx(fix.r10).margin(1e-12));
  CHECK(std::abs(fix.r90 - (-0.599)) <= 0.02);
  CHECK(std::abs(fix.r50 - (-0.529)) <= 0.02);
  CHECK(std::abs(fix.r10 - (-0.484)) <= 0.02);

  // Panel rows cover exactly 80 countries x 7 windows aligned with the
  // 30-observed-day window grid of the deep-filter dataset.
  CHECK(fix.panel_slope == Catch::Approx(-35.08));
  REQUIRE(fix.panel.size() == 560);
  const auto d90 = build_topk_dataset(fix.corpus, 90);
  const auto windows =
      make_windows(d90.dates(), WindowSpec::parse("monthly"));
  REQUIRE(windows.size() == 7);
  std::set<std::string> panel_countries;
  std::map<std::string, int> rows_per_country;
  for (const auto& row : fix.panel) {
    panel_countries.insert(row.country);
    rows_per_country[row.country] += 1;
    CHECK(s90.count(row.country) == 1);
    bool matched = false;
    for (const auto& w : windows)
      matched = matched ||
                (w.first == row.window_start && w.last == row.window_end);
    CHECK(matched);
    CHECK(row.pfi > 0.0);
  }
  CHECK(panel_countries.size() == 80);
  for (const auto& [code, n] : rows_per_country) CHECK(n == 7);
  for (const auto& code : fix.pfi_missing)
    CHECK(panel_countries.count(code) == 0);

  // The within-country slope planted into the panel is recoverable by the
  // mixed model at the advertised strength.
  {
    const auto table = diversity_table(d90, std::nullopt, windows);
    JoinStats stats{};
    std::vector<std::string> warnings;
    Frame frame = join_panel(table, fix.panel, fix.indicators, &warnings,
                             &stats);
    // The eight indicator-missing countries are all inside the deep cohort,
    // so their 56 country-window cells are reported as uncovered.
    REQUIRE(warnings.size() == 1);
    CHECK(warnings.front().find("56 country-window") != std::string::npos);
    CHECK(stats.matched == 560);
    LmmSpec spec = parse_formula(model_formula(1));
    spec.group = "country";
    spec.method = FitMethod::reml;
    const BuiltDesign built = build_design(frame, spec);
    const LmmFit fit = fit_lmm(built.design, built.y, spec.method);
    REQUIRE(fit.beta.size() == 2);
    CHECK(std::abs(fit.beta[1] - fix.panel_slope) < 2.0 * fit.se[1]);
    CHECK(fit.p_values[1] < 0.001);
    CHECK(fit.sigma_b2 > 0.0);
  }
}

TEST_CASE("planted benchmark fixture is reproducible across builds") {
  std::map<std::string, long> u10, u90;
  std::map<std::string, long long> sub10;
  double r90 = 0, r50 = 0, r10 = 0;
  std::string eg_head, panel_head;
  {
    const PlantedFixture a = make_planted_fixture();
    u10 = a.planted_u10;
    u90 = a.planted_u90;
    sub10 = a.planted_subtopic_u10;
    r90 = a.r90;
    r50 = a.r50;
    r10 = a.r10;
    eg_head = serialize_snapshot_record(
        *a.corpus.at("EG", a.corpus.observed_dates().front()));
    panel_head = a.panel.front().country + "," +
                 a.panel.front().window_start.to_string() + "," +
                 std::to_string(a.panel.front().pfi);
  }
  // First fixture is destroyed before the second build to bound memory.
  const PlantedFixture b = make_planted_fixture();
  CHECK(b.planted_u10 == u10);
  CHECK(b.planted_u90 == u90);
  CHECK(b.planted_subtopic_u10 == sub10);
  CHECK(b.r90 == r90);
  CHECK(b.r50 == r50);
  CHECK(b.r10 == r10);
  CHECK(serialize_snapshot_record(
            *b.corpus.at("EG", b.corpus.observed_dates().front())) ==
        eg_head);
  CHECK(b.panel.front().country + "," +
            b.panel.front().window_start.to_string() + "," +
            std::to_string(b.panel.front().pfi) ==
        panel_head);
}

TEST_CASE("planted benchmark fixture round trips through files") {
  TempDir dir("fixture");
  long lu_u90 = 0;
  std::size_t indicator_rows = 0, panel_rows = 0;
  std::optional<double> first_pfi;
  {
    const PlantedFixture fix = make_planted_fixture();
    write_planted_fixture(fix, dir.path);
    lu_u90 = fix.planted_u90.at("LU");
    indicator_rows = fix.indicators.size();
    panel_rows = fix.panel.size();
    first_pfi = fix.indicators.front().pfi;
  }

  CHECK(fs::exists(dir.path / "snapshots" / "LU.jsonl"));
  CHECK(fs::exists(dir.path / "snapshots" / "YE.jsonl"));
  CHECK(fs::exists(dir.path / "indicators.csv"));
  CHECK(fs::exists(dir.path / "indicators_panel.csv"));

  const auto manifest =
      nlohmann::json::parse(read_file(dir.path / "FIXTURE.json"));
  CHECK(manifest.at("label").get<std::string>().find("synthetic") !=
        std::string::npos);
  CHECK(manifest.at("countries").get<int>() == 196);
  CHECK(manifest.at("observed_days").get<int>() == 211);
  CHECK(manifest.at("seed").get<std::uint64_t>() == kPlantedFixtureSeed);
  CHECK(manifest.at("pfi_missing").size() == 8);

  // Reload a single country file and confirm the serialized mentions
  // reproduce the planted deep-filter union.
  LoadStats stats{};
  const Corpus lu = load_corpus(dir.path / "snapshots" / "LU.jsonl", &stats);
  CHECK(stats.files == 1);
  CHECK(stats.records == 211);
  CHECK(lu.country_count() == 1);
  const auto d90 = build_topk_dataset(lu, 90);
  REQUIRE(d90.contains("LU"));
  CHECK(static_cast<long>(topic_diversity(d90, "LU", lu.date_range())) ==
        lu_u90);
  CHECK(static_cast<long>(oracle::brute_topic_union(
            lu, "LU", 90, lu.date_range())) == lu_u90);

  const auto indicators = read_indicators(dir.path / "indicators.csv");
  REQUIRE(indicators.size() == indicator_rows);
  if (first_pfi.has_value()) {
    REQUIRE(indicators.front().pfi.has_value());
    CHECK(*indicators.front().pfi == Catch::Approx(*first_pfi).margin(1e-9));
  } else {
    CHECK_FALSE(indicators.front().pfi.has_value());
  }
  const auto panel = read_panel_pfi(dir.path / "indicators_panel.csv");
  CHECK(panel.size() == panel_rows);
  CHECK(panel.front().window_start < panel.front().window_end);
}

TEST_CASE("report pipeline writes a complete bundle deterministically") {
  // The pool is far larger than the draws so full-period unions vary by
  // country instead of saturating at the pool size.
  SynthParams p;
  p.countries = 25;
  p.days = 20;
  p.topics_per_day = 12;
  p.topic_pool_size = 300;
  p.reuse_probability = 0.55;
  p.comentions_per_topic = 2;
  p.seed = 424242;
  const Corpus corpus = gen_corpus(p);
  // Unions spread only a few percent across countries, so the coupling is
  // strong relative to the noise to keep every sweep depth clearly negative.
  const auto indicators = gen_indicators(corpus, -60.0, 2.0, 515151);

  ReportOptions opts;
  opts.table_ks = {5, 10};
  opts.sweep_ks = {5, 8, 10};
  opts.subtopic_k = 5;
  opts.subtopic_l = 3;
  opts.model_k = 10;

  TempDir out_a("report_a");
  TempDir out_b("report_b");
  const ReportResult res = run_report(corpus, indicators, {}, out_a.path,
                                      opts);
  INFO("failures: " << (res.failures.empty() ? "" : res.failures.front()));
  CHECK(res.ok());
  CHECK(res.failures.empty());

  const std::vector<std::string> expected = {
      "survival.csv",         "diversity_k5.csv",
      "diversity_k10.csv",    "subtopic_diversity_k5_l3.csv",
      "correlation_sweep.csv", "scatter_k10.csv",
      "scatter_k10.svg",      "models.txt",
      "models.json",          "MANIFEST.json"};
  for (const auto& name : expected) {
    INFO(name);
    CHECK(fs::exists(out_a.path / name));
  }
  for (const auto& name : res.outputs)
    CHECK(fs::exists(out_a.path / name));

  // Sweep covers the requested depths with negative planted correlation.
  REQUIRE(res.sweep.results.size() == 3);
  for (const auto& row : res.sweep.results) {
    CHECK((row.k == 5 || row.k == 8 || row.k == 10));
    CHECK(row.r < 0.0);
    CHECK(row.n == 25);
  }

  // Three preset models, all fitted.
  REQUIRE(res.models.size() == 3);
  for (const auto& m : res.models) {
    CHECK(m.fit.n > 0);
    CHECK(m.group == "region");
  }
  CHECK(res.models[0].formula == model_formula(1));

  const auto manifest =
      nlohmann::json::parse(read_file(out_a.path / "MANIFEST.json"));
  CHECK(manifest.at("countries").get<int>() == 25);
  CHECK(manifest.at("observed_days").get<int>() == 20);
  // The manifest lists every artifact written before itself.
  CHECK(manifest.at("outputs").size() == res.outputs.size() - 1);
  CHECK(manifest.at("failures").empty());

  // Byte-identical rerun: no timestamps or nondeterminism in any artifact.
  const ReportResult res2 = run_report(corpus, indicators, {}, out_b.path,
                                       opts);
  CHECK(res2.ok());
  REQUIRE(res2.outputs == res.outputs);
  for (const auto& name : res.outputs) {
    INFO(name);
    CHECK(read_file(out_a.path / name) == read_file(out_b.path / name));
  }
}

TEST_CASE("report pipeline records model failures and still writes data") {
  SynthParams p;
  p.countries = 2;
  p.days = 8;
  p.topics_per_day = 12;
  p.topic_pool_size = 40;
  p.comentions_per_topic = 2;
  p.seed = 5;
  const Corpus corpus = gen_corpus(p);
  const auto indicators = gen_indicators(corpus, -5.0, 1.0, 6);

  ReportOptions opts;
  opts.table_ks = {5};
  opts.sweep_ks = {5};
  opts.subtopic_k = 5;
  opts.model_k = 5;

  TempDir out("report_fail");
  const ReportResult res = run_report(corpus, indicators, {}, out.path, opts);
  CHECK_FALSE(res.ok());
  // Two countries cannot support any preset model or a four-country sweep,
  // but the diversity artifacts and manifest must still appear.
  REQUIRE_FALSE(res.failures.empty());
  bool model_failure = false;
  for (const auto& f : res.failures)
    model_failure = model_failure || f.rfind("Model", 0) == 0;
  CHECK(model_failure);
  CHECK(fs::exists(out.path / "survival.csv"));
  CHECK(fs::exists(out.path / "diversity_k5.csv"));
  CHECK(fs::exists(out.path / "MANIFEST.json"));
  CHECK_FALSE(fs::exists(out.path / "models.txt"));
  const auto manifest =
      nlohmann::json::parse(read_file(out.path / "MANIFEST.json"));
  CHECK_FALSE(manifest.at("failures").empty());
}

TEST_CASE("command line round trip over a generated corpus") {
  TempDir dir("cli");
  const fs::path data = dir.path / "data";
  const fs::path capture = dir.path / "cli_output.txt";
  std::string out;

  SECTION("help and argument errors") {
    CHECK(run_cli("--help", out, capture) == 0);
    CHECK(out.find("madpfi") != std::string::npos);
    CHECK(run_cli("", out, capture) == 2);
    CHECK(run_cli("correlate", out, capture) == 2);
    CHECK(run_cli("definitely-not-a-command", out, capture) == 2);
  }

  SECTION("synth, ingest, filter, diversity, correlate, fit, report") {
    REQUIRE(run_cli("synth --preset minimal --out " + data.string() +
                        " --seed 11",
                    out, capture) == 0);
    REQUIRE(fs::exists(data / "indicators.csv"));
    const fs::path snaps = data / "snapshots";
    REQUIRE(fs::exists(snaps));
    std::size_t jsonl = 0;
    for (const auto& e : fs::directory_iterator(snaps))
      jsonl += e.path().extension() == ".jsonl" ? 1 : 0;
    CHECK(jsonl == 2);

    const fs::path mirror = dir.path / "mirror";
    CHECK(run_cli("ingest --input " + snaps.string() + " --out " +
                      mirror.string(),
                  out, capture) == 0);
    CHECK(out.find("countries: 2") != std::string::npos);
    CHECK(fs::exists(mirror));

    CHECK(run_cli("filter --snapshots " + snaps.string() +
                      " --survival 1,5,12,13",
                  out, capture) == 0);
    CHECK(out.find("13") != std::string::npos);

    const fs::path div_csv = dir.path / "div.csv";
    CHECK(run_cli("diversity --snapshots " + snaps.string() +
                      " --k 5 --window full --out " + div_csv.string(),
                  out, capture) == 0);
    REQUIRE(fs::exists(div_csv));
    const std::string div = read_file(div_csv);
    CHECK(div.find("country") != std::string::npos);

    // correlate needs indicators; withholding them is a usage error.
    CHECK(run_cli("correlate --snapshots " + snaps.string() + " --ks 5",
                  out, capture) == 2);

    // Two countries cannot reach the four-country sweep floor, and every
    // preset model fails, so report exits with the computation code but
    // still materializes the data artifacts.
    const fs::path report = dir.path / "report";
    CHECK(run_cli("report --snapshots " + snaps.string() + " --indicators " +
                      (data / "indicators.csv").string() + " --k 5 --ks 5" +
                      " --out " + report.string(),
                  out, capture) == 3);
    CHECK(fs::exists(report / "survival.csv"));
    CHECK(fs::exists(report / "MANIFEST.json"));
  }

  SECTION("config file fills unset arguments") {
    REQUIRE(run_cli("synth --preset minimal --out " + data.string() +
                        " --seed 11",
                    out, capture) == 0);
    const fs::path cfg = dir.path / "madpfi.cfg";
    {
      std::ofstream f(cfg);
      f << "# defaults for smoke test\n";
      f << "snapshots = " << (data / "snapshots").string() << "\n";
      f << "k = 5\n";
    }
    const fs::path div_csv = dir.path / "div_cfg.csv";
    CHECK(run_cli("--config " + cfg.string() + " diversity --window full" +
                      " --out " + div_csv.string(),
                  out, capture) == 0);
    CHECK(fs::exists(div_csv));

    const fs::path bad = dir.path / "bad.cfg";
    {
      std::ofstream f(bad);
      f << "snapshots\n";
    }
    CHECK(run_cli("--config " + bad.string() + " diversity --k 5", out,
                  capture) == 2);
  }

  SECTION("missing snapshot directory maps to the io exit code") {
    CHECK(run_cli("diversity --snapshots " +
                      (dir.path / "nope").string() + " --k 5",
                  out, capture) == 4);
  }
}
