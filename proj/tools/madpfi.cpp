// Apache License, Version 2.0, refer to LICENSE.txt
//
// madpfi: country-level media attention diversity pipeline.
//
//   ingest     fetch/validate snapshot files and summarize the corpus
//   filter     completeness elimination and the survival curve
//   diversity  set-union diversity per country and window
//   correlate  sweep of corr(log diversity, PFI) over k
//   fit        random-intercept linear mixed model
//   synth      deterministic synthetic corpora with planted structure
//   report     every analysis stage into an output directory

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "madpfi/corpus.hpp"
#include "madpfi/design.hpp"
#include "madpfi/diversity.hpp"
#include "madpfi/errors.hpp"
#include "madpfi/fetch.hpp"
#include "madpfi/filter.hpp"
#include "madpfi/indicators.hpp"
#include "madpfi/lmm.hpp"
#include "madpfi/planted_fixture.hpp"
#include "madpfi/pipeline.hpp"
#include "madpfi/stats.hpp"
#include "madpfi/synthetic.hpp"
#include "madpfi/text.hpp"

namespace {

using madpfi::ValidationError;

/// TOML-style flat config: `key = value` lines, `#` comments, optional
/// quotes around values. Only scalar keys are supported.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw madpfi::IoError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string_view sv = madpfi::trim(line);
    if (sv.empty()) continue;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw madpfi::ParseError(path, lineno, "expected key = value");
    std::string key(madpfi::trim(sv.substr(0, eq)));
    std::string value(madpfi::trim(sv.substr(eq + 1)));
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\'')))
      value = value.substr(1, value.size() - 2);
    if (key.empty())
      throw madpfi::ParseError(path, lineno, "empty config key");
    out[key] = value;
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string_view sv = madpfi::trim(item);
    if (sv.empty()) continue;
    int value = 0;
    for (char c : sv) {
      if (c < '0' || c > '9')
        throw ValidationError("bad integer list entry '" + std::string(sv) +
                              "'");
      value = value * 10 + (c - '0');
    }
    out.push_back(value);
  }
  if (out.empty()) throw ValidationError("empty integer list");
  return out;
}

/// Values shared by several subcommands, resolvable from the config file
/// when the flag was not given on the command line.
struct CommonArgs {
  std::string config;
  std::string snapshots;
  std::string indicators;
  std::string panel;
  std::string out;
  std::uint64_t seed = madpfi::kPlantedFixtureSeed;
  bool seed_given = false;
};

madpfi::Corpus load_snapshots_or_fail(const std::string& path,
                                      madpfi::LoadStats* stats = nullptr) {
  if (path.empty())
    throw ValidationError(
        "no snapshot path given (use --snapshots or config key 'snapshots')");
  return madpfi::load_corpus(path, stats);
}

std::ostream& open_output(std::ofstream& file, const std::string& out) {
  if (out.empty()) return std::cout;
  file.open(out);
  if (!file) throw madpfi::IoError("cannot write '" + out + "'");
  return file;
}

void print_fetch_summary(const madpfi::FetchSummary& s) {
  std::cout << "fetched " << s.fetched << ", skipped " << s.skipped
            << ", failed " << s.failed << "\n";
  for (const auto& f : s.failures) std::cout << "  failed: " << f << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{
      "madpfi: media attention diversity from daily ranked news topics"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonArgs common;
  app.add_option("--config", common.config,
                 "TOML-style key=value config file");
  app.add_option("--out", common.out, "output file or directory");
  auto* seed_opt =
      app.add_option("--seed", common.seed, "RNG seed for synthesis");

  // ingest ------------------------------------------------------------------
  auto* ingest = app.add_subcommand(
      "ingest", "fetch or validate snapshot files and summarize the corpus");
  std::string ingest_input;
  double rate_limit = 1.0;
  ingest->add_option("--input", ingest_input,
                     "snapshot directory or http(s) index URL");
  ingest->add_option("--rate-limit", rate_limit,
                     "min seconds between remote requests");

  // filter ------------------------------------------------------------------
  auto* filter = app.add_subcommand(
      "filter", "completeness elimination: |C^k| survival counts");
  int filter_k = 0;
  std::string survival_ks;
  auto* filter_k_opt =
      filter->add_option("--k", filter_k, "single completeness threshold");
  filter->add_option("--survival", survival_ks,
                     "comma-separated k list, e.g. 10,20,30");

  // diversity ---------------------------------------------------------------
  auto* diversity = app.add_subcommand(
      "diversity", "set-union diversity per country and window");
  int div_k = 90;
  int div_l = 0;
  std::string div_window = "full";
  diversity->add_option("--k", div_k, "completeness threshold (1..100)");
  diversity->add_option(
      "--l", div_l, "co-mentions per topic for the subtopic variant (0=off)");
  diversity->add_option("--window", div_window, "full|monthly|days:N");

  // correlate ---------------------------------------------------------------
  auto* correlate = app.add_subcommand(
      "correlate", "corr(log diversity, PFI) sweep over k");
  std::string corr_ks = "10,20,30,40,50,60,70,80,90,100";
  double corr_level = 0.95;
  int scatter_k = 90;
  correlate->add_option("--ks", corr_ks, "comma-separated k values");
  correlate->add_option("--level", corr_level, "confidence level (0,1)");
  correlate->add_option("--scatter-k", scatter_k,
                        "k for the scatter data file (with --out)");

  // fit ---------------------------------------------------------------------
  auto* fit = app.add_subcommand(
      "fit", "random-intercept linear mixed model on the joined table");
  std::string fit_model = "3";
  std::string fit_formula;
  std::string fit_group;
  std::string fit_method = "reml";
  std::string fit_window = "full";
  int fit_k = 90;
  fit->add_option("--model", fit_model, "1|2|3|custom");
  fit->add_option("--formula", fit_formula,
                  "model formula when --model custom, e.g. "
                  "\"pfi ~ log(u) + cellular\"");
  fit->add_option("--group", fit_group, "random-intercept column "
                                        "(country|region)");
  fit->add_option("--method", fit_method, "reml|ml");
  fit->add_option("--window", fit_window,
                  "full (cross-section) or monthly|days:N (panel)");
  fit->add_option("--k", fit_k, "completeness threshold (1..100)");

  // synth -------------------------------------------------------------------
  auto* synth = app.add_subcommand(
      "synth", "write a deterministic synthetic corpus and indicators");
  std::string preset = "minimal";
  synth->add_option("--preset", preset, "paper-shape|minimal");

  // report ------------------------------------------------------------------
  auto* report = app.add_subcommand(
      "report", "run every stage and write tables, plots and a manifest");
  std::string rep_window = "full";
  std::string rep_group;
  std::string rep_method = "reml";
  std::string rep_ks = "10,20,30,40,50,60,70,80,90,100";
  double rep_level = 0.95;
  int rep_k = 90;
  int rep_l = 3;
  report->add_option("--window", rep_window, "full|monthly|days:N");
  report->add_option("--group", rep_group,
                     "random-intercept column (country|region)");
  report->add_option("--method", rep_method, "reml|ml");
  report->add_option("--ks", rep_ks, "sweep k values");
  report->add_option("--level", rep_level, "confidence level (0,1)");
  report->add_option("--k", rep_k, "depth for scatter and models");
  report->add_option("--l", rep_l, "co-mentions for the subtopic table");

  // Data-source flags shared by the analysis subcommands.
  for (auto* cmd : {filter, diversity, correlate, fit, report}) {
    cmd->add_option("--snapshots", common.snapshots,
                    "snapshot directory (JSONL files)");
  }
  for (auto* cmd : {correlate, fit, report}) {
    cmd->add_option("--indicators", common.indicators,
                    "indicators CSV (country,pfi,...)");
  }
  for (auto* cmd : {fit, report}) {
    cmd->add_option("--panel", common.panel,
                    "per-window PFI CSV for panel mode");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(madpfi::ErrorKind::validation);
  }
  common.seed_given = seed_opt->count() > 0;

  // Config file values fill in whatever the command line left unset.
  if (!common.config.empty()) {
    const auto cfg = read_config(common.config);
    auto fill = [&](const char* key, std::string& slot) {
      const auto it = cfg.find(key);
      if (it != cfg.end() && slot.empty()) slot = it->second;
    };
    fill("snapshots", common.snapshots);
    fill("indicators", common.indicators);
    fill("panel", common.panel);
    fill("out", common.out);
    if (cfg.count("seed") && !common.seed_given) {
      common.seed = std::stoull(cfg.at("seed"));
      common.seed_given = true;
    }
  }

  if (ingest->parsed()) {
    if (ingest_input.empty())
      throw ValidationError("ingest needs --input");
    std::string corpus_path = ingest_input;
    if (!common.out.empty()) {
      madpfi::FetchOptions opts;
      opts.rate_limit_seconds = rate_limit;
      print_fetch_summary(
          madpfi::fetch_snapshots(ingest_input, common.out, opts));
      corpus_path = common.out;
    }
    madpfi::LoadStats stats;
    const madpfi::Corpus corpus = load_snapshots_or_fail(corpus_path, &stats);
    const madpfi::CorpusSummary summary = madpfi::corpus_summary(corpus);
    std::cout << "files: " << stats.files << "\n"
              << "records: " << stats.records << "\n"
              << "duplicates (last wins): " << stats.duplicates << "\n"
              << "countries: " << corpus.country_count() << "\n"
              << "observed dates: " << summary.distinct_dates << "\n";
    if (!corpus.empty()) {
      const auto range = corpus.date_range();
      std::cout << "date range: " << range.first.to_string() << ".."
                << range.last.to_string() << "\n";
    }
    for (const auto& code : stats.unknown_countries)
      std::cout << "warning: unknown country code '" << code << "'\n";
    return 0;
  }

  if (filter->parsed()) {
    const madpfi::Corpus corpus = load_snapshots_or_fail(common.snapshots);
    std::vector<int> ks;
    if (!survival_ks.empty())
      ks = parse_int_list(survival_ks);
    else if (filter_k_opt->count() > 0)
      ks.push_back(filter_k);
    else
      throw ValidationError("filter needs --k or --survival");
    const auto curve = madpfi::survival_curve(corpus, ks);
    std::ofstream file;
    auto& os = open_output(file, common.out);
    os << "k,count\n";
    for (const auto& [k, count] : curve) os << k << ',' << count << '\n';
    return 0;
  }

  if (diversity->parsed()) {
    const madpfi::Corpus corpus = load_snapshots_or_fail(common.snapshots);
    const auto dataset = madpfi::build_topk_dataset(corpus, div_k);
    const auto windows = madpfi::make_windows(
        dataset.dates(), madpfi::WindowSpec::parse(div_window));
    const std::optional<int> l =
        div_l > 0 ? std::optional<int>(div_l) : std::nullopt;
    const auto records = madpfi::diversity_table(dataset, l, windows);
    std::ofstream file;
    auto& os = open_output(file, common.out);
    madpfi::csv_write_row(
        os, {"country", "k", "l", "window_start", "window_end", "u"});
    for (const auto& r : records)
      madpfi::csv_write_row(
          os, {r.country, std::to_string(r.k),
               r.l ? std::to_string(*r.l) : std::string(),
               r.window.first.to_string(), r.window.last.to_string(),
               std::to_string(r.value)});
    return 0;
  }

  if (correlate->parsed()) {
    const madpfi::Corpus corpus = load_snapshots_or_fail(common.snapshots);
    if (common.indicators.empty())
      throw ValidationError("correlate needs --indicators");
    const auto indicators = madpfi::read_indicators(common.indicators);
    const auto ks = parse_int_list(corr_ks);
    std::vector<madpfi::DiversityRecord> records;
    for (int k : ks) {
      const auto dataset = madpfi::build_topk_dataset(corpus, k);
      if (dataset.countries().empty()) continue;
      const auto windows = madpfi::make_windows(
          dataset.dates(),
          madpfi::WindowSpec{madpfi::WindowSpec::Mode::full, 0});
      const auto recs =
          madpfi::diversity_table(dataset, std::nullopt, windows);
      records.insert(records.end(), recs.begin(), recs.end());
    }
    const auto sweep =
        madpfi::correlation_sweep(records, indicators, ks, corr_level);
    for (const auto& w : sweep.warnings)
      std::cerr << "warning: " << w << "\n";

    const bool to_dir = !common.out.empty();
    std::ofstream file;
    if (to_dir) {
      std::filesystem::create_directories(common.out);
      file.open(std::filesystem::path(common.out) / "correlation_sweep.csv");
      if (!file) throw madpfi::IoError("cannot write correlation_sweep.csv");
    }
    std::ostream& os = to_dir ? file : std::cout;
    os << "k,r,ci_low,ci_high,n\n";
    char buf[160];
    for (const auto& row : sweep.results) {
      std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%ld\n", row.k,
                    row.r, row.ci_low, row.ci_high, row.n);
      os << buf;
    }
    if (to_dir) {
      std::map<std::string, double> pfi;
      for (const auto& row : indicators)
        if (row.pfi) pfi[row.country] = *row.pfi;
      std::ofstream sc(std::filesystem::path(common.out) /
                       ("scatter_k" + std::to_string(scatter_k) + ".csv"));
      if (!sc) throw madpfi::IoError("cannot write scatter CSV");
      sc << "country,log_u,pfi\n";
      for (const auto& rec : records) {
        if (rec.k != scatter_k || rec.value == 0) continue;
        const auto it = pfi.find(rec.country);
        if (it == pfi.end()) continue;
        std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g\n",
                      rec.country.c_str(),
                      std::log(static_cast<double>(rec.value)), it->second);
        sc << buf;
      }
    }
    return 0;
  }

  if (fit->parsed()) {
    const madpfi::Corpus corpus = load_snapshots_or_fail(common.snapshots);
    if (common.indicators.empty())
      throw ValidationError("fit needs --indicators");
    const auto indicators = madpfi::read_indicators(common.indicators);
    const auto window = madpfi::WindowSpec::parse(fit_window);
    const bool cross_section =
        window.mode == madpfi::WindowSpec::Mode::full;

    const auto dataset = madpfi::build_topk_dataset(corpus, fit_k);
    if (dataset.countries().empty())
      throw ValidationError("no countries survive k=" + std::to_string(fit_k));
    const auto windows = madpfi::make_windows(dataset.dates(), window);
    const auto records =
        madpfi::diversity_table(dataset, std::nullopt, windows);

    std::vector<std::string> warnings;
    madpfi::Frame frame;
    if (cross_section) {
      frame = madpfi::join_cross_section(records, indicators);
    } else {
      std::vector<madpfi::PanelPfiRow> panel;
      if (!common.panel.empty())
        panel = madpfi::read_panel_pfi(common.panel);
      frame = madpfi::join_panel(records, panel, indicators, &warnings);
    }
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    std::string formula;
    if (fit_model == "custom") {
      if (fit_formula.empty())
        throw ValidationError("--model custom needs --formula");
      formula = fit_formula;
    } else if (fit_model == "1" || fit_model == "2" || fit_model == "3") {
      formula = madpfi::model_formula(std::stoi(fit_model));
    } else {
      throw ValidationError("--model must be 1, 2, 3 or custom");
    }

    madpfi::LmmSpec spec = madpfi::parse_formula(formula);
    spec.method = madpfi::parse_fit_method(fit_method);
    spec.group = !fit_group.empty()
                     ? fit_group
                     : (cross_section ? std::string("region")
                                      : std::string("country"));
    const auto built = madpfi::build_design(frame, spec);
    madpfi::FittedModel fitted;
    fitted.name = fit_model == "custom" ? "custom" : "Model " + fit_model;
    fitted.formula = formula;
    fitted.group = spec.group;
    fitted.dropped_rows = built.dropped_rows;
    fitted.fit = madpfi::fit_lmm(built.design, built.y, spec.method);
    if (built.design.X.cols() - (built.design.intercept ? 1 : 0) >= 2) {
      const auto v = madpfi::vif(built.design);
      for (std::size_t i = 0; i < v.names.size(); ++i)
        fitted.vifs.emplace_back(v.names[i], v.values[i]);
    }

    std::cout << madpfi::format_model_table({fitted});
    if (!common.out.empty()) {
      std::filesystem::create_directories(common.out);
      std::ofstream txt(std::filesystem::path(common.out) / "fit.txt");
      txt << madpfi::format_model_table({fitted});
      std::ofstream js(std::filesystem::path(common.out) / "fit.json");
      js << madpfi::model_to_json(fitted).dump(2) << '\n';
    }
    return 0;
  }

  if (synth->parsed()) {
    if (common.out.empty()) throw ValidationError("synth needs --out");
    const std::filesystem::path out_dir(common.out);
    if (preset == "paper-shape") {
      const auto fixture = madpfi::make_planted_fixture(
          common.seed_given ? common.seed : madpfi::kPlantedFixtureSeed);
      madpfi::write_planted_fixture(fixture, out_dir);
      std::cout << "paper-shape fixture written to " << out_dir.string()
                << " (seed " << fixture.seed << ")\n";
    } else if (preset == "minimal") {
      madpfi::SynthParams params;
      params.countries = 2;
      params.days = 8;
      params.topics_per_day = 12;
      params.topic_pool_size = 40;
      params.reuse_probability = 0.5;
      params.comentions_per_topic = 2;
      params.coupling = -5.0;
      params.seed = common.seed_given ? common.seed : 1;
      const madpfi::Corpus corpus = madpfi::gen_corpus(params);
      const auto indicators = madpfi::gen_indicators(
          corpus, params.coupling, params.noise_sd, params.seed);
      std::filesystem::create_directories(out_dir / "snapshots");
      std::string buf;
      for (const auto& [code, days] : corpus.snapshots()) {
        buf.clear();
        for (const auto& [date, snap] : days) {
          madpfi::serialize_snapshot_record(snap, buf);
          buf += '\n';
        }
        std::ofstream out(out_dir / "snapshots" / (code + ".jsonl"),
                          std::ios::binary);
        if (!out) throw madpfi::IoError("cannot write snapshots");
        out << buf;
      }
      madpfi::write_indicators_file((out_dir / "indicators.csv").string(),
                                    indicators);
      std::cout << "minimal fixture written to " << out_dir.string()
                << " (seed " << params.seed << ")\n";
    } else {
      throw ValidationError("--preset must be paper-shape or minimal");
    }
    return 0;
  }

  if (report->parsed()) {
    if (common.out.empty()) throw ValidationError("report needs --out");
    const madpfi::Corpus corpus = load_snapshots_or_fail(common.snapshots);
    if (common.indicators.empty())
      throw ValidationError("report needs --indicators");
    const auto indicators = madpfi::read_indicators(common.indicators);
    std::vector<madpfi::PanelPfiRow> panel;
    if (!common.panel.empty())
      panel = madpfi::read_panel_pfi(common.panel);

    madpfi::ReportOptions opt;
    opt.sweep_ks = parse_int_list(rep_ks);
    opt.model_k = rep_k;
    opt.subtopic_l = rep_l;
    opt.level = rep_level;
    opt.window = madpfi::WindowSpec::parse(rep_window);
    opt.method = madpfi::parse_fit_method(rep_method);
    opt.group = rep_group;

    const auto result =
        madpfi::run_report(corpus, indicators, panel, common.out, opt);
    for (const auto& o : result.outputs)
      std::cout << "wrote " << o << "\n";
    for (const auto& w : result.warnings)
      std::cerr << "warning: " << w << "\n";
    for (const auto& f : result.failures)
      std::cerr << "failed: " << f << "\n";
    if (!result.ok())
      return static_cast<int>(madpfi::ErrorKind::computation);
    return 0;
  }

  throw ValidationError("no subcommand given");
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const madpfi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(madpfi::ErrorKind::computation);
  }
}
