// Apache License, Version 2.0, refer to LICENSE.txt
//
// End-to-end report assembly: survival curve, diversity tables, the
// correlation sweep, the labeled scatter, and the three standard models,
// written as plain files plus a manifest. Stages fail independently;
// partial outputs are kept and failures are recorded in the manifest.

#ifndef MADPFI_PIPELINE_HPP
#define MADPFI_PIPELINE_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "madpfi/corpus.hpp"
#include "madpfi/csv.hpp"
#include "madpfi/design.hpp"
#include "madpfi/diversity.hpp"
#include "madpfi/errors.hpp"
#include "madpfi/filter.hpp"
#include "madpfi/indicators.hpp"
#include "madpfi/iso_countries.hpp"
#include "madpfi/lmm.hpp"
#include "madpfi/stats.hpp"
#include "madpfi/svg.hpp"

namespace madpfi {

struct JoinStats {
  std::size_t matched = 0;
  std::size_t diversity_only = 0;   // countries with no indicators row
  std::size_t indicators_only = 0;  // indicator rows never used
  std::size_t missing_response = 0;  // joined rows dropped for missing PFI
};

namespace pipeline_detail {

inline std::string join_failure_message(
    const std::vector<std::string>& left_only,
    const std::vector<std::string>& right_only) {
  std::string msg = "join produced no rows;";
  auto add = [&](const char* what, const std::vector<std::string>& keys) {
    msg += std::string(" ") + what + ":";
    if (keys.empty()) {
      msg += " (none)";
      return;
    }
    for (std::size_t i = 0; i < keys.size() && i < 5; ++i)
      msg += " " + keys[i];
    if (keys.size() > 5) msg += " ... (" + std::to_string(keys.size()) + ")";
  };
  add("diversity-side keys", left_only);
  add("indicator-side keys", right_only);
  return msg;
}

inline std::string region_label(const std::string& code) {
  const auto region = region_of(code);
  return region ? std::string(region_name(*region)) : std::string("other");
}

}  // namespace pipeline_detail

/// One row per country: diversity value joined with the indicators table.
/// Missing indicator cells stay missing (model fitting drops them listwise).
/// Throws if the join matches nothing.
inline Frame join_cross_section(const std::vector<DiversityRecord>& diversity,
                                const std::vector<CountryIndicators>& rows,
                                JoinStats* stats = nullptr) {
  std::map<std::string, const CountryIndicators*> by_country;
  for (const auto& row : rows) by_country[row.country] = &row;

  Frame frame;
  frame.numeric_names = {"u",
                         "pfi",
                         "cellular_per_100",
                         "gdp_per_capita",
                         "population",
                         "unemployment_pct"};
  frame.numeric.assign(frame.numeric_names.size(), {});
  frame.label_names = {"country", "region"};
  frame.labels.assign(2, {});

  JoinStats local;
  std::vector<std::string> left_only;
  std::set<std::string> used;
  for (const auto& rec : diversity) {
    const auto it = by_country.find(rec.country);
    if (it == by_country.end()) {
      ++local.diversity_only;
      left_only.push_back(rec.country);
      continue;
    }
    used.insert(rec.country);
    const auto& ind = *it->second;
    if (!ind.pfi) {
      ++local.missing_response;
      continue;
    }
    ++local.matched;
    frame.numeric[0].push_back(static_cast<double>(rec.value));
    frame.numeric[1].push_back(ind.pfi);
    frame.numeric[2].push_back(ind.cellular_per_100);
    frame.numeric[3].push_back(ind.gdp_per_capita);
    frame.numeric[4].push_back(ind.population);
    frame.numeric[5].push_back(ind.unemployment_pct);
    frame.labels[0].push_back(rec.country);
    frame.labels[1].push_back(pipeline_detail::region_label(rec.country));
  }
  local.indicators_only = by_country.size() - used.size();
  if (stats) *stats = local;
  if (frame.rows() == 0) {
    std::vector<std::string> right_only;
    for (const auto& [code, ptr] : by_country)
      if (!used.count(code)) right_only.push_back(code);
    throw ValidationError(
        pipeline_detail::join_failure_message(left_only, right_only));
  }
  return frame;
}

/// One row per (country, window): windowed diversity joined with per-window
/// PFI. When `panel` is empty the country-level PFI is repeated across
/// windows and a warning is recorded.
inline Frame join_panel(const std::vector<DiversityRecord>& diversity,
                        const std::vector<PanelPfiRow>& panel,
                        const std::vector<CountryIndicators>& rows,
                        std::vector<std::string>* warnings = nullptr,
                        JoinStats* stats = nullptr) {
  std::map<std::string, const CountryIndicators*> by_country;
  for (const auto& row : rows) by_country[row.country] = &row;
  std::map<std::tuple<std::string, std::string, std::string>, double>
      panel_pfi;
  for (const auto& row : panel)
    panel_pfi[{row.country, row.window_start.to_string(),
               row.window_end.to_string()}] = row.pfi;
  if (panel.empty() && warnings)
    warnings->push_back(
        "no per-window PFI given; repeating the country-level value across "
        "windows");

  Frame frame;
  frame.numeric_names = {"u",
                         "pfi",
                         "cellular_per_100",
                         "gdp_per_capita",
                         "population",
                         "unemployment_pct"};
  frame.numeric.assign(frame.numeric_names.size(), {});
  frame.label_names = {"country", "region", "window_start", "window_end"};
  frame.labels.assign(4, {});

  JoinStats local;
  std::vector<std::string> left_only;
  std::set<std::string> used;
  std::size_t panel_misses = 0;
  for (const auto& rec : diversity) {
    const auto it = by_country.find(rec.country);
    if (it == by_country.end()) {
      ++local.diversity_only;
      left_only.push_back(rec.country);
      continue;
    }
    const auto& ind = *it->second;
    std::optional<double> response = ind.pfi;
    if (!panel.empty()) {
      const auto pit = panel_pfi.find({rec.country,
                                       rec.window.first.to_string(),
                                       rec.window.last.to_string()});
      if (pit == panel_pfi.end()) {
        ++panel_misses;
        continue;
      }
      response = pit->second;
    }
    used.insert(rec.country);
    if (!response) {
      ++local.missing_response;
      continue;
    }
    ++local.matched;
    frame.numeric[0].push_back(static_cast<double>(rec.value));
    frame.numeric[1].push_back(response);
    frame.numeric[2].push_back(ind.cellular_per_100);
    frame.numeric[3].push_back(ind.gdp_per_capita);
    frame.numeric[4].push_back(ind.population);
    frame.numeric[5].push_back(ind.unemployment_pct);
    frame.labels[0].push_back(rec.country);
    frame.labels[1].push_back(pipeline_detail::region_label(rec.country));
    frame.labels[2].push_back(rec.window.first.to_string());
    frame.labels[3].push_back(rec.window.last.to_string());
  }
  local.indicators_only = by_country.size() - used.size();
  if (stats) *stats = local;
  if (panel_misses > 0 && warnings)
    warnings->push_back(std::to_string(panel_misses) +
                        " country-window cells had no per-window PFI row");
  if (frame.rows() == 0) {
    std::vector<std::string> right_only;
    for (const auto& [code, ptr] : by_country)
      if (!used.count(code)) right_only.push_back(code);
    throw ValidationError(
        pipeline_detail::join_failure_message(left_only, right_only));
  }
  return frame;
}

/// The three standard model formulas (1-based).
inline std::string model_formula(int model) {
  switch (model) {
    case 1:
      return "pfi ~ log(u)";
    case 2:
      return "pfi ~ cellular_per_100 + log(gdp_per_capita) + "
             "log(population) + unemployment_pct";
    case 3:
      return "pfi ~ log(u) + cellular_per_100 + log(gdp_per_capita) + "
             "log(population) + unemployment_pct";
    default:
      throw ValidationError("model presets are 1, 2 or 3");
  }
}

struct FittedModel {
  std::string name;
  std::string formula;
  std::string group;
  std::size_t dropped_rows = 0;
  LmmFit fit;
  // Predictor VIFs; empty for single-predictor models where the measure
  // is undefined.
  std::vector<std::pair<std::string, double>> vifs;
};

namespace pipeline_detail {

inline std::string num2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string num3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

inline std::string pad_left(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

inline std::string pad_right(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

}  // namespace pipeline_detail

/// Side-by-side coefficient table, two decimals, standard errors in
/// parentheses, significance stars on estimates.
inline std::string format_model_table(const std::vector<FittedModel>& models) {
  using pipeline_detail::num2;
  using pipeline_detail::num3;
  using pipeline_detail::pad_left;
  using pipeline_detail::pad_right;
  if (models.empty()) throw ValidationError("no models to format");

  std::vector<std::string> term_order;
  for (const auto& m : models)
    for (const auto& name : m.fit.names)
      if (std::find(term_order.begin(), term_order.end(), name) ==
          term_order.end())
        term_order.push_back(name);

  const std::size_t name_w = 22;
  const std::size_t col_w = 14;
  const std::size_t total = name_w + col_w * models.size();
  std::string out;
  auto rule = [&](char c) { out += std::string(total, c) + "\n"; };

  rule('=');
  out += pad_right("", name_w);
  for (const auto& m : models) out += pad_left(m.name, col_w);
  out += "\n";
  rule('-');
  for (const auto& term : term_order) {
    out += pad_right(term, name_w);
    std::string se_line = pad_right("", name_w);
    for (const auto& m : models) {
      std::string est, se;
      for (std::size_t j = 0; j < m.fit.names.size(); ++j) {
        if (m.fit.names[j] != term) continue;
        const auto idx = static_cast<Eigen::Index>(j);
        est = num2(m.fit.beta(idx)) +
              significance_stars(m.fit.p_values(idx));
        se = "(" + num2(m.fit.se(idx)) + ")";
      }
      out += pad_left(est, col_w);
      se_line += pad_left(se, col_w);
    }
    out += "\n" + se_line + "\n";
  }
  rule('-');
  auto stat_row = [&](const std::string& label, auto getter) {
    out += pad_right(label, name_w);
    for (const auto& m : models) out += pad_left(getter(m), col_w);
    out += "\n";
  };
  stat_row("n", [](const FittedModel& m) { return std::to_string(m.fit.n); });
  stat_row("groups",
           [](const FittedModel& m) { return std::to_string(m.fit.q); });
  stat_row("sigma_b", [&](const FittedModel& m) {
    return num2(std::sqrt(m.fit.sigma_b2));
  });
  stat_row("sigma", [&](const FittedModel& m) {
    return num2(std::sqrt(m.fit.sigma2));
  });
  stat_row("logLik",
           [&](const FittedModel& m) { return num2(m.fit.loglik); });
  stat_row("AIC", [&](const FittedModel& m) { return num2(m.fit.aic); });
  stat_row("BIC", [&](const FittedModel& m) { return num2(m.fit.bic); });
  stat_row("R2 (marginal)",
           [&](const FittedModel& m) { return num3(m.fit.r2_marginal); });
  stat_row("R2 (conditional)",
           [&](const FittedModel& m) { return num3(m.fit.r2_conditional); });
  stat_row("max VIF", [&](const FittedModel& m) {
    double mx = 0;
    for (const auto& [name, v] : m.vifs) mx = std::max(mx, v);
    return m.vifs.empty() ? std::string("-") : num2(mx);
  });
  rule('=');
  out += "Standard errors in parentheses; *** p<0.001, ** p<0.01, * p<0.05\n";
  out += "Estimation: " + std::string(fit_method_name(models[0].fit.method)) +
         ", random intercept by " + models[0].group + "\n";
  return out;
}

inline nlohmann::json model_to_json(const FittedModel& m) {
  nlohmann::json j;
  j["name"] = m.name;
  j["formula"] = m.formula;
  j["group"] = m.group;
  j["method"] = fit_method_name(m.fit.method);
  j["n"] = m.fit.n;
  j["p_fixed"] = m.fit.p_fixed;
  j["groups"] = m.fit.q;
  j["k_params"] = m.fit.k_params;
  j["dropped_rows"] = m.dropped_rows;
  nlohmann::json coefs = nlohmann::json::array();
  for (const auto& row : wald_table(m.fit)) {
    coefs.push_back({{"name", row.name},
                     {"estimate", row.estimate},
                     {"se", row.se},
                     {"z", row.z},
                     {"p", row.p},
                     {"stars", row.stars}});
  }
  j["coefficients"] = coefs;
  nlohmann::json vifs = nlohmann::json::object();
  for (const auto& [name, v] : m.vifs)
    vifs[name] = std::isinf(v) ? nlohmann::json("inf") : nlohmann::json(v);
  j["vif"] = vifs;
  j["theta"] = m.fit.theta;
  j["theta_at_boundary"] = m.fit.theta_at_boundary;
  j["sigma2"] = m.fit.sigma2;
  j["sigma_b2"] = m.fit.sigma_b2;
  j["loglik"] = m.fit.loglik;
  j["deviance"] = m.fit.deviance;
  j["aic"] = m.fit.aic;
  j["bic"] = m.fit.bic;
  j["r2_marginal"] = m.fit.r2_marginal;
  j["r2_conditional"] = m.fit.r2_conditional;
  return j;
}

struct ReportOptions {
  std::vector<int> table_ks = {10, 50, 90};
  std::vector<int> sweep_ks = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  int subtopic_k = 10;
  int subtopic_l = 3;
  int model_k = 90;    // diversity depth used for scatter and models
  double level = 0.95;
  WindowSpec window{};  // full: cross-section models; otherwise panel
  FitMethod method = FitMethod::reml;
  std::string group;    // empty = region for full windows, country otherwise
};

struct ReportResult {
  std::vector<std::string> outputs;  // file names relative to out_dir
  std::vector<std::string> warnings;
  std::vector<std::string> failures;  // "stage: reason"
  CorrelationSweep sweep;
  std::vector<FittedModel> models;
  bool ok() const { return failures.empty(); }
};

namespace pipeline_detail {

inline void write_diversity_csv(const std::filesystem::path& path,
                                const std::vector<DiversityRecord>& recs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  csv_write_row(out, {"country", "k", "l", "window_start", "window_end", "u"});
  for (const auto& r : recs)
    csv_write_row(out, {r.country, std::to_string(r.k),
                        r.l ? std::to_string(*r.l) : std::string(),
                        r.window.first.to_string(), r.window.last.to_string(),
                        std::to_string(r.value)});
}

inline std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace pipeline_detail

/// Runs every report stage, writing outputs under `out_dir` as it goes.
/// A stage failure is recorded and later stages still run; the manifest is
/// always written last.
inline ReportResult run_report(const Corpus& corpus,
                               const std::vector<CountryIndicators>& indicators,
                               const std::vector<PanelPfiRow>& panel,
                               const std::filesystem::path& out_dir,
                               const ReportOptions& opt = {}) {
  namespace fs = std::filesystem;
  namespace pd = pipeline_detail;
  fs::create_directories(out_dir);
  ReportResult result;

  auto emit = [&](const std::string& name) { result.outputs.push_back(name); };
  auto stage = [&](const char* name, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      result.failures.push_back(std::string(name) + ": " + e.what());
    }
  };

  // Survival curve over the whole admissible k range.
  stage("survival", [&] {
    std::vector<int> ks(100);
    for (int k = 1; k <= 100; ++k) ks[static_cast<std::size_t>(k - 1)] = k;
    const auto curve = survival_curve(corpus, ks);
    std::ofstream out(out_dir / "survival.csv");
    if (!out) throw IoError("cannot write survival.csv");
    csv_write_row(out, {"k", "count"});
    for (const auto& [k, count] : curve)
      csv_write_row(out, {std::to_string(k), std::to_string(count)});
    emit("survival.csv");
  });

  // Full-period diversity per k, cached for the sweep and the models.
  std::map<int, std::vector<DiversityRecord>> full_records;
  auto full_diversity = [&](int k) -> const std::vector<DiversityRecord>& {
    auto it = full_records.find(k);
    if (it != full_records.end()) return it->second;
    const auto dataset = build_topk_dataset(corpus, k);
    std::vector<DiversityRecord> recs;
    if (!dataset.countries().empty()) {
      const auto windows =
          make_windows(dataset.dates(), WindowSpec{WindowSpec::Mode::full, 0});
      recs = diversity_table(dataset, std::nullopt, windows);
    }
    return full_records.emplace(k, std::move(recs)).first->second;
  };

  stage("diversity tables", [&] {
    for (int k : opt.table_ks) {
      const auto& recs = full_diversity(k);
      const std::string name = "diversity_k" + std::to_string(k) + ".csv";
      pd::write_diversity_csv(out_dir / name, recs);
      emit(name);
    }
  });

  stage("subtopic diversity", [&] {
    const auto dataset = build_topk_dataset(corpus, opt.subtopic_k);
    std::vector<DiversityRecord> recs;
    if (!dataset.countries().empty()) {
      const auto windows =
          make_windows(dataset.dates(), WindowSpec{WindowSpec::Mode::full, 0});
      recs = diversity_table(dataset, opt.subtopic_l, windows);
    }
    const std::string name = "subtopic_diversity_k" +
                             std::to_string(opt.subtopic_k) + "_l" +
                             std::to_string(opt.subtopic_l) + ".csv";
    pd::write_diversity_csv(out_dir / name, recs);
    emit(name);
  });

  stage("correlation sweep", [&] {
    std::vector<DiversityRecord> all;
    for (int k : opt.sweep_ks) {
      const auto& recs = full_diversity(k);
      all.insert(all.end(), recs.begin(), recs.end());
    }
    result.sweep = correlation_sweep(all, indicators, opt.sweep_ks, opt.level);
    for (const auto& w : result.sweep.warnings)
      result.warnings.push_back("correlation sweep: " + w);
    std::ofstream out(out_dir / "correlation_sweep.csv");
    if (!out) throw IoError("cannot write correlation_sweep.csv");
    csv_write_row(out, {"k", "r", "ci_low", "ci_high", "n"});
    for (const auto& row : result.sweep.results)
      csv_write_row(out, {std::to_string(row.k), pd::format_g(row.r),
                          pd::format_g(row.ci_low), pd::format_g(row.ci_high),
                          std::to_string(row.n)});
    emit("correlation_sweep.csv");
  });

  stage("scatter", [&] {
    std::map<std::string, double> pfi;
    for (const auto& row : indicators)
      if (row.pfi) pfi[row.country] = *row.pfi;
    const auto& recs = full_diversity(opt.model_k);
    std::vector<ScatterPoint> points;
    const std::string base = "scatter_k" + std::to_string(opt.model_k);
    std::ofstream out(out_dir / (base + ".csv"));
    if (!out) throw IoError("cannot write " + base + ".csv");
    csv_write_row(out, {"country", "log_u", "pfi"});
    for (const auto& rec : recs) {
      const auto it = pfi.find(rec.country);
      if (it == pfi.end() || rec.value == 0) continue;
      const double lu = std::log(static_cast<double>(rec.value));
      csv_write_row(out, {rec.country, pd::format_g(lu),
                          pd::format_g(it->second)});
      points.push_back({lu, it->second, rec.country});
    }
    ScatterStyle style;
    style.x_label = "log diversity (top-" + std::to_string(opt.model_k) + ")";
    style.y_label = "press freedom index";
    std::ofstream svg(out_dir / (base + ".svg"));
    if (!svg) throw IoError("cannot write " + base + ".svg");
    svg << render_scatter_svg(points, style);
    emit(base + ".csv");
    emit(base + ".svg");
  });

  stage("models", [&] {
    const bool cross_section = opt.window.mode == WindowSpec::Mode::full;
    const std::string group =
        !opt.group.empty() ? opt.group
                           : (cross_section ? "region" : "country");
    Frame frame;
    if (cross_section) {
      JoinStats js;
      frame = join_cross_section(full_diversity(opt.model_k), indicators, &js);
      if (js.diversity_only > 0)
        result.warnings.push_back(
            "models: " + std::to_string(js.diversity_only) +
            " countries had diversity but no indicators row");
      if (js.missing_response > 0)
        result.warnings.push_back(
            "models: " + std::to_string(js.missing_response) +
            " countries dropped for missing PFI");
    } else {
      const auto dataset = build_topk_dataset(corpus, opt.model_k);
      if (dataset.countries().empty())
        throw ValidationError("no countries survive k=" +
                              std::to_string(opt.model_k));
      const auto windows = make_windows(dataset.dates(), opt.window);
      const auto recs = diversity_table(dataset, std::nullopt, windows);
      JoinStats js;
      frame = join_panel(recs, panel, indicators, &result.warnings, &js);
    }

    for (int preset = 1; preset <= 3; ++preset) {
      const std::string name = "Model " + std::to_string(preset);
      try {
        LmmSpec spec = parse_formula(model_formula(preset));
        spec.group = group;
        spec.method = opt.method;
        const BuiltDesign built = build_design(frame, spec);
        FittedModel fitted;
        fitted.name = name;
        fitted.formula = model_formula(preset);
        fitted.group = group;
        fitted.dropped_rows = built.dropped_rows;
        fitted.fit = fit_lmm(built.design, built.y, opt.method);
        if (built.design.X.cols() - (built.design.intercept ? 1 : 0) >= 2) {
          const VifResult v = vif(built.design);
          for (std::size_t i = 0; i < v.names.size(); ++i)
            fitted.vifs.emplace_back(v.names[i], v.values[i]);
        }
        result.models.push_back(std::move(fitted));
      } catch (const std::exception& e) {
        result.failures.push_back(name + ": " + e.what());
      }
    }
    if (!result.models.empty()) {
      std::ofstream txt(out_dir / "models.txt");
      if (!txt) throw IoError("cannot write models.txt");
      txt << format_model_table(result.models);
      emit("models.txt");
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& m : result.models) arr.push_back(model_to_json(m));
      std::ofstream js(out_dir / "models.json");
      if (!js) throw IoError("cannot write models.json");
      js << arr.dump(2) << '\n';
      emit("models.json");
    }
  });

  // Manifest last so it can list everything, including failures. No
  // timestamps: reruns on identical input must be byte-identical.
  {
    nlohmann::json manifest;
    manifest["tool"] = "madpfi report";
    manifest["countries"] = corpus.country_count();
    manifest["observed_days"] = corpus.day_count();
    if (!corpus.empty()) {
      const auto range = corpus.date_range();
      manifest["date_range"] = {range.first.to_string(),
                                range.last.to_string()};
    }
    manifest["parameters"] = {
        {"table_ks", opt.table_ks},
        {"sweep_ks", opt.sweep_ks},
        {"subtopic_k", opt.subtopic_k},
        {"subtopic_l", opt.subtopic_l},
        {"model_k", opt.model_k},
        {"level", opt.level},
        {"method", fit_method_name(opt.method)},
        {"group", opt.group.empty() ? "(auto)" : opt.group}};
    manifest["outputs"] = result.outputs;
    manifest["warnings"] = result.warnings;
    manifest["failures"] = result.failures;
    nlohmann::json sweep = nlohmann::json::array();
    for (const auto& row : result.sweep.results)
      sweep.push_back({{"k", row.k},
                       {"r", row.r},
                       {"ci_low", row.ci_low},
                       {"ci_high", row.ci_high},
                       {"n", row.n}});
    manifest["correlations"] = sweep;
    std::ofstream out(out_dir / "MANIFEST.json");
    if (!out) throw IoError("cannot write MANIFEST.json");
    out << manifest.dump(2) << '\n';
    result.outputs.push_back("MANIFEST.json");
  }
  return result;
}

}  // namespace madpfi

#endif  // MADPFI_PIPELINE_HPP
