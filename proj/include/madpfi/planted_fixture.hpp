// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_PLANTED_FIXTURE_HPP
#define MADPFI_PLANTED_FIXTURE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "madpfi/corpus.hpp"
#include "madpfi/errors.hpp"
#include "madpfi/indicators.hpp"
#include "madpfi/iso_countries.hpp"
#include "madpfi/rng.hpp"
#include "madpfi/stats.hpp"
#include "madpfi/synthetic.hpp"

namespace madpfi {

inline constexpr std::uint64_t kPlantedFixtureSeed = 20160307;

/// The bundled planted synthetic fixture: 196 countries over the
/// 2016-03-07..2016-10-09 span with 211 observed dates, survival counts
/// 196/129/103/88/0 at k=1/10/50/90/100, pinned diversity extremes
/// (4012, 959, 86, 795 and the bottom-five ordering), pinned correlations
/// of log diversity with PFI at k=10/50/90, eight PFI-missing countries
/// inside C^90, and a per-window panel response with a planted slope of
/// -35.08 on log diversity.
struct PlantedFixture {
  Corpus corpus;
  std::vector<CountryIndicators> indicators;  // 196 rows, 8 missing PFI
  std::vector<PanelPfiRow> panel;             // 80 countries x 7 windows
  std::vector<std::string> pfi_missing;
  double r90 = 0;  // achieved corr(log U(90), pfi), n=80
  double r50 = 0;  // n=95
  double r10 = 0;  // n=121
  double panel_slope = -35.08;  // planted within-country slope
  std::uint64_t seed = kPlantedFixtureSeed;
  // Planted full-period set-union values per country. u90/u50 are only
  // meaningful for countries deep enough to survive that cutoff.
  std::map<std::string, long> planted_u10, planted_u50, planted_u90;
  // Exact planted subtopic union at k=10, l=3 for every C^10 country.
  std::map<std::string, long long> planted_subtopic_u10;
};

namespace planted_detail {

constexpr int kObservedDays = 211;
constexpr int kWindowLen = 30;
constexpr int kWindows = 7;  // trailing 211th day belongs to no window
constexpr int kSlots = 100;
constexpr double kTargetR90 = -0.599;
constexpr double kTargetR50 = -0.529;
constexpr double kTargetR10 = -0.484;
constexpr double kPanelSlope = -35.08;

// Per-window fraction of a slot's topic pool that may appear; the spread
// creates within-country variation for the panel regression.
constexpr std::array<double, kWindows> kWindowFraction = {
    0.55, 0.50, 0.60, 0.52, 0.58, 0.54, 0.56};

enum Tier { kTierA = 0, kTierB50 = 1, kTierBLow = 2, kTierC = 3 };

struct CountryPlan {
  std::string code;
  Tier tier = kTierC;
  int min_count = 1;  // snapshot depth on dip days; 100 otherwise
  long u90 = 0, u50 = 0, u10 = 0;
  std::vector<int> nu;  // per-slot distinct-topic counts, index 0 = slot 1
  bool pfi_missing = false;
};

/// Calendar dates: 217-day span minus 6 globally skipped crawl days.
inline std::vector<Date> observed_dates() {
  static const std::set<long> kSkippedOffsets = {40, 81, 122, 150, 181, 203};
  const Date first{2016, 3, 7};
  std::vector<Date> out;
  out.reserve(kObservedDays);
  for (long off = 0; off < 217; ++off)
    if (!kSkippedOffsets.count(off)) out.push_back(first.plus_days(off));
  if (out.size() != kObservedDays)
    throw ComputationError("fixture date arithmetic broke");
  return out;
}

/// Dip days reduce a country's snapshot to its min_count. 31 is invertible
/// mod 47, so every country dips on at least one of the 211 days.
inline bool is_dip_day(int day_idx, int country_idx) {
  return (day_idx * 31 + country_idx * 7) % 47 == 0;
}

/// Splits total into `parts` chunks as evenly as possible (first chunks
/// take the remainder), each >= 1.
inline void fill_even(std::vector<int>& nu, int first_slot, int parts,
                      long total) {
  if (total < parts)
    throw ComputationError("fixture partition infeasible: " +
                           std::to_string(total) + " over " +
                           std::to_string(parts));
  const long base = total / parts;
  const long rem = total % parts;
  for (int i = 0; i < parts; ++i)
    nu[static_cast<std::size_t>(first_slot + i)] =
        static_cast<int>(base + (i < rem ? 1 : 0));
}

inline std::vector<CountryPlan> plan_countries() {
  const std::vector<std::string> anchors = {"AE", "EG", "IQ", "LU", "SA",
                                            "YE"};
  std::vector<std::string> others;
  for (auto code : iso_country_codes()) {
    const std::string s(code);
    if (!std::binary_search(anchors.begin(), anchors.end(), s))
      others.push_back(s);
  }

  std::vector<CountryPlan> plans;
  auto add = [&](const std::string& code, Tier tier, int min_count) {
    CountryPlan p;
    p.code = code;
    p.tier = tier;
    p.min_count = min_count;
    p.nu.assign(kSlots, 0);
    plans.push_back(std::move(p));
  };

  // Tier A: the 88 countries of C^90. Anchors LU (highest U) and EG
  // (lowest U) plus the first 86 other codes.
  add("LU", kTierA, 97);
  add("EG", kTierA, 93);
  for (int i = 0; i < 86; ++i) add(others[i], kTierA, 90 + (i * 7) % 10);
  // 15 countries with depth in [50,89]: C^50 has 103 members.
  for (int i = 0; i < 15; ++i)
    add(others[86 + i], kTierB50, 50 + (i * 17) % 40);
  // 26 countries with depth in [10,49]: C^10 has 129. Four anchors carry
  // the planted bottom-five U(10) values.
  add("YE", kTierBLow, 12);
  add("IQ", kTierBLow, 15);
  add("SA", kTierBLow, 21);
  add("AE", kTierBLow, 33);
  for (int i = 0; i < 22; ++i)
    add(others[101 + i], kTierBLow, 10 + (i * 13) % 40);
  // 67 shallow countries eliminated even at k=10.
  for (int i = 0; i < 67; ++i) add(others[123 + i], kTierC, 1 + (i * 5) % 9);

  if (plans.size() != 196)
    throw ComputationError("fixture country plan must have 196 entries");

  // Planted per-slot topic counts.
  int a_extra = 0, b50_idx = 0, blow_idx = 0;
  for (auto& p : plans) {
    if (p.tier == kTierA) {
      if (p.code == "LU") {
        // 52*45 + 38*44 = 4012, the corpus maximum at k=90.
        for (int j = 0; j < 90; ++j) p.nu[j] = j < 52 ? 45 : 44;
        p.u10 = 450;
        p.u50 = 2250;
        p.u90 = 4012;
      } else if (p.code == "EG") {
        // U(10)=124 (4*13+6*12), U(50)=527, U(90)=959, the C^90 minimum.
        for (int j = 0; j < 10; ++j) p.nu[j] = j < 4 ? 13 : 12;
        for (int j = 10; j < 50; ++j) p.nu[j] = j < 13 ? 11 : 10;
        for (int j = 50; j < 90; ++j) p.nu[j] = j < 82 ? 11 : 10;
        p.u10 = 124;
        p.u50 = 527;
        p.u90 = 959;
      } else {
        // Log-diversity grid strictly inside (959, 4012); the width keeps
        // the implied PFI spread inside (0.5, 99.5).
        const double z =
            7.5815 + 0.35 * (2.0 * a_extra / 85.0 - 1.0);
        p.u90 = std::lround(std::exp(z));
        p.u50 = std::lround(0.55 * static_cast<double>(p.u90));
        p.u10 = std::lround(0.30 * static_cast<double>(p.u50));
        fill_even(p.nu, 0, 10, p.u10);
        fill_even(p.nu, 10, 40, p.u50 - p.u10);
        fill_even(p.nu, 50, 40, p.u90 - p.u50);
        ++a_extra;
      }
      for (int j = 90; j < kSlots; ++j) p.nu[j] = 5;
    } else if (p.tier == kTierB50) {
      const double lx = std::log(260.0) +
                        (std::log(600.0) - std::log(260.0)) * b50_idx / 14.0;
      p.u50 = std::lround(std::exp(lx));
      p.u10 = std::max<long>(130, std::lround(0.30 * p.u50));
      fill_even(p.nu, 0, 10, p.u10);
      fill_even(p.nu, 10, 40, p.u50 - p.u10);
      for (int j = 50; j < kSlots; ++j) p.nu[j] = 3 + (j % 5);
      ++b50_idx;
    } else if (p.tier == kTierBLow) {
      if (p.code == "YE") {
        for (int j = 0; j < 10; ++j) p.nu[j] = j < 6 ? 9 : 8;  // 86
        p.u10 = 86;
      } else if (p.code == "IQ") {
        for (int j = 0; j < 10; ++j) p.nu[j] = j < 7 ? 11 : 10;  // 107
        p.u10 = 107;
      } else if (p.code == "SA") {
        for (int j = 0; j < 10; ++j) p.nu[j] = 12;  // 120
        p.u10 = 120;
      } else if (p.code == "AE") {
        for (int j = 0; j < 10; ++j) p.nu[j] = j < 6 ? 13 : 12;  // 126
        p.u10 = 126;
      } else {
        // Strictly below the A-tier U(10) floor of 228 so this tier stays
        // the left side of the k=10 cloud; 135 keeps the planted bottom
        // five (86..126) the global minimum.
        const double lx =
            std::log(135.0) +
            (std::log(215.0) - std::log(135.0)) * blow_idx / 21.0;
        p.u10 = std::lround(std::exp(lx));
        fill_even(p.nu, 0, 10, p.u10);
        ++blow_idx;
      }
      for (int j = 10; j < kSlots; ++j) p.nu[j] = 3 + (j % 5);
    } else {
      for (int j = 0; j < kSlots; ++j) p.nu[j] = 2 + (j % 3);
    }
  }

  // Eight PFI-missing countries, all inside C^90 and none an anchor.
  const std::set<int> missing_extra = {5, 17, 29, 41, 53, 65, 77, 85};
  int extra_seen = 0;
  for (auto& p : plans) {
    if (p.tier != kTierA || p.code == "LU" || p.code == "EG") continue;
    if (missing_extra.count(extra_seen)) p.pfi_missing = true;
    ++extra_seen;
  }
  std::sort(plans.begin(), plans.end(),
            [](const CountryPlan& a, const CountryPlan& b) {
              return a.code < b.code;
            });
  return plans;
}

inline std::string slot_topic_id(const std::string& code, int slot,
                                 int idx) {
  return code + "-s" + std::to_string(slot + 1) + "-t" +
         std::to_string(idx + 1);
}

/// Per-country build artifacts needed after corpus assembly.
struct BuildResult {
  std::array<long, kWindows> u_window{};  // sum over slots 1..90
  long subtopic_u10_l3 = 0;               // exact, slots 1..10 coverage
};

/// Builds one country's 211 snapshots. Each rank slot cycles its own
/// disjoint topic pool through per-window contiguous blocks, so the
/// full-period union per slot is exactly nu[slot] and the per-window union
/// is the planned block size. Co-mention lists advance a per-topic pointer
/// by 3 per appearance, so subtopic coverage per topic is exactly its
/// co-mention pool size.
inline BuildResult build_country(const CountryPlan& plan, int country_idx,
                                 const std::vector<Date>& dates,
                                 const Rng& root,
                                 std::vector<DailySnapshot>& out) {
  BuildResult result;
  const Rng country_rng = root.child(static_cast<std::uint64_t>(country_idx));

  std::vector<int> depth(kObservedDays);
  for (int d = 0; d < kObservedDays; ++d)
    depth[d] = is_dip_day(d, country_idx) ? plan.min_count : 100;

  // schedule[slot][day] = topic index within the slot pool, -1 if absent.
  std::vector<std::vector<int>> schedule(
      kSlots, std::vector<int>(kObservedDays, -1));

  for (int j = 0; j < kSlots; ++j) {
    const int nu = plan.nu[j];
    Rng rng = country_rng.child(static_cast<std::uint64_t>(j));
    int ptr = 0;
    long planned_total = 0;
    for (int w = 0; w < kWindows; ++w) {
      std::vector<int> active;
      for (int d = w * kWindowLen; d < (w + 1) * kWindowLen; ++d)
        if (depth[d] > j) active.push_back(d);
      if (active.empty()) continue;
      int take = static_cast<int>(
          std::lround(static_cast<double>(nu) * kWindowFraction[w]));
      take = std::max(1, std::min({take, nu, static_cast<int>(active.size())}));
      std::vector<int> topics(static_cast<std::size_t>(take));
      for (int t = 0; t < take; ++t) topics[static_cast<std::size_t>(t)] =
          (ptr + t) % nu;
      ptr = (ptr + take) % nu;
      planned_total += take;
      if (j < 90) result.u_window[static_cast<std::size_t>(w)] += take;

      // Fill the window's active days with the chosen topics, spread evenly.
      std::vector<int> fill;
      fill.reserve(active.size());
      const int base = static_cast<int>(active.size()) / take;
      const int rem = static_cast<int>(active.size()) % take;
      for (int t = 0; t < take; ++t)
        for (int r = 0; r < base + (t < rem ? 1 : 0); ++r)
          fill.push_back(topics[static_cast<std::size_t>(t)]);
      rng.shuffle(fill);
      for (std::size_t i = 0; i < active.size(); ++i)
        schedule[j][static_cast<std::size_t>(active[i])] = fill[i];
    }
    if (planned_total < nu)
      throw ComputationError("slot coverage shortfall for '" + plan.code +
                             "' slot " + std::to_string(j + 1));
    // Trailing day outside all windows repeats an already-covered topic.
    const int last = kObservedDays - 1;
    if (depth[last] > j) schedule[j][last] = 0;
  }

  // Co-mention pools for the top-10 slots of countries that can enter C^10.
  // Pool size = min(9, 3 * appearances) guarantees exact coverage; Yemen's
  // first 21 topics are widened to 10 so its subtopic union is exactly 795.
  std::vector<std::vector<int>> appearances(10);
  std::vector<std::vector<int>> pool_size(10);
  std::vector<std::vector<int>> pointer(10);
  const bool comentions = plan.tier != kTierC;
  if (comentions) {
    for (int j = 0; j < 10; ++j) {
      appearances[j].assign(static_cast<std::size_t>(plan.nu[j]), 0);
      for (int d = 0; d < kObservedDays; ++d)
        if (schedule[j][d] >= 0)
          ++appearances[j][static_cast<std::size_t>(schedule[j][d])];
      pool_size[j].resize(static_cast<std::size_t>(plan.nu[j]));
      pointer[j].assign(static_cast<std::size_t>(plan.nu[j]), 0);
      for (int t = 0; t < plan.nu[j]; ++t) {
        const int a = appearances[j][static_cast<std::size_t>(t)];
        pool_size[j][static_cast<std::size_t>(t)] = std::min(9, 3 * a);
      }
    }
    if (plan.code == "YE") {
      int bumped = 0;
      for (int j = 0; j < 10 && bumped < 21; ++j)
        for (int t = 0; t < plan.nu[j] && bumped < 21; ++t) {
          if (appearances[j][static_cast<std::size_t>(t)] < 4 ||
              pool_size[j][static_cast<std::size_t>(t)] != 9)
            throw ComputationError("Yemen co-mention plan infeasible");
          pool_size[j][static_cast<std::size_t>(t)] = 10;
          ++bumped;
        }
    }
    for (int j = 0; j < 10; ++j)
      for (int t = 0; t < plan.nu[j]; ++t)
        result.subtopic_u10_l3 += pool_size[j][static_cast<std::size_t>(t)];
  }

  for (int d = 0; d < kObservedDays; ++d) {
    DailySnapshot snap;
    snap.country = plan.code;
    snap.date = dates[static_cast<std::size_t>(d)];
    snap.mentions.reserve(static_cast<std::size_t>(depth[d]));
    for (int j = 0; j < depth[d]; ++j) {
      const int t = schedule[j][d];
      if (t < 0)
        throw ComputationError("fixture schedule hole at '" + plan.code +
                               "' day " + std::to_string(d) + " slot " +
                               std::to_string(j + 1));
      TopicMention m;
      m.topic = slot_topic_id(plan.code, j, t);
      m.rank = j + 1;
      if (comentions && j < 10) {
        const int w = pool_size[j][static_cast<std::size_t>(t)];
        int& p = pointer[j][static_cast<std::size_t>(t)];
        m.comentions.reserve(3);
        for (int q = 0; q < 3; ++q)
          m.comentions.push_back(m.topic + "-c" +
                                 std::to_string((p + q) % w + 1));
        p = (p + 3) % w;
      }
      snap.mentions.push_back(std::move(m));
    }
    out.push_back(std::move(snap));
  }
  return result;
}

inline double truncated_normal(Rng& rng, double sd, double bound) {
  for (;;) {
    const double v = rng.next_normal(0.0, sd);
    if (std::fabs(v) <= bound) return v;
  }
}

/// Standardizes in place (population sd); returns (mean, sd).
inline std::pair<double, double> standardize(std::vector<double>& v) {
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  const double sd = std::sqrt(var);
  if (sd <= 0) throw ComputationError("degenerate fixture vector");
  for (double& x : v) x = (x - mean) / sd;
  return {mean, sd};
}

template <typename F>
double bisect_to_target(F&& f, double lo, double hi, double target,
                        const char* what) {
  double flo = f(lo) - target;
  double fhi = f(hi) - target;
  if (flo * fhi > 0)
    throw ComputationError(std::string("fixture dial for ") + what +
                           " does not bracket its target (" +
                           std::to_string(flo + target) + ", " +
                           std::to_string(fhi + target) + ")");
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid) - target;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace planted_detail

inline PlantedFixture make_planted_fixture(
    std::uint64_t seed = kPlantedFixtureSeed) {
  namespace psd = planted_detail;
  PlantedFixture fix;
  fix.seed = seed;
  const Rng root(seed);
  const auto dates = psd::observed_dates();
  auto plans = psd::plan_countries();

  // --- corpus -------------------------------------------------------------
  std::vector<DailySnapshot> snaps;
  snaps.reserve(plans.size() * psd::kObservedDays);
  std::vector<psd::BuildResult> built(plans.size());
  for (std::size_t i = 0; i < plans.size(); ++i)
    built[i] = psd::build_country(plans[i], static_cast<int>(i), dates, root,
                                  snaps);
  fix.corpus = Corpus::from_snapshots(std::move(snaps));

  for (std::size_t i = 0; i < plans.size(); ++i) {
    const auto& p = plans[i];
    if (p.min_count >= 10) fix.planted_u10[p.code] = p.u10;
    if (p.min_count >= 50) fix.planted_u50[p.code] = p.u50;
    if (p.min_count >= 90) fix.planted_u90[p.code] = p.u90;
    if (p.tier != psd::kTierC && p.min_count >= 10)
      fix.planted_subtopic_u10[p.code] = built[i].subtopic_u10_l3;
  }
  if (fix.planted_subtopic_u10.at("YE") != 795)
    throw ComputationError("Yemen subtopic plant drifted from 795");

  // --- PFI with exact planted correlation at k=90 --------------------------
  // Index bookkeeping over the sorted plan list.
  std::vector<std::size_t> a_with_pfi, b50, blow_free, blow_anchor;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const auto& p = plans[i];
    if (p.tier == psd::kTierA && !p.pfi_missing) a_with_pfi.push_back(i);
    if (p.tier == psd::kTierB50) b50.push_back(i);
    if (p.tier == psd::kTierBLow) {
      if (p.code == "YE" || p.code == "IQ" || p.code == "SA" ||
          p.code == "AE")
        blow_anchor.push_back(i);
      else
        blow_free.push_back(i);
    }
  }
  if (a_with_pfi.size() != 80 || b50.size() != 15 || blow_free.size() != 22)
    throw ComputationError("fixture cohort sizes broke");

  std::vector<double> z(a_with_pfi.size());
  for (std::size_t i = 0; i < a_with_pfi.size(); ++i)
    z[i] = std::log(static_cast<double>(plans[a_with_pfi[i]].u90));
  std::vector<double> zhat = z;
  const auto [z_mean, z_sd] = psd::standardize(zhat);

  // Noise orthogonalized against zhat so the sample correlation is exactly
  // the target; region offsets fold into the noise so a region-grouped fit
  // sees real between-group variance.
  std::vector<double> e(a_with_pfi.size());
  for (std::size_t i = 0; i < a_with_pfi.size(); ++i) {
    Rng rng = root.child(0xE0000u + static_cast<std::uint64_t>(i));
    e[i] = 1.2 * detail::region_offset(plans[a_with_pfi[i]].code) +
           psd::truncated_normal(rng, 3.0, 6.0);
  }
  {
    double em = 0;
    for (double v : e) em += v;
    em /= static_cast<double>(e.size());
    for (double& v : e) v -= em;
    double dot = 0, zz = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      dot += e[i] * zhat[i];
      zz += zhat[i] * zhat[i];
    }
    for (std::size_t i = 0; i < e.size(); ++i) e[i] -= (dot / zz) * zhat[i];
    psd::standardize(e);
  }

  // sd_p makes the cross-sectional regression slope of PFI on log U(90)
  // exactly the planted panel slope.
  const double r = psd::kTargetR90;
  const double sd_p = -psd::kPanelSlope * z_sd / (-r);
  const double mix = std::sqrt(1.0 - r * r);
  std::map<std::string, double> pfi;
  for (std::size_t i = 0; i < a_with_pfi.size(); ++i) {
    const double v = 55.0 + sd_p * (r * zhat[i] + mix * e[i]);
    if (v < 0.5 || v > 99.5)
      throw ComputationError(
          "fixture PFI out of range at seed " + std::to_string(seed) +
          "; choose another seed");
    pfi[plans[a_with_pfi[i]].code] = v;
  }

  // Achieved r at k=90 (exact by construction, recorded for the manifest).
  {
    std::vector<double> ys;
    for (std::size_t i : a_with_pfi) ys.push_back(pfi[plans[i].code]);
    fix.r90 = pearson_r(z, ys);
  }

  // --- k=50 dial: place the 15 B50 clouds to hit the target r ------------
  std::vector<double> x50, y50;  // the 80 fixed points at k=50
  for (std::size_t i : a_with_pfi) {
    x50.push_back(std::log(static_cast<double>(plans[i].u50)));
    y50.push_back(pfi[plans[i].code]);
  }
  double x50_mean = 0, y50_mean = 0;
  for (double v : x50) x50_mean += v;
  x50_mean /= static_cast<double>(x50.size());
  for (double v : y50) y50_mean += v;
  y50_mean /= static_cast<double>(y50.size());

  std::vector<double> xb(b50.size()), gb(b50.size());
  double xb_mean = 0;
  for (std::size_t i = 0; i < b50.size(); ++i) {
    xb[i] = std::log(static_cast<double>(plans[b50[i]].u50));
    xb_mean += xb[i];
    Rng rng = root.child(0xB5000u + static_cast<std::uint64_t>(i));
    gb[i] = psd::truncated_normal(rng, 8.0, 15.0);
  }
  xb_mean /= static_cast<double>(xb.size());

  auto r50_for_center = [&](double center) {
    std::vector<double> xs = x50, ys = y50;
    for (std::size_t i = 0; i < b50.size(); ++i) {
      xs.push_back(xb[i]);
      ys.push_back(center + 0.5 * psd::kPanelSlope * (xb[i] - xb_mean) +
                   gb[i]);
    }
    return pearson_r(xs, ys);
  };
  const double center50 = psd::bisect_to_target(r50_for_center, 20.0, 95.0,
                                                psd::kTargetR50, "r(k=50)");
  for (std::size_t i = 0; i < b50.size(); ++i) {
    const double v =
        center50 + 0.5 * psd::kPanelSlope * (xb[i] - xb_mean) + gb[i];
    if (v < 0.5)
      throw ComputationError("fixture B50 PFI went negative; reseed");
    pfi[plans[b50[i]].code] = v;
  }
  fix.r50 = r50_for_center(center50);

  // --- k=10 dial: anchors fixed, 22 free countries placed -----------------
  pfi["YE"] = 65.8;
  pfi["IQ"] = 54.4;
  pfi["SA"] = 59.7;
  pfi["AE"] = 36.7;

  std::vector<double> x10, y10;  // 99 fixed points at k=10
  for (std::size_t i : a_with_pfi) {
    x10.push_back(std::log(static_cast<double>(plans[i].u10)));
    y10.push_back(pfi[plans[i].code]);
  }
  for (std::size_t i : b50) {
    x10.push_back(std::log(static_cast<double>(plans[i].u10)));
    y10.push_back(pfi[plans[i].code]);
  }
  for (std::size_t i : blow_anchor) {
    x10.push_back(std::log(static_cast<double>(plans[i].u10)));
    y10.push_back(pfi[plans[i].code]);
  }

  std::vector<double> xl(blow_free.size()), gl(blow_free.size());
  double xl_mean = 0;
  for (std::size_t i = 0; i < blow_free.size(); ++i) {
    xl[i] = std::log(static_cast<double>(plans[blow_free[i]].u10));
    xl_mean += xl[i];
    Rng rng = root.child(0xC0000u + static_cast<std::uint64_t>(i));
    gl[i] = psd::truncated_normal(rng, 8.0, 15.0);
  }
  xl_mean /= static_cast<double>(xl.size());

  auto r10_for_center = [&](double center) {
    std::vector<double> xs = x10, ys = y10;
    for (std::size_t i = 0; i < blow_free.size(); ++i) {
      xs.push_back(xl[i]);
      ys.push_back(center + 0.5 * psd::kPanelSlope * (xl[i] - xl_mean) +
                   gl[i]);
    }
    return pearson_r(xs, ys);
  };
  const double center10 = psd::bisect_to_target(r10_for_center, 20.0, 95.0,
                                                psd::kTargetR10, "r(k=10)");
  for (std::size_t i = 0; i < blow_free.size(); ++i) {
    const double v =
        center10 + 0.5 * psd::kPanelSlope * (xl[i] - xl_mean) + gl[i];
    if (v < 0.5)
      throw ComputationError("fixture B-low PFI went negative; reseed");
    pfi[plans[blow_free[i]].code] = v;
  }
  fix.r10 = r10_for_center(center10);

  // --- indicators table ----------------------------------------------------
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const auto& p = plans[i];
    Rng rng = root.child(0xA0000u + static_cast<std::uint64_t>(i));
    CountryIndicators row;
    row.country = p.code;
    if (p.pfi_missing) {
      row.pfi = std::nullopt;
    } else if (pfi.count(p.code)) {
      row.pfi = pfi[p.code];
    } else {
      // Tier C (never analyzed): plausible values around the middle.
      row.pfi = std::min(99.5,
                         std::max(0.5, 50.0 + psd::truncated_normal(
                                                  rng, 15.0, 33.0)));
    }
    row.cellular_per_100 = 20.0 + 110.0 * rng.next_double();
    row.gdp_per_capita = std::exp(rng.next_normal(8.5, 1.0));
    row.population = std::exp(rng.next_normal(16.0, 1.5));
    row.unemployment_pct = 2.0 + 23.0 * rng.next_double();
    if (p.pfi_missing) fix.pfi_missing.push_back(p.code);
    fix.indicators.push_back(std::move(row));
  }

  // --- panel response ------------------------------------------------------
  // p_{c,w} = pfi_c + slope * (log U_w - mean_w log U_w) + noise, so the
  // within-country slope is the planted value exactly (up to noise).
  const auto& observed = fix.corpus.observed_dates();
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const auto& p = plans[i];
    if (p.tier != psd::kTierA || p.pfi_missing) continue;
    std::array<double, psd::kWindows> lu{};
    double mean_lu = 0;
    for (int w = 0; w < psd::kWindows; ++w) {
      lu[static_cast<std::size_t>(w)] = std::log(
          static_cast<double>(built[i].u_window[static_cast<std::size_t>(w)]));
      mean_lu += lu[static_cast<std::size_t>(w)];
    }
    mean_lu /= psd::kWindows;
    Rng rng = root.child(0xF0000u + static_cast<std::uint64_t>(i));
    for (int w = 0; w < psd::kWindows; ++w) {
      PanelPfiRow row;
      row.country = p.code;
      row.window_start =
          observed[static_cast<std::size_t>(w * psd::kWindowLen)];
      row.window_end =
          observed[static_cast<std::size_t>(w * psd::kWindowLen +
                                            psd::kWindowLen - 1)];
      const double v = pfi[p.code] +
                       psd::kPanelSlope *
                           (lu[static_cast<std::size_t>(w)] - mean_lu) +
                       psd::truncated_normal(rng, 2.5, 5.5);
      if (v < 0.5)
        throw ComputationError("fixture panel PFI went negative; reseed");
      row.pfi = v;
      fix.panel.push_back(std::move(row));
    }
  }
  fix.panel_slope = psd::kPanelSlope;
  return fix;
}

/// Writes the fixture as a standard corpus directory: snapshots/<CC>.jsonl,
/// indicators.csv, indicators_panel.csv and a FIXTURE.json manifest that
/// labels the data as synthetic.
inline void write_planted_fixture(const PlantedFixture& fix,
                              const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "snapshots");
  std::string buf;
  for (const auto& [code, days] : fix.corpus.snapshots()) {
    buf.clear();
    buf.reserve(days.size() * 12000);
    for (const auto& [date, snap] : days) {
      serialize_snapshot_record(snap, buf);
      buf += '\n';
    }
    std::ofstream out(out_dir / "snapshots" / (code + ".jsonl"),
                      std::ios::binary);
    if (!out) throw IoError("cannot write fixture snapshots for " + code);
    out << buf;
  }
  write_indicators_file((out_dir / "indicators.csv").string(),
                        fix.indicators);
  {
    std::ofstream out(out_dir / "indicators_panel.csv");
    if (!out) throw IoError("cannot write fixture panel file");
    write_panel_pfi(out, fix.panel);
  }
  nlohmann::json meta;
  meta["label"] = "synthetic planted fixture";
  meta["seed"] = fix.seed;
  meta["countries"] = fix.corpus.country_count();
  meta["observed_days"] = fix.corpus.day_count();
  meta["pfi_missing"] = fix.pfi_missing;
  meta["achieved_r"] = {{"k10", fix.r10}, {"k50", fix.r50}, {"k90", fix.r90}};
  meta["panel_slope"] = fix.panel_slope;
  std::ofstream meta_out(out_dir / "FIXTURE.json");
  if (!meta_out) throw IoError("cannot write FIXTURE.json");
  meta_out << meta.dump(2) << '\n';
}

}  // namespace madpfi

#endif  // MADPFI_PLANTED_FIXTURE_HPP
