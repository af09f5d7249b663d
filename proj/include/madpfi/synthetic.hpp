// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_SYNTHETIC_HPP
#define MADPFI_SYNTHETIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "madpfi/corpus.hpp"
#include "madpfi/errors.hpp"
#include "madpfi/indicators.hpp"
#include "madpfi/iso_countries.hpp"
#include "madpfi/rng.hpp"

namespace madpfi {

/// Parameters for the generic seeded corpus generator. Output is
/// byte-identical for identical parameter sets.
struct SynthParams {
  int countries = 5;
  int days = 10;
  int topics_per_day = 20;       // <= 100
  int topic_pool_size = 100;     // per country; >= topics_per_day
  double reuse_probability = 0.5;  // chance a slot repeats a seen topic
  double coupling = 0.0;         // slope of synthetic PFI on log diversity
  double noise_sd = 1.0;
  int comentions_per_topic = 3;
  Date start_date{2016, 3, 7};
  std::uint64_t seed = 1;
};

namespace detail {

inline void validate_params(const SynthParams& p) {
  if (p.countries < 1 || p.countries > 249)
    throw ValidationError("countries must be in 1..249");
  if (p.days < 1) throw ValidationError("days must be >= 1");
  if (p.topics_per_day < 1 || p.topics_per_day > 100)
    throw ValidationError("topics_per_day must be in 1..100");
  if (p.topic_pool_size < p.topics_per_day)
    throw ValidationError("topic_pool_size must be >= topics_per_day");
  if (p.reuse_probability < 0 || p.reuse_probability > 1)
    throw ValidationError("reuse_probability must be in [0,1]");
  if (p.comentions_per_topic < 0)
    throw ValidationError("comentions_per_topic must be >= 0");
  if (p.noise_sd < 0) throw ValidationError("noise_sd must be >= 0");
}

inline std::string synth_topic_id(std::string_view country, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*s-t%05d",
                static_cast<int>(country.size()), country.data(), index);
  return buf;
}

}  // namespace detail

/// Seeded corpus: each country draws daily ranked lists from its own topic
/// pool. reuse_probability 0 consumes fresh topics only (maximal unions);
/// pool == topics_per_day repeats the identical list daily (minimal unions).
inline Corpus gen_corpus(const SynthParams& params) {
  detail::validate_params(params);
  const auto codes = iso_country_codes();
  std::vector<DailySnapshot> snaps;
  snaps.reserve(static_cast<std::size_t>(params.countries) * params.days);
  const Rng root(params.seed);

  for (int c = 0; c < params.countries; ++c) {
    const std::string code(codes[static_cast<std::size_t>(c)]);
    Rng rng = root.child(static_cast<std::uint64_t>(c));
    std::vector<std::string> pool;
    pool.reserve(static_cast<std::size_t>(params.topic_pool_size));
    for (int j = 0; j < params.topic_pool_size; ++j)
      pool.push_back(detail::synth_topic_id(code, j + 1));

    const bool fixed_list = params.topic_pool_size == params.topics_per_day;
    std::vector<int> fresh_order(pool.size());
    std::iota(fresh_order.begin(), fresh_order.end(), 0);
    if (!fixed_list) rng.shuffle(fresh_order);
    std::size_t cursor = 0;
    std::vector<int> used;

    for (int d = 0; d < params.days; ++d) {
      DailySnapshot snap;
      snap.country = code;
      snap.date = params.start_date.plus_days(d);
      snap.mentions.reserve(static_cast<std::size_t>(params.topics_per_day));
      std::unordered_set<int> in_day;

      for (int s = 0; s < params.topics_per_day; ++s) {
        int idx = -1;
        if (fixed_list) {
          idx = s;  // identical ranked list every day
        } else {
          const bool fresh_left = cursor < fresh_order.size();
          const bool want_reuse =
              !used.empty() &&
              (!fresh_left || rng.next_double() < params.reuse_probability);
          if (want_reuse) {
            for (int attempt = 0; attempt < 50 && idx < 0; ++attempt) {
              const int cand =
                  used[static_cast<std::size_t>(rng.next_below(used.size()))];
              if (!in_day.count(cand)) idx = cand;
            }
          }
          if (idx < 0 && fresh_left) {
            idx = fresh_order[cursor++];
            used.push_back(idx);
          }
          if (idx < 0) {
            // Reuse draws kept colliding; scan for any unused-today topic.
            for (int cand = 0; cand < params.topic_pool_size; ++cand) {
              if (!in_day.count(cand)) {
                idx = cand;
                break;
              }
            }
          }
        }
        in_day.insert(idx);
        TopicMention m;
        m.topic = pool[static_cast<std::size_t>(idx)];
        m.rank = s + 1;
        m.comentions.reserve(
            static_cast<std::size_t>(params.comentions_per_topic));
        for (int q = 1; q <= params.comentions_per_topic; ++q)
          m.comentions.push_back(m.topic + "-c" + std::to_string(q));
        snap.mentions.push_back(std::move(m));
      }
      snaps.push_back(std::move(snap));
    }
  }
  return Corpus::from_snapshots(std::move(snaps));
}

namespace detail {

inline double region_offset(std::string_view country) {
  const auto r = region_of(country);
  if (!r) return 0.0;
  switch (*r) {
    case Region::africa: return 4.0;
    case Region::americas: return -2.0;
    case Region::asia: return 3.0;
    case Region::europe: return -5.0;
    case Region::oceania: return 0.0;
  }
  return 0.0;
}

/// log U^c(min(90, country depth)) computed directly from raw snapshots.
inline double log_diversity_driver(
    const std::map<Date, DailySnapshot>& days) {
  std::size_t depth = 100;
  for (const auto& [date, snap] : days)
    depth = std::min(depth, snap.mentions.size());
  const std::size_t k = std::min<std::size_t>(90, depth);
  std::unordered_set<std::string_view> topics;
  for (const auto& [date, snap] : days)
    for (std::size_t i = 0; i < k; ++i)
      topics.insert(snap.mentions[i].topic);
  return std::log(static_cast<double>(std::max<std::size_t>(1, topics.size())));
}

}  // namespace detail

/// Synthetic indicators: PFI = 50 + coupling * (log U - mean log U)
/// + region effect + Gaussian noise, clamped at 0.01 to stay a valid PFI.
/// noise_sd = 0 is the fully deterministic mode: the region effect is
/// dropped too, so PFI is an exact linear function of log diversity.
/// The remaining attributes are mutually independent draws, keeping their
/// VIFs near 1.
inline std::vector<CountryIndicators> gen_indicators(const Corpus& corpus,
                                                     double coupling,
                                                     double noise_sd,
                                                     std::uint64_t seed) {
  if (corpus.empty()) throw ValidationError("corpus is empty");
  if (noise_sd < 0) throw ValidationError("noise_sd must be >= 0");

  std::vector<std::pair<std::string, double>> drivers;
  for (const auto& [code, days] : corpus.snapshots())
    drivers.emplace_back(code, detail::log_diversity_driver(days));
  double mean_z = 0;
  for (const auto& [code, z] : drivers) mean_z += z;
  mean_z /= static_cast<double>(drivers.size());

  const Rng root(seed);
  std::vector<CountryIndicators> out;
  out.reserve(drivers.size());
  for (std::size_t i = 0; i < drivers.size(); ++i) {
    const auto& [code, z] = drivers[i];
    Rng rng = root.child(i);
    CountryIndicators row;
    row.country = code;
    double raw = 50.0 + coupling * (z - mean_z);
    if (noise_sd > 0)
      raw += detail::region_offset(code) + rng.next_normal(0.0, noise_sd);
    row.pfi = std::max(0.01, raw);
    row.cellular_per_100 = 20.0 + 110.0 * rng.next_double();
    row.gdp_per_capita = std::exp(rng.next_normal(8.5, 1.0));
    row.population = std::exp(rng.next_normal(16.0, 1.5));
    row.unemployment_pct = 2.0 + 23.0 * rng.next_double();
    out.push_back(std::move(row));
  }
  return out;
}

/// ANOVA estimator for the balanced one-way random-effects layout:
/// sigma^2 = MSW, sigma_b^2 = max(0, (MSB - MSW)/n_per). Coincides with
/// REML whenever the between-group estimate is interior (MSB > MSW).
inline std::pair<double, double> closed_form_oneway_reml(
    const std::vector<double>& y, const std::vector<int>& groups) {
  if (y.size() != groups.size())
    throw ValidationError("y and groups must have equal length");
  std::map<int, std::vector<double>> by_group;
  for (std::size_t i = 0; i < y.size(); ++i)
    by_group[groups[i]].push_back(y[i]);
  const std::size_t q = by_group.size();
  if (q < 2) throw ValidationError("need at least 2 groups");
  const std::size_t n_per = by_group.begin()->second.size();
  if (n_per < 2) throw ValidationError("need at least 2 rows per group");
  for (const auto& [g, vals] : by_group)
    if (vals.size() != n_per)
      throw ValidationError("oracle requires a balanced design; group " +
                            std::to_string(g) + " has " +
                            std::to_string(vals.size()) + " rows, expected " +
                            std::to_string(n_per));

  const double n = static_cast<double>(y.size());
  double grand = 0;
  for (double v : y) grand += v;
  grand /= n;

  double ssw = 0, ssb = 0;
  for (const auto& [g, vals] : by_group) {
    double gm = 0;
    for (double v : vals) gm += v;
    gm /= static_cast<double>(vals.size());
    for (double v : vals) ssw += (v - gm) * (v - gm);
    ssb += static_cast<double>(vals.size()) * (gm - grand) * (gm - grand);
  }
  const double msw = ssw / (n - static_cast<double>(q));
  const double msb = ssb / (static_cast<double>(q) - 1.0);
  const double sigma2 = msw;
  const double sigma_b2 =
      std::max(0.0, (msb - msw) / static_cast<double>(n_per));
  return {sigma_b2, sigma2};
}

}  // namespace madpfi

#endif  // MADPFI_SYNTHETIC_HPP
