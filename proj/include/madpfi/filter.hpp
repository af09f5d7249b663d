// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_FILTER_HPP
#define MADPFI_FILTER_HPP

#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "madpfi/corpus.hpp"
#include "madpfi/errors.hpp"

namespace madpfi {

namespace detail {

struct CountryDepth {
  bool all_days = false;        // has a snapshot on every observed date
  std::size_t min_mentions = 0; // over this country's own snapshots
};

inline std::map<std::string, CountryDepth, std::less<>> country_depths(
    const Corpus& corpus) {
  std::map<std::string, CountryDepth, std::less<>> out;
  const std::size_t total_days = corpus.day_count();
  for (const auto& [code, days] : corpus.snapshots()) {
    CountryDepth d;
    d.all_days = days.size() == total_days;
    d.min_mentions = std::numeric_limits<std::size_t>::max();
    for (const auto& [date, snap] : days)
      d.min_mentions = std::min(d.min_mentions, snap.mentions.size());
    out.emplace(code, d);
  }
  return out;
}

inline void check_k(int k) {
  if (k < 1 || k > 100)
    throw ValidationError("k must be in 1..100, got " + std::to_string(k));
}

}  // namespace detail

/// C^k: countries holding at least k ranked topics on every observed date.
/// D is the corpus's distinct observed-date set, not the calendar span.
inline std::vector<std::string> eligible_countries(const Corpus& corpus,
                                                   int k) {
  detail::check_k(k);
  std::vector<std::string> out;
  for (const auto& [code, depth] : detail::country_depths(corpus))
    if (depth.all_days && depth.min_mentions >= static_cast<std::size_t>(k))
      out.push_back(code);
  return out;
}

/// |C^k| for each requested k, in input order.
inline std::vector<std::pair<int, std::size_t>> survival_curve(
    const Corpus& corpus, const std::vector<int>& ks) {
  if (ks.empty()) throw ValidationError("survival curve needs at least one k");
  for (int k : ks) detail::check_k(k);
  const auto depths = detail::country_depths(corpus);
  std::vector<std::pair<int, std::size_t>> out;
  out.reserve(ks.size());
  for (int k : ks) {
    std::size_t count = 0;
    for (const auto& [code, depth] : depths)
      if (depth.all_days && depth.min_mentions >= static_cast<std::size_t>(k))
        ++count;
    out.emplace_back(k, count);
  }
  return out;
}

/// M(k): the top-k dataset over C^k. Holds a shared view of the corpus;
/// per-day top-k sets are exposed as prefixes of the stored rank-ordered
/// mention lists, so no topic data is copied.
class FilteredDataset {
 public:
  FilteredDataset(Corpus corpus, int k)
      : corpus_(std::move(corpus)), k_(k),
        countries_(eligible_countries(corpus_, k)) {}

  int k() const { return k_; }
  const Corpus& corpus() const { return corpus_; }
  const std::vector<std::string>& countries() const { return countries_; }
  const std::vector<Date>& dates() const { return corpus_.observed_dates(); }

  bool contains(std::string_view country) const {
    return std::binary_search(countries_.begin(), countries_.end(), country,
                              std::less<>{});
  }

  /// The k highest-ranked mentions of `country` on `date`.
  std::span<const TopicMention> top_k(std::string_view country,
                                      const Date& date) const {
    if (!contains(country))
      throw ValidationError("country '" + std::string(country) +
                            "' is not in C^" + std::to_string(k_));
    const DailySnapshot* snap = corpus_.at(country, date);
    if (!snap)
      throw ValidationError("no snapshot for '" + std::string(country) +
                            "' on " + date.to_string());
    return {snap->mentions.data(), static_cast<std::size_t>(k_)};
  }

 private:
  Corpus corpus_;
  int k_;
  std::vector<std::string> countries_;
};

inline FilteredDataset build_topk_dataset(const Corpus& corpus, int k) {
  detail::check_k(k);
  return FilteredDataset(corpus, k);
}

}  // namespace madpfi

#endif  // MADPFI_FILTER_HPP
