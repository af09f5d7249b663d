// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_DIVERSITY_HPP
#define MADPFI_DIVERSITY_HPP

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "madpfi/errors.hpp"
#include "madpfi/filter.hpp"

namespace madpfi {

/// A (topic, co-mention) pair. A mention without co-mentions contributes
/// the sentinel pair (topic, topic) so a topic never counts as zero
/// subtopics; genuine pairs always have comention != topic.
struct SubtopicKey {
  TopicId topic;
  TopicId comention;

  auto operator<=>(const SubtopicKey&) const = default;
};

/// U value for one (country, window) cell.
struct DiversityRecord {
  std::string country;
  int k = 0;
  std::optional<int> l;  // absent = topic-level
  DateInterval window;
  unsigned long long value = 0;
};

/// The k highest-ranked topics of one snapshot.
inline std::set<TopicId> top_k_topics(const DailySnapshot& snapshot, int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (snapshot.mentions.size() < static_cast<std::size_t>(k))
    throw ValidationError(
        "snapshot for '" + snapshot.country + "' on " +
        snapshot.date.to_string() + " has only " +
        std::to_string(snapshot.mentions.size()) + " topics, need " +
        std::to_string(k));
  std::set<TopicId> out;
  for (int i = 0; i < k; ++i) out.insert(snapshot.mentions[i].topic);
  return out;
}

/// Subtopic keys of one mention under the first min(l, available)
/// co-mentions; sentinel self-pair when there are none.
inline std::vector<SubtopicKey> subtopic_keys(const TopicMention& mention,
                                              int l) {
  if (l < 1) throw ValidationError("l must be >= 1");
  std::vector<SubtopicKey> out;
  if (mention.comentions.empty()) {
    out.push_back({mention.topic, mention.topic});
    return out;
  }
  const std::size_t take =
      std::min<std::size_t>(l, mention.comentions.size());
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i)
    out.push_back({mention.topic, mention.comentions[i]});
  return out;
}

namespace detail {

/// Observed dates falling inside the window. Throws if none do.
inline std::pair<std::size_t, std::size_t> window_date_span(
    const std::vector<Date>& observed, const DateInterval& window) {
  if (window.last < window.first)
    throw ValidationError("window end precedes window start");
  const auto lo = std::lower_bound(observed.begin(), observed.end(),
                                   window.first);
  const auto hi = std::upper_bound(observed.begin(), observed.end(),
                                   window.last);
  if (lo >= hi)
    throw ValidationError("window " + window.first.to_string() + ".." +
                          window.last.to_string() +
                          " contains no observed dates");
  return {static_cast<std::size_t>(lo - observed.begin()),
          static_cast<std::size_t>(hi - observed.begin())};
}

struct SvPairHash {
  std::size_t operator()(
      const std::pair<std::string_view, std::string_view>& p) const {
    const std::size_t h1 = std::hash<std::string_view>{}(p.first);
    const std::size_t h2 = std::hash<std::string_view>{}(p.second);
    return h1 ^ (h2 + 0x9e3779b97f4a7c15ull + (h1 << 6) + (h1 >> 2));
  }
};

}  // namespace detail

/// U^c(k) over the window: cardinality of the union of the country's
/// per-day top-k topic sets. The full-range window gives the headline
/// per-country diversity value.
inline unsigned long long topic_diversity(const FilteredDataset& dataset,
                                          std::string_view country,
                                          const DateInterval& window) {
  const auto& observed = dataset.dates();
  const auto [lo, hi] = detail::window_date_span(observed, window);
  std::unordered_set<std::string_view> topics;
  topics.reserve(static_cast<std::size_t>(dataset.k()) * 4);
  for (std::size_t i = lo; i < hi; ++i)
    for (const auto& m : dataset.top_k(country, observed[i]))
      topics.insert(m.topic);
  return topics.size();
}

/// Subtopic-level U: union of (topic, co-mention) keys, l co-mentions per
/// topic, over the window's top-k mentions.
inline unsigned long long subtopic_diversity(const FilteredDataset& dataset,
                                             std::string_view country, int l,
                                             const DateInterval& window) {
  if (l < 1) throw ValidationError("l must be >= 1");
  const auto& observed = dataset.dates();
  const auto [lo, hi] = detail::window_date_span(observed, window);
  std::unordered_set<std::pair<std::string_view, std::string_view>,
                     detail::SvPairHash>
      keys;
  keys.reserve(static_cast<std::size_t>(dataset.k()) * l * 4);
  for (std::size_t i = lo; i < hi; ++i) {
    for (const auto& m : dataset.top_k(country, observed[i])) {
      if (m.comentions.empty()) {
        keys.emplace(m.topic, m.topic);
        continue;
      }
      const std::size_t take =
          std::min<std::size_t>(l, m.comentions.size());
      for (std::size_t j = 0; j < take; ++j)
        keys.emplace(m.topic, m.comentions[j]);
    }
  }
  return keys.size();
}

/// Window construction over the observed-date set.
struct WindowSpec {
  enum class Mode { full, monthly, days } mode = Mode::full;
  int n = 0;  // chunk length for Mode::days

  static WindowSpec parse(std::string_view text) {
    if (text == "full") return {Mode::full, 0};
    if (text == "monthly") return {Mode::monthly, 0};
    if (text.rfind("days:", 0) == 0) {
      int n = 0;
      for (char c : text.substr(5)) {
        if (c < '0' || c > '9')
          throw ValidationError("bad window spec '" + std::string(text) +
                                "'");
        n = n * 10 + (c - '0');
      }
      if (n < 1)
        throw ValidationError("window days must be >= 1");
      return {Mode::days, n};
    }
    throw ValidationError("unknown window spec '" + std::string(text) +
                          "' (expected full|monthly|days:N)");
  }
};

/// Partitions the observed dates into windows. "monthly" means blocks of
/// 30 observed dates; days:N means blocks of N. A trailing block shorter
/// than the block length is dropped so all windows are comparable.
inline std::vector<DateInterval> make_windows(
    const std::vector<Date>& observed, const WindowSpec& spec) {
  if (observed.empty())
    throw ValidationError("cannot build windows over an empty date set");
  if (spec.mode == WindowSpec::Mode::full)
    return {DateInterval{observed.front(), observed.back()}};
  const std::size_t len =
      spec.mode == WindowSpec::Mode::monthly
          ? 30
          : static_cast<std::size_t>(spec.n);
  if (observed.size() < len)
    throw ValidationError("window length " + std::to_string(len) +
                          " exceeds the " + std::to_string(observed.size()) +
                          " observed dates");
  std::vector<DateInterval> out;
  for (std::size_t start = 0; start + len <= observed.size(); start += len)
    out.push_back({observed[start], observed[start + len - 1]});
  return out;
}

/// One record per (country, window), ordered by (country, window start).
/// l absent = topic-level values; l present = subtopic-level.
inline std::vector<DiversityRecord> diversity_table(
    const FilteredDataset& dataset, std::optional<int> l,
    const std::vector<DateInterval>& windows) {
  if (windows.empty())
    throw ValidationError("diversity table needs at least one window");
  const auto& observed = dataset.dates();
  for (std::size_t i = 0; i < windows.size(); ++i) {
    detail::window_date_span(observed, windows[i]);  // rejects empty windows
    if (i > 0 && !(windows[i - 1].last < windows[i].first))
      throw ValidationError("windows must be disjoint and ordered");
  }
  if (l && *l < 1) throw ValidationError("l must be >= 1");
  std::vector<DiversityRecord> out;
  out.reserve(dataset.countries().size() * windows.size());
  for (const auto& country : dataset.countries()) {
    for (const auto& w : windows) {
      DiversityRecord rec;
      rec.country = country;
      rec.k = dataset.k();
      rec.l = l;
      rec.window = w;
      rec.value = l ? subtopic_diversity(dataset, country, *l, w)
                    : topic_diversity(dataset, country, w);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace madpfi

#endif  // MADPFI_DIVERSITY_HPP
