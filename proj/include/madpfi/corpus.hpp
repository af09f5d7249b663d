// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_CORPUS_HPP
#define MADPFI_CORPUS_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "madpfi/dates.hpp"
#include "madpfi/errors.hpp"
#include "madpfi/iso_countries.hpp"
#include "madpfi/text.hpp"

namespace madpfi {

using TopicId = std::string;

/// One ranked topic with its ordered co-mentions (most frequent first).
struct TopicMention {
  TopicId topic;
  int rank = 0;  // 1..100
  std::vector<TopicId> comentions;

  bool operator==(const TopicMention&) const = default;
};

/// One country's ranked topic list for one calendar date.
struct DailySnapshot {
  std::string country;
  Date date;
  std::vector<TopicMention> mentions;  // ranks strictly 1..|mentions|

  bool operator==(const DailySnapshot&) const = default;
};

namespace detail {

inline void validate_snapshot(const DailySnapshot& snap,
                              const std::string& context) {
  if (snap.country.empty())
    throw ValidationError(context + "missing country code");
  if (snap.mentions.size() > 100)
    throw ValidationError(context + "snapshot has " +
                          std::to_string(snap.mentions.size()) +
                          " topics, limit is 100");
  std::unordered_set<std::string_view> seen;
  seen.reserve(snap.mentions.size() * 2);
  int expected = 1;
  for (const auto& m : snap.mentions) {
    if (m.topic.empty())
      throw ValidationError(context + "empty topic id at rank " +
                            std::to_string(expected));
    if (m.rank != expected)
      throw ValidationError(context + "rank sequence broken at topic '" +
                            m.topic + "': expected " +
                            std::to_string(expected) + ", got " +
                            std::to_string(m.rank));
    if (!seen.insert(m.topic).second)
      throw ValidationError(context + "duplicate topic '" + m.topic + "'");
    std::unordered_set<std::string_view> cm_seen;
    cm_seen.reserve(m.comentions.size() * 2);
    for (const auto& c : m.comentions) {
      if (c.empty())
        throw ValidationError(context + "empty co-mention under topic '" +
                              m.topic + "'");
      if (c == m.topic)
        throw ValidationError(context + "topic '" + m.topic +
                              "' lists itself as a co-mention");
      if (!cm_seen.insert(c).second)
        throw ValidationError(context + "duplicate co-mention '" + c +
                              "' under topic '" + m.topic + "'");
    }
    ++expected;
  }
}

}  // namespace detail

/// Parses one JSON Lines snapshot record:
///   {"country":"EG","date":"2016-03-07","topics":[{"id":...,"name":...,
///    "comentions":[...]}]}
/// Topics arrive in rank order; an explicit "rank" field, when present,
/// must equal the 1-based position. Identifiers are trimmed and
/// NFC-normalized before comparison.
inline DailySnapshot parse_snapshot_record(std::string_view record,
                                           const std::string& file = "",
                                           std::size_t lineno = 0) {
  auto fail = [&](const std::string& msg) -> ParseError {
    if (file.empty() && lineno == 0) return ParseError(msg);
    return ParseError(file, lineno, msg);
  };
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(record, nullptr, true);
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw fail("record is not a JSON object");
  if (!j.contains("country") || !j["country"].is_string())
    throw fail("missing string field 'country'");
  if (!j.contains("date") || !j["date"].is_string())
    throw fail("missing string field 'date'");
  if (!j.contains("topics") || !j["topics"].is_array())
    throw fail("missing array field 'topics'");

  DailySnapshot snap;
  snap.country = canonical_text(j["country"].get<std::string>());
  try {
    snap.date = Date::parse(j["date"].get<std::string>());
  } catch (const ValidationError& e) {
    throw fail(e.what());
  }
  snap.mentions.reserve(j["topics"].size());
  int pos = 0;
  for (const auto& t : j["topics"]) {
    ++pos;
    if (!t.is_object())
      throw fail("topics[" + std::to_string(pos - 1) + "] is not an object");
    TopicMention m;
    if (t.contains("id") && t["id"].is_string())
      m.topic = canonical_text(t["id"].get<std::string>());
    else if (t.contains("name") && t["name"].is_string())
      m.topic = canonical_text(t["name"].get<std::string>());
    else
      throw fail("topics[" + std::to_string(pos - 1) +
                 "] has neither string 'id' nor string 'name'");
    if (t.contains("rank")) {
      if (!t["rank"].is_number_integer())
        throw fail("topic '" + m.topic + "' has a non-integer rank");
      const long r = t["rank"].get<long>();
      if (r != pos)
        throw fail("topic '" + m.topic + "' has rank " + std::to_string(r) +
                   " at position " + std::to_string(pos));
    }
    m.rank = pos;
    if (t.contains("comentions")) {
      if (!t["comentions"].is_array())
        throw fail("topic '" + m.topic + "' has non-array comentions");
      m.comentions.reserve(t["comentions"].size());
      for (const auto& c : t["comentions"]) {
        if (!c.is_string())
          throw fail("topic '" + m.topic + "' has a non-string co-mention");
        m.comentions.push_back(canonical_text(c.get<std::string>()));
      }
    }
    snap.mentions.push_back(std::move(m));
  }
  std::string context;
  if (!file.empty() || lineno)
    context = file + ":" + std::to_string(lineno) + ": ";
  try {
    detail::validate_snapshot(snap, context);
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
  return snap;
}

namespace detail {

inline void append_json_string(std::string& out, std::string_view s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x",
                        static_cast<unsigned>(static_cast<unsigned char>(c)));
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

}  // namespace detail

/// Inverse of parse_snapshot_record; emits compact JSON with explicit ranks.
/// Appends to `out` (string building is the hot path when dumping large
/// synthetic corpora).
inline void serialize_snapshot_record(const DailySnapshot& snap,
                                      std::string& out) {
  out += "{\"country\":";
  detail::append_json_string(out, snap.country);
  out += ",\"date\":\"";
  out += snap.date.to_string();
  out += "\",\"topics\":[";
  bool first = true;
  for (const auto& m : snap.mentions) {
    if (!first) out += ',';
    first = false;
    out += "{\"id\":";
    detail::append_json_string(out, m.topic);
    out += ",\"rank\":";
    out += std::to_string(m.rank);
    out += ",\"comentions\":[";
    for (std::size_t i = 0; i < m.comentions.size(); ++i) {
      if (i) out += ',';
      detail::append_json_string(out, m.comentions[i]);
    }
    out += "]}";
  }
  out += "]}";
}

inline std::string serialize_snapshot_record(const DailySnapshot& snap) {
  std::string out;
  out.reserve(64 + snap.mentions.size() * 96);
  serialize_snapshot_record(snap, out);
  return out;
}

/// Immutable snapshot collection. Copies share the underlying data.
class Corpus {
 public:
  using DateMap = std::map<Date, DailySnapshot>;
  using CountryMap = std::map<std::string, DateMap>;

  Corpus() : data_(std::make_shared<const Data>()) {}

  static Corpus from_snapshots(std::vector<DailySnapshot> snaps,
                               std::size_t* duplicate_count = nullptr) {
    auto data = std::make_shared<Data>();
    std::size_t dups = 0;
    for (auto& s : snaps) {
      detail::validate_snapshot(s, "");
      auto [it, inserted] =
          data->by_country[s.country].try_emplace(s.date, DailySnapshot{});
      if (!inserted) ++dups;
      it->second = std::move(s);  // last record wins
    }
    if (duplicate_count) *duplicate_count = dups;
    data->finalize();
    return Corpus(std::move(data));
  }

  const CountryMap& snapshots() const { return data_->by_country; }

  const DateMap* country(std::string_view code) const {
    auto it = data_->by_country.find(std::string(code));
    return it == data_->by_country.end() ? nullptr : &it->second;
  }

  const DailySnapshot* at(std::string_view code, const Date& d) const {
    const DateMap* m = country(code);
    if (!m) return nullptr;
    auto it = m->find(d);
    return it == m->end() ? nullptr : &it->second;
  }

  /// Distinct observed dates, ascending (the set D).
  const std::vector<Date>& observed_dates() const { return data_->dates; }

  /// Inclusive span of observed dates.
  DateInterval date_range() const {
    if (data_->dates.empty()) return {};
    return {data_->dates.front(), data_->dates.back()};
  }

  std::size_t country_count() const { return data_->by_country.size(); }
  std::size_t day_count() const { return data_->dates.size(); }
  std::size_t snapshot_count() const { return data_->snapshot_count; }
  bool empty() const { return data_->by_country.empty(); }

 private:
  struct Data {
    CountryMap by_country;
    std::vector<Date> dates;
    std::size_t snapshot_count = 0;

    void finalize() {
      std::set<Date> seen;
      snapshot_count = 0;
      for (const auto& [code, days] : by_country) {
        snapshot_count += days.size();
        for (const auto& [d, snap] : days) seen.insert(d);
      }
      dates.assign(seen.begin(), seen.end());
    }
  };

  explicit Corpus(std::shared_ptr<const Data> data)
      : data_(std::move(data)) {}

  std::shared_ptr<const Data> data_;
};

struct LoadStats {
  std::size_t files = 0;
  std::size_t records = 0;
  std::size_t duplicates = 0;  // (country,date) collisions, last record wins
  std::vector<std::string> unknown_countries;  // accepted with a warning
};

namespace detail {

inline void load_snapshot_stream(std::istream& in, const std::string& name,
                                 std::vector<DailySnapshot>& out,
                                 LoadStats& stats) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = trim(line);
    if (body.empty()) continue;
    out.push_back(parse_snapshot_record(body, name, lineno));
    ++stats.records;
  }
}

}  // namespace detail

/// Loads every *.jsonl / *.json file under `path` (or `path` itself if it is
/// a file). Files are read in sorted path order so duplicate resolution is
/// reproducible.
inline Corpus load_corpus(const std::filesystem::path& path,
                          LoadStats* stats_out = nullptr) {
  namespace fs = std::filesystem;
  LoadStats stats;
  std::vector<fs::path> files;
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
      if (!entry.is_regular_file()) continue;
      const auto ext = entry.path().extension().string();
      if (ext == ".jsonl" || ext == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path, ec)) {
    files.push_back(path);
  } else {
    throw IoError("snapshot path '" + path.string() +
                  "' is not a readable file or directory");
  }
  if (files.empty())
    throw IoError("no snapshot files (*.jsonl) under '" + path.string() +
                  "'");

  std::vector<DailySnapshot> snaps;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw IoError("cannot open '" + f.string() + "' for reading");
    detail::load_snapshot_stream(in, f.string(), snaps, stats);
    ++stats.files;
  }
  if (snaps.empty())
    throw ValidationError("empty corpus: no snapshot records under '" +
                          path.string() + "'");

  std::set<std::string> unknown;
  for (const auto& s : snaps)
    if (!is_iso_country(s.country)) unknown.insert(s.country);
  stats.unknown_countries.assign(unknown.begin(), unknown.end());

  Corpus corpus = Corpus::from_snapshots(std::move(snaps), &stats.duplicates);
  if (stats_out) *stats_out = stats;
  return corpus;
}

struct CorpusSummary {
  std::map<std::string, std::size_t> days_per_country;
  std::map<std::size_t, std::size_t> topic_count_histogram;  // size → days
  std::size_t snapshot_count = 0;
  std::size_t distinct_dates = 0;
};

inline CorpusSummary corpus_summary(const Corpus& corpus) {
  CorpusSummary s;
  for (const auto& [code, days] : corpus.snapshots()) {
    s.days_per_country[code] = days.size();
    for (const auto& [d, snap] : days)
      ++s.topic_count_histogram[snap.mentions.size()];
  }
  s.snapshot_count = corpus.snapshot_count();
  s.distinct_dates = corpus.day_count();
  return s;
}

}  // namespace madpfi

#endif  // MADPFI_CORPUS_HPP
