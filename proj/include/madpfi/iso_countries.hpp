// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_ISO_COUNTRIES_HPP
#define MADPFI_ISO_COUNTRIES_HPP

#include <algorithm>
#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace madpfi {

enum class Region : unsigned char {
  africa = 0,
  americas = 1,
  asia = 2,
  europe = 3,
  oceania = 4,
};

constexpr std::string_view region_name(Region r) {
  switch (r) {
    case Region::africa: return "Africa";
    case Region::americas: return "Americas";
    case Region::asia: return "Asia";
    case Region::europe: return "Europe";
    case Region::oceania: return "Oceania";
  }
  return "?";
}

constexpr std::size_t kRegionCount = 5;

namespace detail {

struct CountryEntry {
  char code[3];
  Region region;
};

// The 249 officially assigned ISO 3166-1 alpha-2 codes, sorted. Continental
// assignment follows the UN geoscheme; uninhabited territories take the
// region of the nearest landmass.
inline constexpr std::array<CountryEntry, 249> kCountries{{
    {"AD", Region::europe},   {"AE", Region::asia},
    {"AF", Region::asia},     {"AG", Region::americas},
    {"AI", Region::americas}, {"AL", Region::europe},
    {"AM", Region::asia},     {"AO", Region::africa},
    {"AQ", Region::oceania},  {"AR", Region::americas},
    {"AS", Region::oceania},  {"AT", Region::europe},
    {"AU", Region::oceania},  {"AW", Region::americas},
    {"AX", Region::europe},   {"AZ", Region::asia},
    {"BA", Region::europe},   {"BB", Region::americas},
    {"BD", Region::asia},     {"BE", Region::europe},
    {"BF", Region::africa},   {"BG", Region::europe},
    {"BH", Region::asia},     {"BI", Region::africa},
    {"BJ", Region::africa},   {"BL", Region::americas},
    {"BM", Region::americas}, {"BN", Region::asia},
    {"BO", Region::americas}, {"BQ", Region::americas},
    {"BR", Region::americas}, {"BS", Region::americas},
    {"BT", Region::asia},     {"BV", Region::americas},
    {"BW", Region::africa},   {"BY", Region::europe},
    {"BZ", Region::americas}, {"CA", Region::americas},
    {"CC", Region::oceania},  {"CD", Region::africa},
    {"CF", Region::africa},   {"CG", Region::africa},
    {"CH", Region::europe},   {"CI", Region::africa},
    {"CK", Region::oceania},  {"CL", Region::americas},
    {"CM", Region::africa},   {"CN", Region::asia},
    {"CO", Region::americas}, {"CR", Region::americas},
    {"CU", Region::americas}, {"CV", Region::africa},
    {"CW", Region::americas}, {"CX", Region::oceania},
    {"CY", Region::asia},     {"CZ", Region::europe},
    {"DE", Region::europe},   {"DJ", Region::africa},
    {"DK", Region::europe},   {"DM", Region::americas},
    {"DO", Region::americas}, {"DZ", Region::africa},
    {"EC", Region::americas}, {"EE", Region::europe},
    {"EG", Region::africa},   {"EH", Region::africa},
    {"ER", Region::africa},   {"ES", Region::europe},
    {"ET", Region::africa},   {"FI", Region::europe},
    {"FJ", Region::oceania},  {"FK", Region::americas},
    {"FM", Region::oceania},  {"FO", Region::europe},
    {"FR", Region::europe},   {"GA", Region::africa},
    {"GB", Region::europe},   {"GD", Region::americas},
    {"GE", Region::asia},     {"GF", Region::americas},
    {"GG", Region::europe},   {"GH", Region::africa},
    {"GI", Region::europe},   {"GL", Region::americas},
    {"GM", Region::africa},   {"GN", Region::africa},
    {"GP", Region::americas}, {"GQ", Region::africa},
    {"GR", Region::europe},   {"GS", Region::americas},
    {"GT", Region::americas}, {"GU", Region::oceania},
    {"GW", Region::africa},   {"GY", Region::americas},
    {"HK", Region::asia},     {"HM", Region::oceania},
    {"HN", Region::americas}, {"HR", Region::europe},
    {"HT", Region::americas}, {"HU", Region::europe},
    {"ID", Region::asia},     {"IE", Region::europe},
    {"IL", Region::asia},     {"IM", Region::europe},
    {"IN", Region::asia},     {"IO", Region::africa},
    {"IQ", Region::asia},     {"IR", Region::asia},
    {"IS", Region::europe},   {"IT", Region::europe},
    {"JE", Region::europe},   {"JM", Region::americas},
    {"JO", Region::asia},     {"JP", Region::asia},
    {"KE", Region::africa},   {"KG", Region::asia},
    {"KH", Region::asia},     {"KI", Region::oceania},
    {"KM", Region::africa},   {"KN", Region::americas},
    {"KP", Region::asia},     {"KR", Region::asia},
    {"KW", Region::asia},     {"KY", Region::americas},
    {"KZ", Region::asia},     {"LA", Region::asia},
    {"LB", Region::asia},     {"LC", Region::americas},
    {"LI", Region::europe},   {"LK", Region::asia},
    {"LR", Region::africa},   {"LS", Region::africa},
    {"LT", Region::europe},   {"LU", Region::europe},
    {"LV", Region::europe},   {"LY", Region::africa},
    {"MA", Region::africa},   {"MC", Region::europe},
    {"MD", Region::europe},   {"ME", Region::europe},
    {"MF", Region::americas}, {"MG", Region::africa},
    {"MH", Region::oceania},  {"MK", Region::europe},
    {"ML", Region::africa},   {"MM", Region::asia},
    {"MN", Region::asia},     {"MO", Region::asia},
    {"MP", Region::oceania},  {"MQ", Region::americas},
    {"MR", Region::africa},   {"MS", Region::americas},
    {"MT", Region::europe},   {"MU", Region::africa},
    {"MV", Region::asia},     {"MW", Region::africa},
    {"MX", Region::americas}, {"MY", Region::asia},
    {"MZ", Region::africa},   {"NA", Region::africa},
    {"NC", Region::oceania},  {"NE", Region::africa},
    {"NF", Region::oceania},  {"NG", Region::africa},
    {"NI", Region::americas}, {"NL", Region::europe},
    {"NO", Region::europe},   {"NP", Region::asia},
    {"NR", Region::oceania},  {"NU", Region::oceania},
    {"NZ", Region::oceania},  {"OM", Region::asia},
    {"PA", Region::americas}, {"PE", Region::americas},
    {"PF", Region::oceania},  {"PG", Region::oceania},
    {"PH", Region::asia},     {"PK", Region::asia},
    {"PL", Region::europe},   {"PM", Region::americas},
    {"PN", Region::oceania},  {"PR", Region::americas},
    {"PS", Region::asia},     {"PT", Region::europe},
    {"PW", Region::oceania},  {"PY", Region::americas},
    {"QA", Region::asia},     {"RE", Region::africa},
    {"RO", Region::europe},   {"RS", Region::europe},
    {"RU", Region::europe},   {"RW", Region::africa},
    {"SA", Region::asia},     {"SB", Region::oceania},
    {"SC", Region::africa},   {"SD", Region::africa},
    {"SE", Region::europe},   {"SG", Region::asia},
    {"SH", Region::africa},   {"SI", Region::europe},
    {"SJ", Region::europe},   {"SK", Region::europe},
    {"SL", Region::africa},   {"SM", Region::europe},
    {"SN", Region::africa},   {"SO", Region::africa},
    {"SR", Region::americas}, {"SS", Region::africa},
    {"ST", Region::africa},   {"SV", Region::americas},
    {"SX", Region::americas}, {"SY", Region::asia},
    {"SZ", Region::africa},   {"TC", Region::americas},
    {"TD", Region::africa},   {"TF", Region::africa},
    {"TG", Region::africa},   {"TH", Region::asia},
    {"TJ", Region::asia},     {"TK", Region::oceania},
    {"TL", Region::asia},     {"TM", Region::asia},
    {"TN", Region::africa},   {"TO", Region::oceania},
    {"TR", Region::asia},     {"TT", Region::americas},
    {"TV", Region::oceania},  {"TW", Region::asia},
    {"TZ", Region::africa},   {"UA", Region::europe},
    {"UG", Region::africa},   {"UM", Region::oceania},
    {"US", Region::americas}, {"UY", Region::americas},
    {"UZ", Region::asia},     {"VA", Region::europe},
    {"VC", Region::americas}, {"VE", Region::americas},
    {"VG", Region::americas}, {"VI", Region::americas},
    {"VN", Region::asia},     {"VU", Region::oceania},
    {"WF", Region::oceania},  {"WS", Region::oceania},
    {"YE", Region::asia},     {"YT", Region::africa},
    {"ZA", Region::africa},   {"ZM", Region::africa},
    {"ZW", Region::africa},
}};

inline const CountryEntry* find_country(std::string_view code) {
  if (code.size() != 2) return nullptr;
  auto it = std::lower_bound(
      kCountries.begin(), kCountries.end(), code,
      [](const CountryEntry& e, std::string_view c) {
        return std::string_view(e.code, 2) < c;
      });
  if (it == kCountries.end() || std::string_view(it->code, 2) != code)
    return nullptr;
  return &*it;
}

}  // namespace detail

inline bool is_iso_country(std::string_view code) {
  return detail::find_country(code) != nullptr;
}

inline std::optional<Region> region_of(std::string_view code) {
  const auto* e = detail::find_country(code);
  if (!e) return std::nullopt;
  return e->region;
}

/// All assigned codes in lexicographic order.
inline std::vector<std::string_view> iso_country_codes() {
  std::vector<std::string_view> out;
  out.reserve(detail::kCountries.size());
  for (const auto& e : detail::kCountries) out.emplace_back(e.code, 2);
  return out;
}

}  // namespace madpfi

#endif  // MADPFI_ISO_COUNTRIES_HPP
