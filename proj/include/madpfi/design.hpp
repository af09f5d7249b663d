// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_DESIGN_HPP
#define MADPFI_DESIGN_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "madpfi/errors.hpp"
#include "madpfi/text.hpp"

namespace madpfi {

enum class FitMethod { ml, reml };

inline std::string_view fit_method_name(FitMethod m) {
  return m == FitMethod::ml ? "ml" : "reml";
}

inline FitMethod parse_fit_method(std::string_view text) {
  if (text == "ml") return FitMethod::ml;
  if (text == "reml") return FitMethod::reml;
  throw ValidationError("unknown method '" + std::string(text) +
                        "' (expected reml|ml)");
}

/// One fixed-effect term, optionally natural-log transformed.
struct FixedTerm {
  std::string column;
  bool log_transform = false;

  bool operator==(const FixedTerm&) const = default;

  std::string display() const {
    return log_transform ? "log(" + column + ")" : column;
  }
};

/// Model specification: response ~ terms, random intercept per group.
struct LmmSpec {
  std::string response;
  std::vector<FixedTerm> terms;
  std::string group;
  FitMethod method = FitMethod::reml;
};

/// Short aliases accepted in formulas for the standard indicator columns.
inline std::string resolve_column_alias(std::string name) {
  if (name == "pop") return "population";
  if (name == "cellular") return "cellular_per_100";
  if (name == "gdp") return "gdp_per_capita";
  if (name == "unemployment") return "unemployment_pct";
  return name;
}

/// Parses "resp ~ term + log(term) + ...". Short indicator aliases
/// (cellular, gdp, pop, unemployment) map to their full column names.
inline LmmSpec parse_formula(std::string_view formula) {
  auto fail = [&](const std::string& msg) -> ValidationError {
    return ValidationError("bad formula '" + std::string(formula) +
                           "': " + msg);
  };
  const auto tilde = formula.find('~');
  if (tilde == std::string_view::npos) throw fail("missing '~'");
  LmmSpec spec;
  spec.response = std::string(trim(formula.substr(0, tilde)));
  if (spec.response.empty()) throw fail("empty response");
  std::string_view rhs = formula.substr(tilde + 1);
  std::size_t pos = 0;
  while (pos <= rhs.size()) {
    auto next = rhs.find('+', pos);
    if (next == std::string_view::npos) next = rhs.size();
    std::string_view token = trim(rhs.substr(pos, next - pos));
    if (token.empty()) throw fail("empty term");
    FixedTerm term;
    if (token.rfind("log(", 0) == 0 && token.back() == ')') {
      term.log_transform = true;
      token = trim(token.substr(4, token.size() - 5));
      if (token.empty()) throw fail("empty log() argument");
    }
    term.column = resolve_column_alias(std::string(token));
    if (term.column == spec.response)
      throw fail("response '" + spec.response + "' reused as a predictor");
    for (const auto& t : spec.terms)
      if (t.column == term.column)
        throw fail("duplicate term '" + term.column + "'");
    spec.terms.push_back(std::move(term));
    if (next == rhs.size()) break;
    pos = next + 1;
  }
  if (spec.terms.empty()) throw fail("no predictor terms");
  return spec;
}

/// Column-oriented table with numeric (possibly missing) and label columns.
struct Frame {
  std::vector<std::string> numeric_names;
  std::vector<std::vector<std::optional<double>>> numeric;  // column-major
  std::vector<std::string> label_names;
  std::vector<std::vector<std::string>> labels;  // column-major

  std::size_t rows() const {
    if (!numeric.empty()) return numeric.front().size();
    if (!labels.empty()) return labels.front().size();
    return 0;
  }

  const std::vector<std::optional<double>>* numeric_column(
      std::string_view name) const {
    for (std::size_t i = 0; i < numeric_names.size(); ++i)
      if (numeric_names[i] == name) return &numeric[i];
    return nullptr;
  }

  const std::vector<std::string>* label_column(std::string_view name) const {
    for (std::size_t i = 0; i < label_names.size(); ++i)
      if (label_names[i] == name) return &labels[i];
    return nullptr;
  }
};

/// n x p fixed-effects matrix plus the random-intercept grouping.
/// group_index may be empty for purely fixed-effect uses (e.g. VIF).
struct DesignMatrix {
  Eigen::MatrixXd X;
  std::vector<std::string> names;  // p column names
  bool intercept = true;           // column 0 is all ones when set
  std::vector<int> group_index;    // per-row group id in 0..q-1
  std::vector<std::string> group_levels;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
  std::size_t q() const { return group_levels.size(); }
};

struct BuiltDesign {
  DesignMatrix design;
  Eigen::VectorXd y;
  std::size_t dropped_rows = 0;  // listwise deletion count
  std::vector<std::string> row_ids;
};

/// Assembles the design matrix for `spec` from `frame`: intercept column
/// prepended, log transforms applied, rows with any missing required value
/// dropped and counted.
inline BuiltDesign build_design(const Frame& frame, const LmmSpec& spec) {
  const auto* y_col = frame.numeric_column(spec.response);
  if (!y_col)
    throw ValidationError("response column '" + spec.response +
                          "' not in frame");
  std::vector<const std::vector<std::optional<double>>*> term_cols;
  for (const auto& t : spec.terms) {
    if (t.column == spec.group)
      throw ValidationError("grouping column '" + spec.group +
                            "' reused as a predictor");
    const auto* col = frame.numeric_column(t.column);
    if (!col)
      throw ValidationError("predictor column '" + t.column +
                            "' not in frame");
    term_cols.push_back(col);
  }
  const std::vector<std::string>* group_col = nullptr;
  if (!spec.group.empty()) {
    group_col = frame.label_column(spec.group);
    if (!group_col)
      throw ValidationError("grouping column '" + spec.group +
                            "' not in frame");
  }
  const std::vector<std::string>* id_col = frame.label_column("country");
  if (!id_col && !frame.label_names.empty()) id_col = &frame.labels[0];

  const std::size_t n_all = frame.rows();
  std::vector<std::size_t> keep;
  keep.reserve(n_all);
  for (std::size_t i = 0; i < n_all; ++i) {
    bool complete = (*y_col)[i].has_value();
    for (const auto* col : term_cols) complete = complete && (*col)[i];
    if (complete) keep.push_back(i);
  }

  const std::size_t p = spec.terms.size() + 1;
  if (keep.size() < p + 2)
    throw ValidationError("only " + std::to_string(keep.size()) +
                          " complete rows for " + std::to_string(p) +
                          " coefficients; need at least " +
                          std::to_string(p + 2));

  BuiltDesign out;
  out.dropped_rows = n_all - keep.size();
  out.design.X.resize(static_cast<Eigen::Index>(keep.size()),
                      static_cast<Eigen::Index>(p));
  out.design.names.push_back("(Intercept)");
  out.design.intercept = true;
  out.y.resize(static_cast<Eigen::Index>(keep.size()));
  out.row_ids.reserve(keep.size());

  for (std::size_t r = 0; r < keep.size(); ++r) {
    const std::size_t i = keep[r];
    const std::string row_id =
        id_col ? (*id_col)[i] : "row " + std::to_string(i + 1);
    out.row_ids.push_back(row_id);
    out.design.X(static_cast<Eigen::Index>(r), 0) = 1.0;
    out.y(static_cast<Eigen::Index>(r)) = *(*y_col)[i];
    for (std::size_t j = 0; j < spec.terms.size(); ++j) {
      double v = *(*term_cols[j])[i];
      if (spec.terms[j].log_transform) {
        if (v <= 0)
          throw ValidationError(
              "log(" + spec.terms[j].column + ") undefined for '" + row_id +
              "': value " + std::to_string(v));
        v = std::log(v);
      }
      out.design.X(static_cast<Eigen::Index>(r),
                   static_cast<Eigen::Index>(j + 1)) = v;
    }
  }
  for (const auto& t : spec.terms) out.design.names.push_back(t.display());

  // Constant non-intercept columns make the model unidentifiable.
  for (Eigen::Index c = 1; c < out.design.X.cols(); ++c) {
    const double lo = out.design.X.col(c).minCoeff();
    const double hi = out.design.X.col(c).maxCoeff();
    if (lo == hi)
      throw ValidationError("column '" + out.design.names[c] +
                            "' is constant across all retained rows");
  }

  if (group_col) {
    std::vector<std::string> levels;
    for (std::size_t r : keep) levels.push_back((*group_col)[r]);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < levels.size(); ++i)
      index[levels[i]] = static_cast<int>(i);
    out.design.group_levels = std::move(levels);
    out.design.group_index.reserve(keep.size());
    for (std::size_t r : keep)
      out.design.group_index.push_back(index[(*group_col)[r]]);
  }
  return out;
}

}  // namespace madpfi

#endif  // MADPFI_DESIGN_HPP
