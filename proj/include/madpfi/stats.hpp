// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_STATS_HPP
#define MADPFI_STATS_HPP

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "madpfi/design.hpp"
#include "madpfi/diversity.hpp"
#include "madpfi/errors.hpp"
#include "madpfi/indicators.hpp"

namespace madpfi {

/// Sample Pearson correlation coefficient.
inline double pearson_r(const std::vector<double>& xs,
                        const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw ValidationError("pearson_r: length mismatch (" +
                          std::to_string(xs.size()) + " vs " +
                          std::to_string(ys.size()) + ")");
  const std::size_t n = xs.size();
  if (n < 3) throw ValidationError("pearson_r needs at least 3 pairs");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0 || syy == 0)
    throw ValidationError("pearson_r: zero variance input");
  return sxy / std::sqrt(sxx * syy);
}

inline double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> standard(0.0, 1.0);
  return boost::math::quantile(standard, p);
}

/// Two-sided Fisher-z confidence interval:
/// tanh(atanh(r) +- z_{(1+level)/2} / sqrt(n-3)).
inline std::pair<double, double> fisher_ci(double r, long n, double level) {
  if (!(std::fabs(r) < 1.0))
    throw ValidationError("fisher_ci: |r| must be < 1");
  if (n < 4) throw ValidationError("fisher_ci needs n >= 4");
  if (!(level > 0 && level < 1))
    throw ValidationError("fisher_ci: level must be in (0,1)");
  const double z = std::atanh(r);
  const double half =
      normal_quantile((1.0 + level) / 2.0) / std::sqrt(static_cast<double>(n - 3));
  return {std::tanh(z - half), std::tanh(z + half)};
}

struct CorrelationResult {
  int k = 0;
  double r = 0;
  double ci_low = 0;
  double ci_high = 0;
  long n = 0;
  double level = 0.95;
};

struct CorrelationSweep {
  std::vector<CorrelationResult> results;
  std::vector<std::string> warnings;  // per-k skips, with reasons
};

/// Correlates log U with PFI for each requested k. For each k the input
/// must hold at most one record per country (full-window values); countries
/// without a PFI are dropped pairwise. Degenerate ks are skipped with a
/// warning rather than failing the sweep.
inline CorrelationSweep correlation_sweep(
    const std::vector<DiversityRecord>& diversity,
    const std::vector<CountryIndicators>& indicators,
    const std::vector<int>& ks, double level = 0.95) {
  std::map<std::string, double> pfi;
  for (const auto& row : indicators)
    if (row.pfi) pfi[row.country] = *row.pfi;

  CorrelationSweep sweep;
  for (int k : ks) {
    std::map<std::string, unsigned long long> values;
    bool duplicate = false;
    for (const auto& rec : diversity) {
      if (rec.k != k) continue;
      if (!values.emplace(rec.country, rec.value).second) duplicate = true;
    }
    if (duplicate)
      throw ValidationError(
          "correlation sweep needs one diversity record per country at k=" +
          std::to_string(k) + "; got windowed records");
    std::vector<double> log_u, y;
    for (const auto& [country, u] : values) {
      const auto it = pfi.find(country);
      if (it == pfi.end()) continue;
      if (u == 0)
        throw ValidationError("diversity value 0 for '" + country +
                              "' cannot be log-transformed");
      log_u.push_back(std::log(static_cast<double>(u)));
      y.push_back(it->second);
    }
    // 4 is the fisher_ci floor; fewer matched countries cannot yield an
    // interval, so the k is skipped rather than failing the sweep.
    if (log_u.size() < 4) {
      sweep.warnings.push_back("k=" + std::to_string(k) + ": only " +
                               std::to_string(log_u.size()) +
                               " countries with PFI, need 4");
      continue;
    }
    double r;
    try {
      r = pearson_r(log_u, y);
    } catch (const ValidationError& e) {
      sweep.warnings.push_back("k=" + std::to_string(k) + ": " + e.what());
      continue;
    }
    CorrelationResult res;
    res.k = k;
    res.r = r;
    res.n = static_cast<long>(log_u.size());
    res.level = level;
    if (std::fabs(r) >= 1.0 - 1e-15) {
      res.ci_low = res.ci_high = r;  // degenerate: perfect correlation
    } else {
      std::tie(res.ci_low, res.ci_high) = fisher_ci(r, res.n, level);
    }
    sweep.results.push_back(res);
  }
  return sweep;
}

struct VifResult {
  std::vector<std::string> names;   // non-intercept column names
  std::vector<double> values;       // +inf marks exact collinearity
  std::vector<std::string> collinear;  // names with infinite VIF
};

/// Variance inflation factors: VIF_j = 1/(1 - R_j^2) from regressing
/// column j on the other non-intercept columns plus an intercept.
inline VifResult vif(const DesignMatrix& design) {
  const Eigen::Index p = design.X.cols();
  const Eigen::Index n = design.X.rows();
  const Eigen::Index first = design.intercept ? 1 : 0;
  const Eigen::Index m = p - first;  // non-intercept predictors
  if (m < 2)
    throw ValidationError("VIF needs at least 2 non-intercept columns");
  if (n < p + 1)
    throw ValidationError("VIF needs more rows than columns");

  VifResult out;
  for (Eigen::Index j = first; j < p; ++j) {
    const Eigen::VectorXd target = design.X.col(j);
    Eigen::MatrixXd others(n, m);  // intercept + remaining predictors
    others.col(0).setOnes();
    Eigen::Index c = 1;
    for (Eigen::Index o = first; o < p; ++o)
      if (o != j) others.col(c++) = design.X.col(o);

    const double mean = target.mean();
    const double sst = (target.array() - mean).square().sum();
    if (sst == 0)
      throw ValidationError("VIF undefined: column '" +
                            design.names[static_cast<std::size_t>(j)] +
                            "' is constant");
    const Eigen::VectorXd beta = others.colPivHouseholderQr().solve(target);
    const double ssr = (target - others * beta).squaredNorm();
    double r2 = 1.0 - ssr / sst;
    r2 = std::min(1.0, std::max(0.0, r2));
    out.names.push_back(design.names[static_cast<std::size_t>(j)]);
    if (1.0 - r2 <= 1e-12) {
      out.values.push_back(std::numeric_limits<double>::infinity());
      out.collinear.push_back(out.names.back());
    } else {
      out.values.push_back(1.0 / (1.0 - r2));
    }
  }
  return out;
}

}  // namespace madpfi

#endif  // MADPFI_STATS_HPP
