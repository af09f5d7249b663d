// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_LMM_HPP
#define MADPFI_LMM_HPP

#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "madpfi/brent.hpp"
#include "madpfi/design.hpp"
#include "madpfi/errors.hpp"

namespace madpfi {

namespace detail {

/// Per-group row indices, sizes validated against the design.
struct Grouping {
  std::vector<std::vector<int>> rows;  // rows[g] = row indices of group g

  static Grouping from_design(const DesignMatrix& design) {
    Grouping g;
    g.rows.resize(design.q());
    for (std::size_t i = 0; i < design.group_index.size(); ++i) {
      const int gi = design.group_index[i];
      if (gi < 0 || static_cast<std::size_t>(gi) >= design.q())
        throw ValidationError("group index out of range at row " +
                              std::to_string(i + 1));
      g.rows[static_cast<std::size_t>(gi)].push_back(static_cast<int>(i));
    }
    return g;
  }
};

inline std::string dependent_column_message(const DesignMatrix& design) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.X);
  qr.setThreshold(1e-10);
  const Eigen::Index rank = qr.rank();
  const auto perm = qr.colsPermutation().indices();
  std::string msg = "design is rank deficient; dependent column(s):";
  bool any = false;
  for (Eigen::Index i = rank; i < design.X.cols(); ++i) {
    msg += std::string(" '") +
           design.names[static_cast<std::size_t>(perm[i])] + "'";
    any = true;
  }
  if (!any)
    msg += std::string(" '") +
           design.names[static_cast<std::size_t>(perm[design.X.cols() - 1])] +
           "' (near-singular)";
  return msg;
}

}  // namespace detail

/// Everything profiled out at a fixed variance ratio theta = sigma_b/sigma.
struct ProfilePoint {
  double deviance = 0;
  Eigen::VectorXd beta;
  double sigma2 = 0;
  Eigen::MatrixXd xtvix;    // X' V^-1 X at this theta
  double log_det_v = 0;     // log |V|
  double log_det_xtvix = 0; // log |X' V^-1 X|
};

/// Profiled deviance of the random-intercept model y = X b + Z u + e with
/// V = I + theta^2 Z Z'. Each group block inverts in closed form:
/// V_g^-1 = I - (theta^2/(1+n_g theta^2)) 11', log|V_g| = log(1+n_g theta^2),
/// so all quantities reduce to per-group column sums.
inline ProfilePoint profiled_deviance(const DesignMatrix& design,
                                      const Eigen::VectorXd& y, double theta,
                                      FitMethod method) {
  if (theta < 0) throw ValidationError("theta must be >= 0");
  const Eigen::Index n = design.X.rows();
  const Eigen::Index p = design.X.cols();
  if (y.size() != n) throw ValidationError("response length mismatch");
  if (!design.group_index.empty() &&
      design.group_index.size() != static_cast<std::size_t>(n))
    throw ValidationError("group index length mismatch");
  if (theta > 0 && design.group_index.empty())
    throw ValidationError("theta > 0 requires a grouping");

  const double t2 = theta * theta;
  Eigen::MatrixXd a = design.X.transpose() * design.X;   // X' V^-1 X
  Eigen::VectorXd xty = design.X.transpose() * y;        // X' V^-1 y
  double log_det_v = 0;

  detail::Grouping grouping;
  if (t2 > 0) {
    grouping = detail::Grouping::from_design(design);
    for (const auto& rows : grouping.rows) {
      if (rows.empty()) continue;
      const double ng = static_cast<double>(rows.size());
      const double c = t2 / (1.0 + ng * t2);
      Eigen::VectorXd s = Eigen::VectorXd::Zero(p);
      double t = 0;
      for (int i : rows) {
        s += design.X.row(i).transpose();
        t += y(i);
      }
      a.noalias() -= c * (s * s.transpose());
      xty.noalias() -= c * t * s;
      log_det_v += std::log1p(ng * t2);
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success)
    throw ComputationError("eigendecomposition of X'V^-1X failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double lmin = lambda.minCoeff();
  const double lmax = lambda.maxCoeff();
  if (lmin <= 0 || lmax / lmin > 1e12)
    throw ComputationError(detail::dependent_column_message(design));

  ProfilePoint out;
  out.beta = eig.eigenvectors() *
             (eig.eigenvectors().transpose() * xty).cwiseQuotient(lambda);
  out.log_det_xtvix = lambda.array().log().sum();
  out.log_det_v = log_det_v;
  out.xtvix = std::move(a);

  const Eigen::VectorXd resid = y - design.X * out.beta;
  double rss_v = resid.squaredNorm();  // r' V^-1 r
  if (t2 > 0) {
    for (const auto& rows : grouping.rows) {
      if (rows.empty()) continue;
      const double ng = static_cast<double>(rows.size());
      const double c = t2 / (1.0 + ng * t2);
      double rsum = 0;
      for (int i : rows) rsum += resid(i);
      rss_v -= c * rsum * rsum;
    }
  }
  if (!(rss_v > 0))
    throw ComputationError("residual variance collapsed to zero");

  static constexpr double kLog2Pi = 1.8378770664093454836;
  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  if (method == FitMethod::ml) {
    out.sigma2 = rss_v / nd;
    out.deviance = nd * (kLog2Pi + std::log(out.sigma2)) + log_det_v + nd;
  } else {
    out.sigma2 = rss_v / (nd - pd);
    out.deviance = (nd - pd) * (kLog2Pi + std::log(out.sigma2)) + log_det_v +
                   out.log_det_xtvix + (nd - pd);
  }
  return out;
}

/// Exact derivative of the profiled deviance with respect to theta. By the
/// envelope theorem the profiled beta and sigma2 contribute nothing at their
/// optima, so only the explicit dependence through V remains and every term
/// reduces to the same per-group sums as the deviance itself:
///   d log|V|        = sum_g 2 theta n_g / (1 + n_g theta^2)
///   d (r' V^-1 r)   = -2 theta sum_g (rsum_g / (1 + n_g theta^2))^2
///   d log|X'V^-1 X| = -2 theta sum_g w_g' A^-1 w_g,  w_g = s_g/(1+n_g theta^2)
/// where rsum_g and s_g are the group sums of the residual and of the rows
/// of X. Used to finish the theta search: near the optimum the deviance is
/// flat to rounding and comparing its values cannot place theta better than
/// about sqrt(eps) relative, but this derivative's sign change still can.
inline double profiled_deviance_gradient(const DesignMatrix& design,
                                         const Eigen::VectorXd& y,
                                         double theta, FitMethod method) {
  const ProfilePoint at = profiled_deviance(design, y, theta, method);
  const Eigen::Index n = design.X.rows();
  const Eigen::Index p = design.X.cols();
  const double t2 = theta * theta;
  const detail::Grouping grouping = detail::Grouping::from_design(design);
  const Eigen::VectorXd resid = y - design.X * at.beta;
  // xtvix passed the positive-definiteness check inside profiled_deviance.
  const Eigen::LLT<Eigen::MatrixXd> llt(at.xtvix);

  double rss_v = resid.squaredNorm();
  double d_rss = 0;
  double d_log_det_v = 0;
  double d_log_det_a = 0;
  for (const auto& rows : grouping.rows) {
    if (rows.empty()) continue;
    const double ng = static_cast<double>(rows.size());
    const double denom = 1.0 + ng * t2;
    double rsum = 0;
    Eigen::VectorXd s = Eigen::VectorXd::Zero(p);
    for (int i : rows) {
      rsum += resid(i);
      s += design.X.row(i).transpose();
    }
    rss_v -= t2 / denom * rsum * rsum;
    const double rw = rsum / denom;
    d_rss -= 2.0 * theta * rw * rw;
    d_log_det_v += 2.0 * theta * ng / denom;
    const Eigen::VectorXd w = s / denom;
    d_log_det_a -= 2.0 * theta * w.dot(llt.solve(w));
  }
  if (!(rss_v > 0))
    throw ComputationError("residual variance collapsed to zero");

  const double scale = method == FitMethod::ml
                           ? static_cast<double>(n)
                           : static_cast<double>(n - p);
  double grad = scale * d_rss / rss_v + d_log_det_v;
  if (method == FitMethod::reml) grad += d_log_det_a;
  return grad;
}

struct LmmFit {
  std::vector<std::string> names;  // fixed-effect column names
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::VectorXd z;
  Eigen::VectorXd p_values;
  double theta = 0;     // sigma_b / sigma at the optimum
  double sigma2 = 0;    // residual variance
  double sigma_b2 = 0;  // random-intercept variance
  double loglik = 0;
  double deviance = 0;
  double aic = 0;
  double bic = 0;
  double r2_marginal = 0;
  double r2_conditional = 0;
  long n = 0;
  long p_fixed = 0;
  long q = 0;         // number of groups
  long k_params = 0;  // p_fixed + 2 (residual + intercept variance)
  FitMethod method = FitMethod::reml;
  bool theta_at_boundary = false;  // optimum pinned at theta = 0
};

inline std::pair<double, double> information_criteria(double loglik,
                                                      long k_params, long n) {
  if (n < 1 || k_params < 1)
    throw ValidationError("information_criteria: n and k_params must be >= 1");
  const double aic = -2.0 * loglik + 2.0 * static_cast<double>(k_params);
  const double bic = -2.0 * loglik +
                     static_cast<double>(k_params) *
                         std::log(static_cast<double>(n));
  return {aic, bic};
}

/// Two-sided normal p-value for z.
inline double wald_p_value(double z) {
  return std::erfc(std::fabs(z) / 1.4142135623730950488);
}

inline const char* significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

/// Fits the random-intercept model by minimizing the profiled deviance
/// over theta in [0, 1e3]: a log-spaced presweep brackets the optimum and
/// Brent's method polishes it. A boundary optimum theta = 0 is reported,
/// not treated as an error.
inline LmmFit fit_lmm(const DesignMatrix& design, const Eigen::VectorXd& y,
                      FitMethod method = FitMethod::reml) {
  const Eigen::Index n = design.X.rows();
  const Eigen::Index p = design.X.cols();
  if (n <= p)
    throw ValidationError("need more rows than fixed-effect columns");
  if (design.group_index.size() != static_cast<std::size_t>(n))
    throw ValidationError("every row needs a group label");
  if (design.q() < 2)
    throw ValidationError("random intercept needs at least 2 groups, got " +
                          std::to_string(design.q()));
  {
    std::vector<int> counts(design.q(), 0);
    for (int g : design.group_index) ++counts[static_cast<std::size_t>(g)];
    bool any_repeat = false;
    for (int c : counts) any_repeat = any_repeat || c >= 2;
    if (!any_repeat)
      throw ValidationError(
          "unidentifiable model: every group has a single row, so the "
          "residual and intercept variances cannot be separated");
  }

  auto dev = [&](double theta) {
    return profiled_deviance(design, y, theta, method).deviance;
  };

  // Presweep: theta = 0 plus 40 log-spaced points in [1e-6, 1e3].
  std::vector<double> grid{0.0};
  constexpr int kGridPoints = 40;
  for (int i = 0; i < kGridPoints; ++i) {
    const double e = -6.0 + 9.0 * static_cast<double>(i) /
                                (kGridPoints - 1);
    grid.push_back(std::pow(10.0, e));
  }
  std::vector<double> grid_dev(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid_dev[i] = dev(grid[i]);
    if (grid_dev[i] < grid_dev[best]) best = i;
  }

  const double lo = best == 0 ? 0.0 : grid[best - 1];
  const double hi = best + 1 < grid.size() ? grid[best + 1] : grid.back();
  double theta_opt = grid[best];
  double dev_opt = grid_dev[best];
  if (lo < hi) {
    const MinimizeResult res = brent_minimize(dev, lo, hi, 1e-9, 1e-12, 200);
    if (!res.converged) {
      std::string msg =
          "theta search did not converge in 200 iterations; trace tail:";
      const std::size_t start =
          res.trace.size() > 10 ? res.trace.size() - 10 : 0;
      for (std::size_t i = start; i < res.trace.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " (%.6g, %.10g)", res.trace[i].first,
                      res.trace[i].second);
        msg += buf;
      }
      throw ComputationError(msg);
    }
    if (res.fx < dev_opt) {
      theta_opt = res.x;
      dev_opt = res.fx;
    }
  }

  // Brent places theta only to about sqrt(eps) relative because the deviance
  // is locally quadratic and its values tie in double precision long before
  // theta stops moving. For an interior optimum, recover the remaining digits
  // from the exact stationarity condition: bracket the derivative's sign
  // change around Brent's answer and bisect it down to rounding level.
  if (theta_opt > 0.0) {
    auto grad = [&](double theta) {
      return profiled_deviance_gradient(design, y, theta, method);
    };
    double a = theta_opt;
    double b = theta_opt;
    double ga = grad(theta_opt);
    double gb = ga;
    for (double h = theta_opt * 1e-9;
         (ga > 0.0 || gb < 0.0) && h < 0.5 * theta_opt; h *= 8.0) {
      if (ga > 0.0) ga = grad(a = theta_opt - h);
      if (gb < 0.0) gb = grad(b = theta_opt + h);
    }
    if (ga <= 0.0 && gb >= 0.0 && a < b) {
      for (int i = 0; i < 200 && b - a > 2.0 * 1e-16 * b; ++i) {
        const double mid = 0.5 * (a + b);
        if (grad(mid) < 0.0)
          a = mid;
        else
          b = mid;
      }
      const double theta_star = 0.5 * (a + b);
      const double dev_star = dev(theta_star);
      // The guard only rejects a polish that made things genuinely worse
      // (a spurious bracket); ties at rounding level are expected and kept.
      if (dev_star <= dev_opt + 1e-8 * (1.0 + std::fabs(dev_opt))) {
        theta_opt = theta_star;
        dev_opt = dev_star;
      }
    }
  }

  const ProfilePoint at = profiled_deviance(design, y, theta_opt, method);

  LmmFit fit;
  fit.names = design.names;
  fit.method = method;
  fit.theta = theta_opt;
  fit.theta_at_boundary = theta_opt == 0.0;
  fit.deviance = at.deviance;
  fit.loglik = -at.deviance / 2.0;
  fit.beta = at.beta;
  fit.sigma2 = at.sigma2;
  fit.sigma_b2 = theta_opt * theta_opt * at.sigma2;
  fit.n = static_cast<long>(n);
  fit.p_fixed = static_cast<long>(p);
  fit.q = static_cast<long>(design.q());
  fit.k_params = fit.p_fixed + 2;
  std::tie(fit.aic, fit.bic) =
      information_criteria(fit.loglik, fit.k_params, fit.n);

  const Eigen::MatrixXd cov = at.sigma2 * at.xtvix.inverse();
  fit.se.resize(p);
  fit.z.resize(p);
  fit.p_values.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    fit.se(j) = std::sqrt(cov(j, j));
    fit.z(j) = fit.beta(j) / fit.se(j);
    fit.p_values(j) = wald_p_value(fit.z(j));
  }

  // Nakagawa-Schielzeth decomposition with the population variance of the
  // fitted fixed-effect values.
  const Eigen::VectorXd fitted = design.X * at.beta;
  const double mean_f = fitted.mean();
  const double var_f =
      (fitted.array() - mean_f).square().sum() / static_cast<double>(n);
  const double total = var_f + fit.sigma_b2 + fit.sigma2;
  fit.r2_marginal = var_f / total;
  fit.r2_conditional = (var_f + fit.sigma_b2) / total;
  return fit;
}

struct WaldRow {
  std::string name;
  double estimate = 0;
  double se = 0;
  double z = 0;
  double p = 0;
  std::string stars;
};

inline std::vector<WaldRow> wald_table(const LmmFit& fit) {
  std::vector<WaldRow> rows;
  rows.reserve(fit.names.size());
  for (std::size_t j = 0; j < fit.names.size(); ++j) {
    WaldRow row;
    row.name = fit.names[j];
    row.estimate = fit.beta(static_cast<Eigen::Index>(j));
    row.se = fit.se(static_cast<Eigen::Index>(j));
    row.z = fit.z(static_cast<Eigen::Index>(j));
    row.p = fit.p_values(static_cast<Eigen::Index>(j));
    row.stars = significance_stars(row.p);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace madpfi

#endif  // MADPFI_LMM_HPP
