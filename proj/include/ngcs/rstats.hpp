#ifndef NGCS_RSTATS_HPP
#define NGCS_RSTATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ngcs/error.hpp"

namespace ngcs {

namespace detail {

/// Regularized lower incomplete gamma P(a, x) by its power series.
inline double gamma_p_series(double a, double x) {
  double ap = a, sum = 1.0 / a, del = sum;
  for (int n = 0; n < 10000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// log Q(a, x), Q the regularized upper incomplete gamma, by the Lentz
/// continued fraction (valid for x >= a + 1).
inline double log_gamma_q_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return -x + a * std::log(x) - std::lgamma(a) + std::log(h);
}

}  // namespace detail

/// P(chi2_df > x).
inline double chi2_sf(double x, double df) {
  detail::require(df >= 1.0, "chi2_sf: df must be >= 1");
  detail::require(std::isfinite(x), "chi2_sf: x must be finite");
  detail::require(x >= 0.0, "chi2_sf: x must be >= 0");
  if (x == 0.0) return 1.0;
  const double a = 0.5 * df, h = 0.5 * x;
  if (h < a + 1.0) return 1.0 - detail::gamma_p_series(a, h);
  return std::exp(detail::log_gamma_q_cf(a, h));
}

/// P(chi2_df <= x).
inline double chi2_cdf(double x, double df) {
  detail::require(df >= 1.0, "chi2_cdf: df must be >= 1");
  detail::require(std::isfinite(x) && x >= 0.0, "chi2_cdf: x must be finite and >= 0");
  if (x == 0.0) return 0.0;
  const double a = 0.5 * df, h = 0.5 * x;
  if (h < a + 1.0) return detail::gamma_p_series(a, h);
  return 1.0 - std::exp(detail::log_gamma_q_cf(a, h));
}

/// log P(chi2_df > x); stays finite far past the point where chi2_sf underflows.
inline double chi2_logsf(double x, double df) {
  detail::require(df >= 1.0, "chi2_logsf: df must be >= 1");
  detail::require(std::isfinite(x) && x >= 0.0, "chi2_logsf: x must be finite and >= 0");
  if (x == 0.0) return 0.0;
  const double a = 0.5 * df, h = 0.5 * x;
  if (h < a + 1.0) return std::log1p(-detail::gamma_p_series(a, h));
  return detail::log_gamma_q_cf(a, h);
}

enum class PValueVariant { ChiSquare, HansonWright };

struct PValueMode {
  PValueVariant variant = PValueVariant::ChiSquare;
  /// Variance proxy sigma_sg^2 (HansonWright only).
  double sigma_sg2 = 1.0;
  double c = 1.0 / 96.0;

  void validate() const {
    detail::require(sigma_sg2 > 0.0, "PValueMode: sigma_sg2 must be > 0");
    detail::require(c > 0.0 && c <= 1.0, "PValueMode: c must lie in (0, 1]");
  }
};

/// Hanson-Wright tail bound
///   min{ exp(-c min{(t-K)^2 / (K^2 s^4), (t-K) / s^2}), 1 },  s^2 = sigma_sg2.
inline double hw_pvalue(double t, std::size_t khat, const PValueMode& mode = {}) {
  detail::require(khat >= 1, "hw_pvalue: Khat must be >= 1");
  mode.validate();
  const double k = static_cast<double>(khat);
  if (!(t > k)) return 1.0;
  const double s2 = mode.sigma_sg2;
  const double excess = t - k;
  const double quad = excess * excess / (k * k * s2 * s2);
  const double lin = excess / s2;
  return std::min(std::exp(-mode.c * std::min(quad, lin)), 1.0);
}

inline double pvalue(double t, std::size_t khat, const PValueMode& mode) {
  if (mode.variant == PValueVariant::HansonWright) return hw_pvalue(t, khat, mode);
  return chi2_sf(std::max(t, 0.0), static_cast<double>(khat));
}

/// log of `pvalue`, without underflow for very large t.
inline double log_pvalue(double t, std::size_t khat, const PValueMode& mode) {
  if (mode.variant == PValueVariant::HansonWright) {
    const double k = static_cast<double>(khat);
    if (!(t > k)) return 0.0;
    const double s2 = mode.sigma_sg2, excess = t - k;
    return std::min(-mode.c * std::min(excess * excess / (k * k * s2 * s2), excess / s2), 0.0);
  }
  return chi2_logsf(std::max(t, 0.0), static_cast<double>(khat));
}

/// Denominator used in the HC score at rank j.
///  - PValue:     sqrt(pi_(j) (1 - pi_(j)))
///  - Quantile:   sqrt((j/p) (1 - j/p))
///  - PValuePlus: as PValue, but ranks with pi_(j) <= 1/p are left out of the
///                maximisation (their score is reported as -inf).
enum class HcVariant { PValue, Quantile, PValuePlus };

/// Which p-values survive the threshold T = pi_(s).
enum class ThresholdRule { Strict, Inclusive };

inline constexpr double kPiFloor = 1e-300;
inline constexpr double kPiCeil = 1.0 - 1e-12;

/// HC(j), j = 1..floor(p/2), from ascending p-values.
inline std::vector<double> hc_scores(std::span<const double> sorted_pi, std::size_t p,
                                     HcVariant variant = HcVariant::PValue) {
  detail::require(sorted_pi.size() == p, "hc_scores: expected p sorted p-values");
  for (std::size_t i = 0; i < p; ++i) {
    detail::require(sorted_pi[i] >= 0.0 && sorted_pi[i] <= 1.0, "hc_scores: p-value outside [0,1]");
    if (i) detail::require(sorted_pi[i - 1] <= sorted_pi[i], "hc_scores: input is not sorted");
  }
  const std::size_t half = p / 2;
  const double pd = static_cast<double>(p), rp = std::sqrt(pd);
  std::vector<double> hc(half);
  for (std::size_t j = 1; j <= half; ++j) {
    const double q = static_cast<double>(j) / pd;
    const double pij = std::clamp(sorted_pi[j - 1], kPiFloor, kPiCeil);
    double denom;
    switch (variant) {
      case HcVariant::Quantile:
        denom = std::sqrt(q * (1.0 - q));
        break;
      case HcVariant::PValuePlus:
        if (sorted_pi[j - 1] <= 1.0 / pd) {
          hc[j - 1] = -std::numeric_limits<double>::infinity();
          continue;
        }
        [[fallthrough]];
      case HcVariant::PValue:
      default:
        denom = std::sqrt(pij * (1.0 - pij));
        break;
    }
    hc[j - 1] = rp * (q - sorted_pi[j - 1]) / denom;
  }
  return hc;
}

/// Everything the selection pipeline reports about one covariate screen.
struct SelectionResult {
  std::vector<double> t;   // screening statistics (empty when only p-values were given)
  std::vector<double> pi;  // p-values
  std::vector<std::size_t> order;  // stable ascending sort of pi
  std::vector<double> hc;          // threshold curve HC(1..floor(p/2))
  double max_hc = -std::numeric_limits<double>::infinity();  // max of the test curve
  std::size_t s_hat = 0;  // 1-based argmax of hc, 0 when hc has no finite entry
  double critical = 0.0;  // sqrt(2 log log p)
  bool tested_nonempty = false;
  double threshold = 0.0;
  std::vector<std::size_t> selected;  // ascending covariate indices
};

/// The testing step and the threshold step each take their own HC curve.
/// Setting both to the same variant gives the single-curve procedure.
struct HctOptions {
  /// Curve whose maximum is compared with sqrt(2 log log p).
  HcVariant test = HcVariant::Quantile;
  /// Curve whose argmax sets the threshold.
  HcVariant threshold = HcVariant::PValuePlus;
  ThresholdRule rule = ThresholdRule::Strict;

  static HctOptions single(HcVariant v, ThresholdRule r = ThresholdRule::Strict) { return {v, v, r}; }
};

namespace detail {

/// HCT with a separate ordering key. `key` is either pi itself or log(pi);
/// sorting and the final threshold comparison use the key so that p-values
/// that underflow to 0 still keep their order.
inline SelectionResult hct_core(std::vector<double> pi, std::span<const double> key,
                                const HctOptions& opt) {
  const std::size_t p = pi.size();
  detail::require(p >= 4, "hct_select: need p >= 4, got " + std::to_string(p));
  SelectionResult r;
  r.pi = std::move(pi);
  for (double v : r.pi)
    detail::require(std::isfinite(v) && v >= 0.0 && v <= 1.0, "hct_select: p-value outside [0,1]");
  r.order.resize(p);
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  std::vector<double> sorted(p);
  for (std::size_t i = 0; i < p; ++i) sorted[i] = r.pi[r.order[i]];

  r.hc = hc_scores(sorted, p, opt.threshold);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < r.hc.size(); ++j) {
    if (r.hc[j] > best) {
      best = r.hc[j];
      r.s_hat = j + 1;
    }
  }
  if (opt.test == opt.threshold) {
    r.max_hc = best;
  } else {
    for (double h : hc_scores(sorted, p, opt.test)) r.max_hc = std::max(r.max_hc, h);
  }
  r.critical = std::sqrt(2.0 * std::log(std::log(static_cast<double>(p))));
  r.tested_nonempty = r.max_hc > r.critical;
  if (!r.tested_nonempty) return r;
  if (r.s_hat == 0) {
    // Every rank was excluded from the threshold curve; use the test curve.
    r.hc = hc_scores(sorted, p, opt.test);
    r.s_hat = static_cast<std::size_t>(std::max_element(r.hc.begin(), r.hc.end()) - r.hc.begin()) + 1;
  }

  const std::size_t at = r.order[r.s_hat - 1];
  r.threshold = r.pi[at];
  const double tkey = key[at];
  for (std::size_t j = 0; j < p; ++j) {
    const bool keep = opt.rule == ThresholdRule::Strict ? key[j] < tkey : key[j] <= tkey;
    if (keep) r.selected.push_back(j);
  }
  return r;
}

}  // namespace detail

/// Higher-criticism thresholding of a p-value vector.
inline SelectionResult hct_select(std::span<const double> pi, const HctOptions& opt = {}) {
  return detail::hct_core(std::vector<double>(pi.begin(), pi.end()), pi, opt);
}

/// As hct_select, from log p-values (ordering and threshold on the log scale).
inline SelectionResult hct_select_log(std::span<const double> log_pi, const HctOptions& opt = {}) {
  std::vector<double> pi(log_pi.size());
  for (std::size_t j = 0; j < pi.size(); ++j) {
    detail::require(!std::isnan(log_pi[j]) && log_pi[j] <= 0.0, "hct_select_log: log p-value must be <= 0");
    pi[j] = std::exp(log_pi[j]);
  }
  return detail::hct_core(std::move(pi), log_pi, opt);
}

/// False discovery proportion |selected \ truth| / max(|selected|, 1).
inline double fdr(std::span<const std::size_t> selected, std::span<const std::size_t> truth) {
  std::vector<std::size_t> t(truth.begin(), truth.end());
  std::sort(t.begin(), t.end());
  std::size_t false_hits = 0;
  for (std::size_t s : selected)
    if (!std::binary_search(t.begin(), t.end(), s)) ++false_hits;
  return static_cast<double>(false_hits) / static_cast<double>(std::max<std::size_t>(selected.size(), 1));
}

}  // namespace ngcs

#endif  // NGCS_RSTATS_HPP
