#pragma once

// Tail ratios of F_0 against the informative laws and relative tail
// thickness classification.
//
//   L_theta(x) = F_0(-x) / F_theta(-x)
//   R_theta(x) = (1 - F_0(x)) / (1 - F_theta(x))
//
// Fatter:  L_b and R_g bounded below for all large x.
// Thinner: L_g or R_b bounded above for all large x.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "infolearn/beliefs.hpp"
#include "infolearn/format.hpp"

namespace infolearn {

struct TailRatios {
  double log_L_good;
  double log_L_bad;
  double log_R_good;
  double log_R_bad;
};

template <LlrDistribution D>
TailRatios tail_ratios(const BasicLlrModel<D>& model, double x) {
  if (!(x >= 0.0)) throw InvalidParameter("tail ratios are defined for x >= 0");
  const double left0 = log_tail(model, Regime::Uninformative, TailSide::Left, x);
  const double right0 = log_tail(model, Regime::Uninformative, TailSide::Right, x);
  return {left0 - log_tail(model, Regime::Good, TailSide::Left, x),
          left0 - log_tail(model, Regime::Bad, TailSide::Left, x),
          right0 - log_tail(model, Regime::Good, TailSide::Right, x),
          right0 - log_tail(model, Regime::Bad, TailSide::Right, x)};
}

enum class TailVerdict { Fatter, Thinner, Neither, Undetermined };

inline std::string_view to_string(TailVerdict v) {
  switch (v) {
    case TailVerdict::Fatter: return "Fatter";
    case TailVerdict::Thinner: return "Thinner";
    case TailVerdict::Neither: return "Neither";
    case TailVerdict::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

struct TailEvidenceRow {
  double x;
  TailRatios ratios;
};

struct TailClassification {
  TailVerdict verdict = TailVerdict::Undetermined;
  bool closed_form = false;  // false: finite-grid heuristic, advisory only
  std::vector<TailEvidenceRow> evidence;
  // Fatter: lower bound found for min(L_b, R_g). Thinner: upper bound found
  // for the bounded ratio (reported as 1/eps).
  std::optional<double> epsilon_estimate;
};

/// Gaussian tail order is decided by the variances alone.
inline TailClassification classify_gaussian(const GaussianFamilyParams& p) {
  validate(p);
  TailClassification c;
  c.closed_form = true;
  if (std::abs(p.tau - p.sigma) <= kParamTolerance)
    c.verdict = TailVerdict::Neither;
  else
    c.verdict = p.tau > p.sigma ? TailVerdict::Fatter : TailVerdict::Thinner;
  return c;
}

/// |slope| below this (per unit x) counts as flat.
inline constexpr double kTrendThreshold = 1e-3;

namespace detail {

inline double ls_slope(std::span<const double> xs, std::span<const double> ys) {
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace detail

/// Geometric grid 1 = x_0 < ... < x_{n-1} = x_max.
inline std::vector<double> geometric_grid(double x_max, std::size_t n) {
  std::vector<double> xs(n);
  const double ratio = std::log(x_max) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) xs[i] = std::exp(ratio * static_cast<double>(i));
  xs.back() = x_max;
  return xs;
}

/// Finite-grid evidence for the tail order. Fatter when both log L_b and
/// log R_g trend non-decreasing over the upper half of the grid; Thinner when
/// log L_g or log R_b trends decreasing there. Never an asymptotic proof.
template <LlrDistribution D>
TailClassification classify_empirical(const BasicLlrModel<D>& model, double x_max,
                                      std::size_t n_grid) {
  if (!(x_max > 1.0)) throw InvalidParameter("x_max must exceed 1");
  if (n_grid < 16) throw InvalidParameter("grid needs at least 16 points");

  TailClassification c;
  const auto xs = geometric_grid(x_max, n_grid);
  for (double x : xs) c.evidence.push_back({x, tail_ratios(model, x)});

  const std::size_t half = n_grid / 2;
  std::vector<double> top_x(xs.begin() + static_cast<std::ptrdiff_t>(half), xs.end());
  auto column = [&](double TailRatios::*field) {
    std::vector<double> out;
    for (std::size_t i = half; i < n_grid; ++i) out.push_back(c.evidence[i].ratios.*field);
    return out;
  };
  const auto lb = column(&TailRatios::log_L_bad);
  const auto rg = column(&TailRatios::log_R_good);
  const auto lg = column(&TailRatios::log_L_good);
  const auto rb = column(&TailRatios::log_R_bad);

  const bool fatter = detail::ls_slope(top_x, lb) >= -kTrendThreshold &&
                      detail::ls_slope(top_x, rg) >= -kTrendThreshold;
  const bool thinner_l = detail::ls_slope(top_x, lg) < -kTrendThreshold;
  const bool thinner_r = detail::ls_slope(top_x, rb) < -kTrendThreshold;
  const bool thinner = thinner_l || thinner_r;

  if (fatter && !thinner) {
    c.verdict = TailVerdict::Fatter;
    const double lo = std::min(*std::min_element(lb.begin(), lb.end()),
                               *std::min_element(rg.begin(), rg.end()));
    c.epsilon_estimate = std::exp(lo);
  } else if (thinner && !fatter) {
    c.verdict = TailVerdict::Thinner;
    double hi = std::numeric_limits<double>::infinity();
    if (thinner_l) hi = std::min(hi, *std::max_element(lg.begin(), lg.end()));
    if (thinner_r) hi = std::min(hi, *std::max_element(rb.begin(), rb.end()));
    c.epsilon_estimate = std::exp(-hi);
  }
  return c;
}

inline void write_tail_evidence_csv(std::ostream& out, const TailClassification& c) {
  out << "x,log_L_good,log_L_bad,log_R_good,log_R_bad\n";
  for (const auto& row : c.evidence) {
    out << fmt_double(row.x) << ',' << fmt_double(row.ratios.log_L_good) << ','
        << fmt_double(row.ratios.log_L_bad) << ',' << fmt_double(row.ratios.log_R_good) << ','
        << fmt_double(row.ratios.log_R_bad) << '\n';
  }
}

}  // namespace infolearn
