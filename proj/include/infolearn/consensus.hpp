#pragma once

// Immediate-agreement analysis along the deterministic consensus path
// r_{t+1} = phi(r_t), phi(x) = x + D_g(x).
//
// The probability that every agent repeats the consensus action under a
// regime X is prod_t (1 - p_t) with p_t = F_X(-r_t); it is zero iff
// sum_t p_t diverges. Both are decided here from a finite horizon:
//
// With h(x) = p(x) / F_b(-x) and Delta_t = r_{t+1} - r_t = D_g(r_t), the
// bounds
//   (1 - F_b(-x)) D_g(x) <= F_b(-x) <= D_g(x) / kappa(x),
//   kappa(x) = 1 - e^{-x} / (1 - F_g(-x)),
// tie sum_t p_t to the integral of h along the path, so:
//
// * Converges: if h and D_g are non-increasing beyond a = r_T and
//   log h(y) <= log h(a) - s (y - a), the remainder after T is at most
//   h(a) / (s kappa(a)).
// * Diverges: since r_t -> infinity, the sum after T is at least
//   (1 - F_b(-a)) * min_[a,R] h * (R - a - Delta_T) for any R > a; once that
//   plus the partial sum passes the threshold the product is below e^-20.
//
// The monotonicity and envelope conditions are verified on a grid, so both
// verdicts are numerical certificates rather than proofs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "infolearn/beliefs.hpp"
#include "infolearn/dynamics.hpp"
#include "infolearn/format.hpp"

namespace infolearn {

template <LlrDistribution D>
double phi(const BasicLlrModel<D>& model, double r) {
  return clamp_public(r + jump_good(model, r));
}

struct ConsensusPath {
  double initial_r = 0.0;
  Action target = Action::Good;
  std::vector<double> values;  // r_1..r_T, values[0] == initial_r
  bool absorbed = false;

  /// The path oriented so that it increases: r for g, -r for b.
  std::vector<double> oriented() const {
    if (target == Action::Good) return values;
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [](double v) { return -v; });
    return out;
  }
};

/// Public LLRs under an unbroken run of `target` actions from initial_r.
template <LlrDistribution D>
ConsensusPath consensus_path(const BasicLlrModel<D>& model, double initial_r, std::size_t horizon,
                             Action target = Action::Good) {
  if (horizon == 0) throw InvalidParameter("horizon must be at least 1");
  if (!std::isfinite(initial_r)) throw InvalidParameter("initial public LLR must be finite");
  ConsensusPath path;
  path.initial_r = initial_r;
  path.target = target;
  path.values.reserve(horizon);
  double r = clamp_public(initial_r);
  path.values.push_back(r);
  for (std::size_t t = 1; t < horizon; ++t) {
    r = update_public(model, r, target);
    if (std::abs(r) >= kPublicLlrCap) path.absorbed = true;
    path.values.push_back(r);
  }
  return path;
}

/// Which tail is summed along the (oriented) path: Left -> F_X(-x),
/// Right -> 1 - F_X(x).
struct TailSum {
  Regime regime;
  TailSide side;
};

enum class SumVerdict { Diverges, Converges, Inconclusive };

inline std::string_view to_string(SumVerdict v) {
  switch (v) {
    case SumVerdict::Diverges: return "Diverges";
    case SumVerdict::Converges: return "Converges";
    case SumVerdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

struct DivergenceOptions {
  double threshold = 20.0;           // partial sum certifying divergence
  double increment_floor = 1e-15;    // last term must be below this to converge
  double remainder_target = 1e-9;    // certified remainder bound to converge
  double grid_step = 0.05;           // certificate grid spacing in x
  double envelope_width = 50.0;      // extent of the convergence envelope check
  double projection_width = 2000.0;  // how far past r_T the divergence scan looks
};

struct DivergenceResult {
  std::vector<double> terms;         // p_t = exp(log term) along the path
  std::vector<double> partial_sums;  // S_1..S_T
  SumVerdict verdict = SumVerdict::Inconclusive;
  // Upper bound on sum_{t>T} p_t; +inf when none was certified.
  double tail_bound = std::numeric_limits<double>::infinity();
  // Lower bound on the full sum (partial sum plus certified projection).
  double sum_lower_bound = 0.0;
};

namespace detail {

template <LlrDistribution D>
double log_term(const BasicLlrModel<D>& model, TailSum which, double x) {
  return log_tail(model, which.regime, which.side, x);
}

/// log h(x) = log p(x) - log F_b(-x).
template <LlrDistribution D>
double log_h(const BasicLlrModel<D>& model, TailSum which, double x) {
  return log_term(model, which, x) - log_tail(model, Regime::Bad, TailSide::Left, x);
}

/// log kappa(x); NaN when kappa <= 0.
template <LlrDistribution D>
double log_kappa(const BasicLlrModel<D>& model, double x) {
  const double log_ratio = -x - log_tail(model, Regime::Good, TailSide::Right, -x);
  if (!(log_ratio < 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log(-std::expm1(log_ratio));
}

inline bool non_increasing(double next, double prev) {
  return next <= prev + 1e-12 * std::max(1.0, std::abs(prev));
}

/// Certified remainder bound after the last path point a, or +inf.
template <LlrDistribution D>
double convergence_remainder(const BasicLlrModel<D>& model, TailSum which, double a,
                             const DivergenceOptions& opt) {
  const double lk = log_kappa(model, a);
  if (!(a > 0.0) || std::isnan(lk)) return std::numeric_limits<double>::infinity();

  const double lh_a = log_h(model, which, a);
  double prev_lh = lh_a;
  double prev_jump = jump_good(model, a);
  double slope = std::numeric_limits<double>::infinity();
  const auto steps = static_cast<std::size_t>(opt.envelope_width / opt.grid_step);
  for (std::size_t j = 1; j <= steps; ++j) {
    const double y = a + opt.grid_step * static_cast<double>(j);
    const double lh = log_h(model, which, y);
    const double jump = jump_good(model, y);
    if (!non_increasing(lh, prev_lh) || !non_increasing(jump, prev_jump))
      return std::numeric_limits<double>::infinity();
    slope = std::min(slope, (lh_a - lh) / (y - a));
    prev_lh = lh;
    prev_jump = jump;
  }
  if (!(slope > 0.0)) return std::numeric_limits<double>::infinity();
  return std::exp(lh_a - lk) / slope;
}

/// Certified lower bound on sum_{t>T} p_t reachable within the scan, stopping
/// once partial + bound reaches the threshold.
template <LlrDistribution D>
double divergence_projection(const BasicLlrModel<D>& model, TailSum which, double a,
                             double partial, const DivergenceOptions& opt) {
  const double stay = std::exp(log_tail(model, Regime::Bad, TailSide::Right, -a));  // 1 - F_b(-a)
  const double first_step = jump_good(model, a);
  double min_h = std::exp(log_h(model, which, a));
  double best = 0.0;
  const auto steps = static_cast<std::size_t>(opt.projection_width / opt.grid_step);
  for (std::size_t j = 1; j <= steps; ++j) {
    const double y = a + opt.grid_step * static_cast<double>(j);
    min_h = std::min(min_h, std::exp(log_h(model, which, y)));
    best = std::max(best, stay * min_h * std::max(0.0, y - a - first_step));
    if (partial + best >= opt.threshold) break;
    if (min_h == 0.0) break;
  }
  return best;
}

}  // namespace detail

/// Partial sums of the selected tail along the path with a verdict on the
/// infinite sum. Paths that follow a run of b are mirrored first.
template <LlrDistribution D>
DivergenceResult divergence_test(const BasicLlrModel<D>& model, const ConsensusPath& path,
                                 TailSum which, const DivergenceOptions& opt = {}) {
  if (path.values.empty()) throw InvalidParameter("path must be non-empty");
  const auto xs = path.oriented();

  DivergenceResult res;
  res.terms.reserve(xs.size());
  res.partial_sums.reserve(xs.size());
  double sum = 0.0;
  for (double x : xs) {
    const double p = std::exp(detail::log_term(model, which, x));
    sum += p;
    res.terms.push_back(p);
    res.partial_sums.push_back(sum);
  }
  res.sum_lower_bound = sum;

  const double a = xs.back();
  if (sum >= opt.threshold) {
    res.verdict = SumVerdict::Diverges;
    return res;
  }
  const double projected = detail::divergence_projection(model, which, a, sum, opt);
  if (sum + projected >= opt.threshold) {
    res.verdict = SumVerdict::Diverges;
    res.sum_lower_bound = sum + projected;
    return res;
  }
  res.sum_lower_bound = sum + projected;
  const double remainder = detail::convergence_remainder(model, which, a, opt);
  res.tail_bound = remainder;
  if (res.terms.back() < opt.increment_floor && remainder < opt.remainder_target)
    res.verdict = SumVerdict::Converges;
  return res;
}

// ---------------------------------------------------------------------------

/// Enclosure of the probability that every agent takes `target`, under the
/// given regime, starting from initial_r.
struct AgreementEstimate {
  double lower = 0.0;
  double upper = 1.0;
  double truncated = 1.0;  // prod_{t<=T} (1 - p_t); exact for the first T agents
  std::size_t horizon = 0;
  bool diverged = false;   // certified: the infinite product is 0
  SumVerdict verdict = SumVerdict::Inconclusive;
  double tail_bound = std::numeric_limits<double>::infinity();
};

template <LlrDistribution D>
AgreementEstimate immediate_agreement_prob(const BasicLlrModel<D>& model, Regime regime,
                                           double initial_r, std::size_t horizon,
                                           Action target = Action::Good,
                                           const DivergenceOptions& opt = {}) {
  const auto path = consensus_path(model, initial_r, horizon, target);
  // Probability of repeating `target` at r: 1 - F(-r) for g, F(-r) for b.
  double log_stay = 0.0;
  for (double r : path.values) {
    log_stay += target == Action::Good ? log_tail(model, regime, TailSide::Right, -r)
                                       : log_tail(model, regime, TailSide::Left, r);
  }
  const TailSum which{regime, target == Action::Good ? TailSide::Left : TailSide::Right};
  const auto div = divergence_test(model, path, which, opt);

  AgreementEstimate est;
  est.horizon = horizon;
  est.truncated = std::exp(log_stay);
  est.verdict = div.verdict;
  est.tail_bound = div.tail_bound;
  switch (div.verdict) {
    case SumVerdict::Diverges:
      est.diverged = true;
      est.lower = 0.0;
      // prod (1 - p) <= exp(-sum p).
      est.upper = std::min(est.truncated, std::exp(-div.sum_lower_bound));
      break;
    case SumVerdict::Converges:
    case SumVerdict::Inconclusive:
      // A finite remainder bound is enough for a lower bound even when it is
      // too loose for a Converges verdict.
      // -log(1 - p) <= p / (1 - p_max) for the remaining, decreasing p_t.
      est.upper = est.truncated;
      if (std::isfinite(div.tail_bound)) {
        const double p_max = div.terms.back();
        est.lower = est.truncated * std::exp(-div.tail_bound / (1.0 - p_max));
      }
      break;
  }
  return est;
}

/// Smallest grid point x* such that phi is non-decreasing on [x*, x_max];
/// the grid spans [-x_max, x_max]. Empty if phi decreases at the top.
template <LlrDistribution D>
std::optional<double> eventual_monotonicity_threshold(const BasicLlrModel<D>& model, double x_max,
                                                      std::size_t n_grid = 4001) {
  if (!(x_max > 0.0)) throw InvalidParameter("x_max must be positive");
  if (n_grid < 2) throw InvalidParameter("grid needs at least 2 points");
  const double step = 2.0 * x_max / static_cast<double>(n_grid - 1);
  auto x_at = [&](std::size_t i) { return -x_max + step * static_cast<double>(i); };

  std::size_t i = n_grid - 1;
  double upper = phi(model, x_at(i));
  while (i > 0) {
    const double lower = phi(model, x_at(i - 1));
    if (lower > upper + 1e-12 * std::max(1.0, std::abs(upper))) break;
    upper = lower;
    --i;
  }
  if (i == n_grid - 1) return std::nullopt;
  return x_at(i);
}

inline void write_path_csv(std::ostream& out, const ConsensusPath& path) {
  out << "t,r\n";
  for (std::size_t i = 0; i < path.values.size(); ++i)
    out << (i + 1) << ',' << fmt_double(path.values[i]) << '\n';
}

}  // namespace infolearn
