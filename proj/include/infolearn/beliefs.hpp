#pragma once

// Conditional laws of the private log-likelihood ratio (LLR) under each
// (informativeness, payoff-state) regime.
//
// Distributions live directly in LLR space: every agent decision depends on
// the signal only through its LLR, so the raw signal space is never needed
// beyond the Gaussian constructor below.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "infolearn/normal.hpp"

namespace infolearn {

class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DistinctnessViolation : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

// ---------------------------------------------------------------------------
// World state

enum class Informativeness : std::uint8_t { Uninformative = 0, Informative = 1 };

/// Payoff state theta; agents' actions share the same two labels.
enum class Action : std::uint8_t { Good, Bad };
using PayoffState = Action;

inline char to_char(Action a) { return a == Action::Good ? 'G' : 'B'; }
inline Action opposite(Action a) { return a == Action::Good ? Action::Bad : Action::Good; }

struct WorldState {
  Informativeness omega = Informativeness::Informative;
  PayoffState theta = PayoffState::Good;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

/// theta uniform, omega informative with probability gamma, independently.
template <class Rng>
WorldState sample_world(double gamma, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  WorldState w;
  w.theta = unit(rng) < 0.5 ? PayoffState::Good : PayoffState::Bad;
  w.omega = unit(rng) < gamma ? Informativeness::Informative : Informativeness::Uninformative;
  return w;
}

/// Which conditional CDF of the private LLR.
enum class Regime : std::uint8_t { Good, Bad, Uninformative };

inline Regime regime_of(const WorldState& w) {
  if (w.omega == Informativeness::Uninformative) return Regime::Uninformative;
  return w.theta == PayoffState::Good ? Regime::Good : Regime::Bad;
}

enum class TailSide : std::uint8_t { Left, Right };

// ---------------------------------------------------------------------------
// Distributions

template <class D>
concept LlrDistribution = requires(const D& d, double x, std::mt19937_64& rng) {
  { d.cdf(x) } -> std::convertible_to<double>;
  { d.log_cdf(x) } -> std::convertible_to<double>;
  { d.log_sf(x) } -> std::convertible_to<double>;
  { d.log_pdf(x) } -> std::convertible_to<double>;
  { d.quantile(x) } -> std::convertible_to<double>;
  { d.sample(rng) } -> std::convertible_to<double>;
};

/// Finite mixture of normal laws. A single component is a plain normal.
class NormalMixture {
 public:
  struct Component {
    double weight;
    double mean;
    double sd;
  };

  static NormalMixture normal(double mean, double sd) {
    return NormalMixture({Component{1.0, mean, sd}});
  }

  explicit NormalMixture(std::vector<Component> components) : components_(std::move(components)) {
    if (components_.empty()) throw InvalidParameter("mixture needs at least one component");
    double total = 0.0;
    for (const auto& c : components_) {
      if (!(c.weight > 0.0) || !(c.sd > 0.0) || !std::isfinite(c.mean))
        throw InvalidParameter("mixture component needs weight > 0, sd > 0, finite mean");
      total += c.weight;
    }
    for (auto& c : components_) {
      c.weight /= total;
      log_weights_.push_back(std::log(c.weight));
    }
  }

  /// alpha * a + (1 - alpha) * b.
  static NormalMixture blend(const NormalMixture& a, const NormalMixture& b, double alpha) {
    std::vector<Component> out;
    for (auto c : a.components_) out.push_back({alpha * c.weight, c.mean, c.sd});
    for (auto c : b.components_) out.push_back({(1.0 - alpha) * c.weight, c.mean, c.sd});
    return NormalMixture(std::move(out));
  }

  const std::vector<Component>& components() const { return components_; }
  bool is_normal() const { return components_.size() == 1; }
  double mean() const {
    double m = 0.0;
    for (const auto& c : components_) m += c.weight * c.mean;
    return m;
  }

  double cdf(double x) const {
    double p = 0.0;
    for (const auto& c : components_) p += c.weight * normal::cdf((x - c.mean) / c.sd);
    return p;
  }

  double log_cdf(double x) const {
    return fold([x](const Component& c) { return normal::log_cdf((x - c.mean) / c.sd); });
  }

  double log_sf(double x) const {
    return fold([x](const Component& c) { return normal::log_sf((x - c.mean) / c.sd); });
  }

  double log_pdf(double x) const {
    return fold([x](const Component& c) {
      return normal::log_pdf((x - c.mean) / c.sd) - std::log(c.sd);
    });
  }

  double quantile(double u) const {
    if (is_normal()) return components_[0].mean + components_[0].sd * normal::quantile(u);
    if (!(u > 0.0)) return -std::numeric_limits<double>::infinity();
    if (!(u < 1.0)) return std::numeric_limits<double>::infinity();
    // Component quantiles bracket the mixture quantile.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& c : components_) {
      const double q = c.mean + c.sd * normal::quantile(u);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    const double log_u = std::log(u);
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++i) {
      const double mid = 0.5 * (lo + hi);
      (log_cdf(mid) < log_u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  template <class Rng>
  double sample(Rng& rng) const {
    std::normal_distribution<double> z(0.0, 1.0);
    if (is_normal()) return components_[0].mean + components_[0].sd * z(rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = unit(rng);
    const Component* pick = &components_.back();
    for (const auto& c : components_) {
      if (u < c.weight) {
        pick = &c;
        break;
      }
      u -= c.weight;
    }
    return pick->mean + pick->sd * z(rng);
  }

 private:
  template <class F>
  double fold(F&& per_component) const {
    if (is_normal()) return per_component(components_[0]);
    double acc = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < components_.size(); ++i)
      acc = normal::log_add_exp(acc, log_weights_[i] + per_component(components_[i]));
    return acc;
  }

  std::vector<Component> components_;
  std::vector<double> log_weights_;
};

static_assert(LlrDistribution<NormalMixture>);

// ---------------------------------------------------------------------------
// Model

/// The triple (F_good, F_bad, F_0) of private-LLR laws. Immutable; share freely.
template <LlrDistribution D>
struct BasicLlrModel {
  using distribution_type = D;

  D good;           // omega = informative, theta = good
  D bad;            // omega = informative, theta = bad
  D uninformative;  // omega = uninformative

  const D& law(Regime r) const {
    switch (r) {
      case Regime::Good: return good;
      case Regime::Bad: return bad;
      case Regime::Uninformative: return uninformative;
    }
    return uninformative;
  }
};

using LlrModel = BasicLlrModel<NormalMixture>;

/// Gaussian raw signals: informative s ~ N(+-1, sigma^2), uninformative
/// s ~ N(m0, tau^2). The private LLR is 2 s / sigma^2.
struct GaussianFamilyParams {
  double sigma = 1.0;
  double tau = 1.0;
  double m0 = 0.0;

  friend bool operator==(const GaussianFamilyParams&, const GaussianFamilyParams&) = default;
};

inline constexpr double kParamTolerance = 1e-12;

inline void validate(const GaussianFamilyParams& p) {
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma))
    throw InvalidParameter("sigma must be positive and finite");
  if (!(p.tau > 0.0) || !std::isfinite(p.tau))
    throw InvalidParameter("tau must be positive and finite");
  if (!std::isfinite(p.m0)) throw InvalidParameter("m0 must be finite");
  if (std::abs(p.tau - p.sigma) <= kParamTolerance &&
      std::abs(std::abs(p.m0) - 1.0) <= kParamTolerance)
    throw DistinctnessViolation("uninformative law (tau, m0) replicates an informative law");
}

inline double signal_to_llr(const GaussianFamilyParams& p, double s) {
  return 2.0 * s / (p.sigma * p.sigma);
}

/// Draw a raw Gaussian signal (not its LLR) under the given world.
template <class Rng>
double sample_signal(const GaussianFamilyParams& p, const WorldState& w, Rng& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  switch (regime_of(w)) {
    case Regime::Good: return 1.0 + p.sigma * z(rng);
    case Regime::Bad: return -1.0 + p.sigma * z(rng);
    case Regime::Uninformative: return p.m0 + p.tau * z(rng);
  }
  return 0.0;
}

/// Pushforward of the raw Gaussian signals through s -> 2 s / sigma^2:
///   good  ~ N( 2/sigma^2, 4/sigma^2)
///   bad   ~ N(-2/sigma^2, 4/sigma^2)
///   0     ~ N(2 m0/sigma^2, 4 tau^2/sigma^4)
inline LlrModel make_gaussian_model(const GaussianFamilyParams& p) {
  validate(p);
  const double s2 = p.sigma * p.sigma;
  const double mu = 2.0 / s2;
  const double sd = 2.0 / p.sigma;
  return LlrModel{NormalMixture::normal(mu, sd), NormalMixture::normal(-mu, sd),
                  NormalMixture::normal(2.0 * p.m0 / s2, 2.0 * p.tau / s2)};
}

/// Keep the informative pair of `base`; F_0 = alpha F_good + (1 - alpha) F_bad.
inline LlrModel make_mixture_model(const LlrModel& base, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("mixture weight must lie in (0, 1)");
  return LlrModel{base.good, base.bad, NormalMixture::blend(base.good, base.bad, alpha)};
}

/// Gaussian informative pair for the given sigma next to an arbitrary F_0.
inline LlrModel make_model_with_uninformative(double sigma, NormalMixture uninformative) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw InvalidParameter("sigma must be positive and finite");
  const double mu = 2.0 / (sigma * sigma);
  const double sd = 2.0 / sigma;
  return LlrModel{NormalMixture::normal(mu, sd), NormalMixture::normal(-mu, sd),
                  std::move(uninformative)};
}

template <LlrDistribution D, class Rng>
double sample_llr(const BasicLlrModel<D>& model, const WorldState& world, Rng& rng) {
  return model.law(regime_of(world)).sample(rng);
}

/// Left: log F(-x). Right: log(1 - F(x)).
template <LlrDistribution D>
double log_tail(const BasicLlrModel<D>& model, Regime regime, TailSide side, double x) {
  const D& law = model.law(regime);
  return side == TailSide::Left ? law.log_cdf(-x) : law.log_sf(x);
}

}  // namespace infolearn
