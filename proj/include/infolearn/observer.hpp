#pragma once

// Exact Bayesian filter of an outside observer who sees only the action
// history and infers whether the signal source is informative.
//
// Hypotheses h = (omega, theta) in the order
//   0: (informative, good)  1: (informative, bad)
//   2: (uninformative, good)  3: (uninformative, bad)
// Under h the probability of action g at public LLR r is 1 - F_h(-r), with
// F_h = F_0 for both uninformative hypotheses.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>

#include "infolearn/beliefs.hpp"
#include "infolearn/dynamics.hpp"

namespace infolearn {

inline constexpr std::array<Regime, 4> kHypothesisRegime{Regime::Good, Regime::Bad,
                                                         Regime::Uninformative,
                                                         Regime::Uninformative};

/// log P(action | h, r) for the action taken at public LLR r.
template <LlrDistribution D>
double action_log_likelihood(const BasicLlrModel<D>& model, Regime regime, double r, Action a) {
  // a = g  <=>  llr >= -r: probability 1 - F(-r); a = b: F(-r).
  return a == Action::Good ? log_tail(model, regime, TailSide::Right, -r)
                           : log_tail(model, regime, TailSide::Left, r);
}

/// log pi and log(1 - pi) for the prior P[theta = g] = pi behind public LLR r.
inline std::array<double, 2> log_theta_prior(double r) {
  return {-normal::log_add_exp(0.0, -r), -normal::log_add_exp(0.0, r)};
}

struct ObserverState {
  std::array<double, 4> log_lik{};  // re-centred: max entry is 0 after each update
  double gamma = 0.5;
  double initial_r = 0.0;  // prior over theta, as a public LLR
  double r_track = 0.0;
  std::size_t t = 1;

  /// log(q / (1 - q)).
  double log_odds() const {
    const auto [lp, lq] = log_theta_prior(initial_r);
    const double informative = normal::log_add_exp(lp + log_lik[0], lq + log_lik[1]);
    const double uninformative = normal::log_add_exp(lp + log_lik[2], lq + log_lik[3]);
    return std::log(gamma) - std::log1p(-gamma) + informative - uninformative;
  }

  /// q_t = P[omega = informative | H_t].
  double q() const { return 1.0 / (1.0 + std::exp(-log_odds())); }

  /// Log posterior over the four hypotheses, in kHypothesisRegime order.
  std::array<double, 4> log_posterior() const {
    const auto [lp, lq] = log_theta_prior(initial_r);
    const double lg = std::log(gamma), l1g = std::log1p(-gamma);
    std::array<double, 4> post{lg + lp + log_lik[0], lg + lq + log_lik[1], l1g + lp + log_lik[2],
                               l1g + lq + log_lik[3]};
    double total = -std::numeric_limits<double>::infinity();
    for (double v : post) total = normal::log_add_exp(total, v);
    for (auto& v : post) v -= total;
    return post;
  }

  /// Posterior over the four hypotheses, in kHypothesisRegime order.
  std::array<double, 4> posterior() const {
    auto post = log_posterior();
    for (auto& v : post) v = std::exp(v);
    return post;
  }
};

inline ObserverState observer_init(double gamma, double initial_r = 0.0) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidParameter("gamma must lie in (0, 1)");
  if (!std::isfinite(initial_r)) throw InvalidParameter("initial public LLR must be finite");
  ObserverState s;
  s.gamma = gamma;
  s.initial_r = clamp_public(initial_r);
  s.r_track = s.initial_r;
  return s;
}

template <LlrDistribution D>
ObserverState observer_update(ObserverState state, const BasicLlrModel<D>& model, Action a) {
  const double ll_good = action_log_likelihood(model, Regime::Good, state.r_track, a);
  const double ll_bad = action_log_likelihood(model, Regime::Bad, state.r_track, a);
  const double ll_zero = action_log_likelihood(model, Regime::Uninformative, state.r_track, a);
  state.log_lik[0] += ll_good;
  state.log_lik[1] += ll_bad;
  state.log_lik[2] += ll_zero;
  state.log_lik[3] += ll_zero;
  const double m = *std::max_element(state.log_lik.begin(), state.log_lik.end());
  for (auto& l : state.log_lik) l -= m;
  state.r_track = update_public(model, state.r_track, a);
  ++state.t;
  return state;
}

/// Log-odds of q after the whole history, from the un-normalised
/// product-form likelihoods.
template <LlrDistribution D>
double batch_log_odds(const BasicLlrModel<D>& model, double gamma, double initial_r,
                      std::span<const Action> actions) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidParameter("gamma must lie in (0, 1)");
  double log_good = 0.0, log_bad = 0.0, log_zero = 0.0;
  double r = clamp_public(initial_r);
  for (Action a : actions) {
    log_good += action_log_likelihood(model, Regime::Good, r, a);
    log_bad += action_log_likelihood(model, Regime::Bad, r, a);
    log_zero += action_log_likelihood(model, Regime::Uninformative, r, a);
    r = update_public(model, r, a);
  }
  // P(H | informative) = pi L_good + (1 - pi) L_bad, P(H | uninformative) = L_zero.
  const auto [lp, lq] = log_theta_prior(clamp_public(initial_r));
  return std::log(gamma) - std::log1p(-gamma) + normal::log_add_exp(lp + log_good, lq + log_bad) -
         log_zero;
}

template <LlrDistribution D>
double batch_posterior(const BasicLlrModel<D>& model, double gamma, double initial_r,
                       std::span<const Action> actions) {
  return 1.0 / (1.0 + std::exp(-batch_log_odds(model, gamma, initial_r, actions)));
}

/// Fills traj.observer_beliefs with q_1..q_{T+1}.
template <LlrDistribution D>
void attach_observer(Trajectory& traj, const BasicLlrModel<D>& model, double gamma) {
  ObserverState s = observer_init(gamma, traj.public_llrs.front());
  traj.observer_beliefs.clear();
  traj.observer_beliefs.reserve(traj.actions.size() + 1);
  traj.observer_beliefs.push_back(s.q());
  for (Action a : traj.actions) {
    s = observer_update(s, model, a);
    traj.observer_beliefs.push_back(s.q());
  }
}

}  // namespace infolearn
