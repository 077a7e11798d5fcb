#pragma once

// Agents' equilibrium decision rule, the public-LLR recursion, and full
// trajectory simulation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "infolearn/beliefs.hpp"
#include "infolearn/format.hpp"

namespace infolearn {

/// |r| never exceeds this; beyond it both jumps are numerically zero.
inline constexpr double kPublicLlrCap = 1e6;

struct PublicBelief {
  double r = 0.0;

  double pi() const { return 1.0 / (1.0 + std::exp(-r)); }
  static PublicBelief from_pi(double pi) { return {std::log(pi) - std::log1p(-pi)}; }
};

/// Action g iff llr >= -r; the tie goes to g.
inline Action agent_action(double r, double llr) { return llr >= -r ? Action::Good : Action::Bad; }

/// D_g(r) = log[(1 - F_g(-r)) / (1 - F_b(-r))] >= 0.
template <LlrDistribution D>
double jump_good(const BasicLlrModel<D>& model, double r) {
  return log_tail(model, Regime::Good, TailSide::Right, -r) -
         log_tail(model, Regime::Bad, TailSide::Right, -r);
}

/// D_b(r) = log[F_g(-r) / F_b(-r)] <= 0.
template <LlrDistribution D>
double jump_bad(const BasicLlrModel<D>& model, double r) {
  return log_tail(model, Regime::Good, TailSide::Left, r) -
         log_tail(model, Regime::Bad, TailSide::Left, r);
}

inline double clamp_public(double r) { return std::clamp(r, -kPublicLlrCap, kPublicLlrCap); }

template <LlrDistribution D>
double update_public(const BasicLlrModel<D>& model, double r, Action a) {
  const double next = r + (a == Action::Good ? jump_good(model, r) : jump_bad(model, r));
  return clamp_public(next);
}

// ---------------------------------------------------------------------------
// Trajectories

struct Trajectory {
  WorldState world;
  std::vector<Action> actions;     // a_1..a_T
  std::vector<double> llrs;        // l_1..l_T
  std::vector<double> public_llrs; // r_1..r_{T+1}; r_t is held before action t
  std::vector<double> observer_beliefs;  // q_1..q_{T+1}, empty unless attached
  std::size_t switch_count = 0;
  std::optional<std::size_t> last_switch_time;  // largest t with a_t != a_{t-1}
  bool absorbed = false;                        // |r| reached kPublicLlrCap

  std::size_t horizon() const { return actions.size(); }
};

/// Recomputes switch_count and last_switch_time from the actions.
inline void tally_switches(Trajectory& traj) {
  traj.switch_count = 0;
  traj.last_switch_time.reset();
  for (std::size_t i = 1; i < traj.actions.size(); ++i) {
    if (traj.actions[i] != traj.actions[i - 1]) {
      ++traj.switch_count;
      traj.last_switch_time = i + 1;  // 1-based time of the switching agent
    }
  }
}

template <LlrDistribution D, class Rng>
Trajectory simulate_trajectory(const BasicLlrModel<D>& model, const WorldState& world,
                               std::size_t horizon, double initial_r, Rng& rng) {
  if (horizon == 0) throw InvalidParameter("horizon must be at least 1");
  if (!std::isfinite(initial_r)) throw InvalidParameter("initial public LLR must be finite");

  Trajectory traj;
  traj.world = world;
  traj.actions.reserve(horizon);
  traj.llrs.reserve(horizon);
  traj.public_llrs.reserve(horizon + 1);

  const auto& law = model.law(regime_of(world));
  double r = clamp_public(initial_r);
  traj.public_llrs.push_back(r);
  for (std::size_t t = 0; t < horizon; ++t) {
    const double llr = law.sample(rng);
    const Action a = agent_action(r, llr);
    traj.llrs.push_back(llr);
    traj.actions.push_back(a);
    r = update_public(model, r, a);
    if (std::abs(r) >= kPublicLlrCap) traj.absorbed = true;
    traj.public_llrs.push_back(r);
  }
  tally_switches(traj);
  return traj;
}

/// Row-per-step CSV: t,action,llr,r_before,q. q is empty when no observer
/// beliefs are attached.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,action,llr,r_before,q\n";
  for (std::size_t i = 0; i < traj.actions.size(); ++i) {
    out << (i + 1) << ',' << to_char(traj.actions[i]) << ',' << fmt_double(traj.llrs[i]) << ','
        << fmt_double(traj.public_llrs[i]) << ',';
    if (i < traj.observer_beliefs.size()) out << fmt_double(traj.observer_beliefs[i]);
    out << '\n';
  }
}

}  // namespace infolearn
