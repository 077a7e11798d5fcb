#pragma once

// Seeded, parallel batches of trajectories with the observer attached, and
// the finite-horizon summaries used as proxies for asymptotic events:
//   perpetual disagreement  ~  last switch after T/2
//   consensus               ~  no switch in the final T/2 steps

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <new>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "infolearn/beliefs.hpp"
#include "infolearn/dynamics.hpp"
#include "infolearn/format.hpp"
#include "infolearn/observer.hpp"
#include "json.hpp"

namespace infolearn {

/// Stateless 64-bit mixer (splitmix64 finaliser).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Per-trajectory stream seed; depends only on (master_seed, index).
inline std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
  return mix64(mix64(master_seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

struct ModelSpec {
  GaussianFamilyParams gaussian;
  std::optional<double> mixture_alpha;  // F_0 = alpha F_g + (1 - alpha) F_b over the pair

  LlrModel build() const {
    if (mixture_alpha) {
      // tau and m0 are irrelevant here; only the informative pair is used.
      return make_mixture_model(make_model_with_uninformative(gaussian.sigma,
                                                              NormalMixture::normal(0.0, 1.0)),
                                *mixture_alpha);
    }
    return make_gaussian_model(gaussian);
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

enum class RegimeMode : std::uint8_t { Fixed, FixedOmega, Random };

struct RegimeSelection {
  RegimeMode mode = RegimeMode::Random;
  Informativeness omega = Informativeness::Informative;
  PayoffState theta = PayoffState::Good;

  friend bool operator==(const RegimeSelection&, const RegimeSelection&) = default;
};

struct ExperimentConfig {
  ModelSpec model;
  double gamma = 0.5;
  std::size_t horizon = 2000;
  std::size_t num_trajectories = 2000;
  RegimeSelection regime;
  std::uint64_t master_seed = 0;
  double initial_r = 0.0;
  bool record_q_trace = false;
  bool record_switch_times = false;
  unsigned workers = 0;  // 0: hardware concurrency

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline void validate(const ExperimentConfig& c) {
  if (c.horizon < 1) throw InvalidParameter("horizon must be at least 1");
  if (c.num_trajectories < 1) throw InvalidParameter("need at least one trajectory");
  if (!(c.gamma > 0.0 && c.gamma < 1.0)) throw InvalidParameter("gamma must lie in (0, 1)");
  if (!std::isfinite(c.initial_r)) throw InvalidParameter("initial public LLR must be finite");
}

struct TrajectorySummary {
  std::size_t index = 0;
  WorldState world;
  Action final_action = Action::Good;
  std::size_t switch_count = 0;
  std::optional<std::size_t> last_switch_time;
  bool both_actions_second_half = false;
  double q_final = 0.5;
  double log_odds_final = 0.0;
  std::vector<std::size_t> switch_times;  // filled when recorded

  friend bool operator==(const TrajectorySummary&, const TrajectorySummary&) = default;
};

struct Quantiles {
  std::size_t count = 0;
  double q05 = 0, q25 = 0, q50 = 0, q75 = 0, q95 = 0;
};

/// Linear-interpolation sample quantile of sorted data.
inline double sorted_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline Quantiles quantiles_of(std::vector<double> v) {
  Quantiles q;
  q.count = v.size();
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  q.q05 = sorted_quantile(v, 0.05);
  q.q25 = sorted_quantile(v, 0.25);
  q.q50 = sorted_quantile(v, 0.50);
  q.q75 = sorted_quantile(v, 0.75);
  q.q95 = sorted_quantile(v, 0.95);
  return q;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return sorted_quantile(v, 0.5);
}

struct Aggregates {
  std::optional<double> herd_correctness_rate;  // P[a_T = theta] over informative rows
  double disagreement_fraction = 0.0;           // last switch after T/2
  double consensus_fraction = 0.0;              // no switch in the final T/2 steps
  double both_actions_second_half_fraction = 0.0;
  double mean_switch_count = 0.0;
  Quantiles q_all, q_informative, q_uninformative;
  Quantiles log_odds_all;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrajectorySummary> rows;
  Aggregates aggregates;
  std::vector<std::vector<double>> q_traces;  // per row when recorded
};

/// Thrown when a batch cannot finish; carries the number of completed rows.
class PartialResultError : public std::runtime_error {
 public:
  PartialResultError(const std::string& what, std::size_t completed)
      : std::runtime_error(what), completed_(completed) {}
  std::size_t completed() const { return completed_; }

 private:
  std::size_t completed_;
};

inline bool after_half(const std::optional<std::size_t>& last_switch, std::size_t horizon) {
  return last_switch && 2 * *last_switch > horizon;
}

inline Aggregates aggregate(const std::vector<TrajectorySummary>& rows, std::size_t horizon) {
  Aggregates agg;
  std::size_t informative = 0, correct = 0, disagree = 0, both = 0;
  double switches = 0.0;
  std::vector<double> q_all, q_inf, q_uninf, lo_all;
  for (const auto& row : rows) {
    if (row.world.omega == Informativeness::Informative) {
      ++informative;
      if (row.final_action == row.world.theta) ++correct;
      q_inf.push_back(row.q_final);
    } else {
      q_uninf.push_back(row.q_final);
    }
    if (after_half(row.last_switch_time, horizon)) ++disagree;
    if (row.both_actions_second_half) ++both;
    switches += static_cast<double>(row.switch_count);
    q_all.push_back(row.q_final);
    lo_all.push_back(row.log_odds_final);
  }
  const auto n = static_cast<double>(rows.size());
  if (informative > 0)
    agg.herd_correctness_rate = static_cast<double>(correct) / static_cast<double>(informative);
  agg.disagreement_fraction = static_cast<double>(disagree) / n;
  agg.consensus_fraction = 1.0 - agg.disagreement_fraction;
  agg.both_actions_second_half_fraction = static_cast<double>(both) / n;
  agg.mean_switch_count = switches / n;
  agg.q_all = quantiles_of(std::move(q_all));
  agg.q_informative = quantiles_of(std::move(q_inf));
  agg.q_uninformative = quantiles_of(std::move(q_uninf));
  agg.log_odds_all = quantiles_of(std::move(lo_all));
  return agg;
}

template <class Rng>
WorldState select_world(const RegimeSelection& sel, double gamma, Rng& rng) {
  switch (sel.mode) {
    case RegimeMode::Fixed: return {sel.omega, sel.theta};
    case RegimeMode::FixedOmega: {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      return {sel.omega, unit(rng) < 0.5 ? PayoffState::Good : PayoffState::Bad};
    }
    case RegimeMode::Random: return sample_world(gamma, rng);
  }
  return {};
}

/// One trajectory, fully determined by (config, model, index).
inline TrajectorySummary run_one(const ExperimentConfig& config, const LlrModel& model,
                                 std::size_t index, std::vector<double>* q_trace) {
  std::mt19937_64 rng(trajectory_seed(config.master_seed, index));
  const WorldState world = select_world(config.regime, config.gamma, rng);
  Trajectory traj = simulate_trajectory(model, world, config.horizon, config.initial_r, rng);

  TrajectorySummary row;
  row.index = index;
  row.world = world;
  row.final_action = traj.actions.back();
  row.switch_count = traj.switch_count;
  row.last_switch_time = traj.last_switch_time;

  bool seen_good = false, seen_bad = false;
  for (std::size_t t = config.horizon / 2; t < config.horizon; ++t)
    (traj.actions[t] == Action::Good ? seen_good : seen_bad) = true;
  row.both_actions_second_half = seen_good && seen_bad;

  if (config.record_switch_times) {
    for (std::size_t i = 1; i < traj.actions.size(); ++i)
      if (traj.actions[i] != traj.actions[i - 1]) row.switch_times.push_back(i + 1);
  }

  ObserverState obs = observer_init(config.gamma, config.initial_r);
  if (q_trace) q_trace->push_back(obs.q());
  for (Action a : traj.actions) {
    obs = observer_update(obs, model, a);
    if (q_trace) q_trace->push_back(obs.q());
  }
  row.log_odds_final = obs.log_odds();
  row.q_final = obs.q();
  return row;
}

inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  const LlrModel model = config.model.build();

  ExperimentResult result;
  result.config = config;
  result.rows.resize(config.num_trajectories);
  if (config.record_q_trace) result.q_traces.resize(config.num_trajectories);

  unsigned workers = config.workers ? config.workers : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(config.num_trajectories)));

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> completed{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    try {
      for (std::size_t i = next++; i < config.num_trajectories; i = next++) {
        auto* trace = config.record_q_trace ? &result.q_traces[i] : nullptr;
        result.rows[i] = run_one(config, model, i, trace);
        ++completed;
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = config.num_trajectories;  // drain the remaining workers
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const std::bad_alloc&) {
      throw PartialResultError("out of memory during experiment", completed.load());
    }
  }

  result.aggregates = aggregate(result.rows, config.horizon);
  return result;
}

// ---------------------------------------------------------------------------
// Same-variance Gaussian sweep under the uninformative source

struct SameVarianceRow {
  double m0 = 0.0;
  double disagreement_fraction = 0.0;
  double median_q = 0.0;
  double both_actions_fraction = 0.0;
  double mean_switch_count = 0.0;
};

inline std::vector<SameVarianceRow> same_variance_experiment(double sigma,
                                                             const std::vector<double>& m0_grid,
                                                             double gamma, std::size_t horizon,
                                                             std::size_t num_trajectories,
                                                             std::uint64_t master_seed = 0,
                                                             unsigned workers = 0) {
  std::vector<SameVarianceRow> table;
  for (double m0 : m0_grid) {
    ExperimentConfig cfg;
    cfg.model.gaussian = {sigma, sigma, m0};
    cfg.gamma = gamma;
    cfg.horizon = horizon;
    cfg.num_trajectories = num_trajectories;
    cfg.regime = {RegimeMode::FixedOmega, Informativeness::Uninformative, PayoffState::Good};
    cfg.master_seed = master_seed;  // common random numbers across the grid
    cfg.workers = workers;
    const auto res = run_experiment(cfg);
    table.push_back({m0, res.aggregates.disagreement_fraction, res.aggregates.q_all.q50,
                     res.aggregates.both_actions_second_half_fraction,
                     res.aggregates.mean_switch_count});
  }
  return table;
}

// ---------------------------------------------------------------------------
// Output

inline const char* omega_name(Informativeness w) {
  return w == Informativeness::Informative ? "1" : "0";
}

inline void write_rows_csv(std::ostream& out, const ExperimentResult& res) {
  out << "index,omega,theta,final_action,switch_count,last_switch_time,"
         "both_actions_second_half,q_T,log_odds_T\n";
  for (const auto& row : res.rows) {
    out << row.index << ',' << omega_name(row.world.omega) << ',' << to_char(row.world.theta)
        << ',' << to_char(row.final_action) << ',' << row.switch_count << ',';
    if (row.last_switch_time) out << *row.last_switch_time;
    out << ',' << (row.both_actions_second_half ? 1 : 0) << ',' << fmt_double(row.q_final) << ','
        << fmt_double(row.log_odds_final) << '\n';
  }
}

inline nlohmann::ordered_json to_json(const Quantiles& q) {
  nlohmann::ordered_json j;
  j["count"] = q.count;
  if (q.count == 0) return j;
  j["q05"] = q.q05;
  j["q25"] = q.q25;
  j["median"] = q.q50;
  j["q75"] = q.q75;
  j["q95"] = q.q95;
  return j;
}

inline nlohmann::ordered_json aggregates_json(const ExperimentResult& res) {
  const auto& a = res.aggregates;
  nlohmann::ordered_json j;
  j["num_trajectories"] = res.rows.size();
  j["horizon"] = res.config.horizon;
  j["herd_correctness_rate"] =
      a.herd_correctness_rate ? nlohmann::ordered_json(*a.herd_correctness_rate) : nullptr;
  j["disagreement_fraction"] = a.disagreement_fraction;
  j["consensus_fraction"] = a.consensus_fraction;
  j["both_actions_second_half_fraction"] = a.both_actions_second_half_fraction;
  j["mean_switch_count"] = a.mean_switch_count;
  j["q_T"] = {{"all", to_json(a.q_all)},
              {"informative", to_json(a.q_informative)},
              {"uninformative", to_json(a.q_uninformative)}};
  j["log_odds_q_T"] = to_json(a.log_odds_all);
  j["proxies"] = {
      {"perpetual_disagreement", "last_switch_time > T/2"},
      {"consensus", "no switch in the final T/2 steps"},
      {"note", "finite-horizon surrogates for asymptotic events; thresholds are not rates"}};
  return j;
}

}  // namespace infolearn
