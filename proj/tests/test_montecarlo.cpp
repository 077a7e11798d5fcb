#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "infolearn/montecarlo.hpp"

using namespace infolearn;

namespace {

ExperimentConfig base_config(double tau, Informativeness omega) {
  ExperimentConfig c;
  c.model.gaussian = {1.0, tau, 0.0};
  c.horizon = 2000;
  c.num_trajectories = 2000;
  c.regime = {RegimeMode::FixedOmega, omega, PayoffState::Good};
  c.master_seed = 2718;
  return c;
}

}  // namespace

TEST(MonteCarlo, SeedsAreStateless) {
  EXPECT_EQ(trajectory_seed(1, 5), trajectory_seed(1, 5));
  EXPECT_NE(trajectory_seed(1, 5), trajectory_seed(1, 6));
  EXPECT_NE(trajectory_seed(1, 5), trajectory_seed(2, 5));
}

TEST(MonteCarlo, Validation) {
  ExperimentConfig c;
  c.horizon = 0;
  EXPECT_THROW(run_experiment(c), InvalidParameter);
  c.horizon = 5;
  c.num_trajectories = 0;
  EXPECT_THROW(run_experiment(c), InvalidParameter);
  c.num_trajectories = 5;
  c.gamma = 1.0;
  EXPECT_THROW(run_experiment(c), InvalidParameter);
}

TEST(MonteCarlo, IndependentOfWorkerCount) {
  ExperimentConfig c = base_config(2.0, Informativeness::Uninformative);
  c.horizon = 300;
  c.num_trajectories = 97;
  c.regime.mode = RegimeMode::Random;
  c.record_switch_times = true;
  c.workers = 1;
  const auto one = run_experiment(c);
  c.workers = 4;
  const auto four = run_experiment(c);
  ASSERT_EQ(one.rows.size(), 97u);
  EXPECT_EQ(one.rows, four.rows);
  for (std::size_t i = 0; i < one.rows.size(); ++i) EXPECT_EQ(one.rows[i].index, i);
}

TEST(MonteCarlo, AggregatesRecomputable) {
  ExperimentConfig c = base_config(2.0, Informativeness::Informative);
  c.horizon = 400;
  c.num_trajectories = 200;
  c.regime.mode = RegimeMode::Random;
  c.record_switch_times = true;
  const auto res = run_experiment(c);
  const auto again = aggregate(res.rows, c.horizon);
  EXPECT_EQ(again.disagreement_fraction, res.aggregates.disagreement_fraction);
  EXPECT_EQ(again.q_all.q50, res.aggregates.q_all.q50);
  EXPECT_EQ(again.herd_correctness_rate, res.aggregates.herd_correctness_rate);
  for (const auto& row : res.rows) {
    EXPECT_EQ(row.switch_times.size(), row.switch_count);
    if (row.last_switch_time) {
      EXPECT_EQ(row.switch_times.back(), *row.last_switch_time);
    }
  }
}

TEST(MonteCarlo, QTraceMatchesFinal) {
  ExperimentConfig c = base_config(0.5, Informativeness::Uninformative);
  c.horizon = 50;
  c.num_trajectories = 5;
  c.record_q_trace = true;
  const auto res = run_experiment(c);
  ASSERT_EQ(res.q_traces.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    ASSERT_EQ(res.q_traces[i].size(), 51u);
    EXPECT_EQ(res.q_traces[i].back(), res.rows[i].q_final);
    EXPECT_EQ(res.q_traces[i].front(), c.gamma);
  }
}

TEST(MonteCarlo, FatterTailsKeepDisagreeing) {
  const auto res = run_experiment(base_config(2.0, Informativeness::Uninformative));
  EXPECT_GE(res.aggregates.disagreement_fraction, 0.5);
  EXPECT_LE(res.aggregates.q_all.q50, 0.05);
}

TEST(MonteCarlo, ThinnerTailsReachConsensus) {
  const auto res = run_experiment(base_config(0.5, Informativeness::Uninformative));
  EXPECT_GE(res.aggregates.consensus_fraction, 0.9);
  EXPECT_GE(res.aggregates.q_all.q50, 0.2);
}

TEST(MonteCarlo, InformativeHerdsCorrectly) {
  const auto res = run_experiment(base_config(2.0, Informativeness::Informative));
  ASSERT_TRUE(res.aggregates.herd_correctness_rate.has_value());
  EXPECT_GE(*res.aggregates.herd_correctness_rate, 0.95);
  EXPECT_GE(res.aggregates.q_all.q50, 0.95);
  EXPECT_FALSE(res.aggregates.q_uninformative.count);
}

TEST(MonteCarlo, LogOddsGrowWithHorizon) {
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t T : {500, 1000, 2000}) {
    auto c = base_config(2.0, Informativeness::Informative);
    c.horizon = T;
    c.num_trajectories = 500;
    const double med = run_experiment(c).aggregates.log_odds_all.q50;
    EXPECT_GT(med, prev) << T;
    prev = med;
  }
}

TEST(MonteCarlo, SameVarianceTable) {
  const auto table = same_variance_experiment(1.0, {0.0, 0.5}, 0.5, 300, 200, 1);
  ASSERT_EQ(table.size(), 2u);
  EXPECT_EQ(table[0].m0, 0.0);
  EXPECT_EQ(table[1].m0, 0.5);
  for (const auto& row : table) {
    EXPECT_GE(row.disagreement_fraction, 0.0);
    EXPECT_LE(row.disagreement_fraction, 1.0);
  }
}

TEST(MonteCarlo, Quantiles) {
  const auto q = quantiles_of({5, 1, 4, 2, 3});
  EXPECT_EQ(q.count, 5u);
  EXPECT_EQ(q.q50, 3.0);
  EXPECT_EQ(q.q25, 2.0);
  EXPECT_DOUBLE_EQ(q.q05, 1.2);
  EXPECT_EQ(median({1.0, 2.0}), 1.5);
}

TEST(MonteCarlo, Outputs) {
  ExperimentConfig c = base_config(2.0, Informativeness::Informative);
  c.horizon = 20;
  c.num_trajectories = 3;
  c.regime.mode = RegimeMode::Fixed;
  const auto res = run_experiment(c);
  std::ostringstream csv;
  write_rows_csv(csv, res);
  const auto text = csv.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "index,omega,theta,final_action,switch_count,last_switch_time,"
            "both_actions_second_half,q_T,log_odds_T");
  const auto j = aggregates_json(res);
  EXPECT_TRUE(j.contains("herd_correctness_rate"));
  EXPECT_TRUE(j["herd_correctness_rate"].is_number());
  EXPECT_TRUE(j.contains("proxies"));
}
