#include <gtest/gtest.h>

#include "infolearn/config.hpp"

using infolearn::Config;
using infolearn::ConfigError;

TEST(Config, ParseAndGet) {
  const auto cfg = Config::parse(
      "# experiment\n"
      "[model]\n"
      "sigma = 1\n"
      "  tau=2.5  \n"
      "; another comment\n"
      "[experiment]\n"
      "trajectories = 2000\n"
      "record_q_trace = yes\n"
      "omega = random\n");
  EXPECT_EQ(cfg.get_double("model.sigma"), 1.0);
  EXPECT_EQ(cfg.get_double("model.tau"), 2.5);
  EXPECT_FALSE(cfg.get_double("model.m0").has_value());
  EXPECT_EQ(cfg.get_double("model.m0", 0.25), 0.25);
  EXPECT_EQ(cfg.get_uint("experiment.trajectories"), 2000u);
  EXPECT_TRUE(cfg.get_bool("experiment.record_q_trace", false));
  EXPECT_EQ(cfg.get_string("experiment.omega", ""), "random");
}

TEST(Config, RoundTrip) {
  Config cfg;
  cfg.set("model.sigma", "1");
  cfg.set("model.tau", "0.5");
  cfg.set("run.seed", "42");
  cfg.set("same_variance.m0", "0,0.25,0.5");
  const auto text = cfg.serialize();
  EXPECT_EQ(Config::parse(text), cfg);
  EXPECT_EQ(Config::parse(text).serialize(), text);
}

TEST(Config, LaterValuesWin) {
  auto file = Config::parse("[model]\nsigma = 1\ntau = 2\n");
  Config flags;
  flags.set("model.tau", "0.5");
  file.merge(flags);
  EXPECT_EQ(file.get_double("model.tau"), 0.5);
  EXPECT_EQ(file.get_double("model.sigma"), 1.0);
}

TEST(Config, Errors) {
  EXPECT_THROW(Config::parse("sigma = 1\n"), ConfigError);
  EXPECT_THROW(Config::parse("[model\nsigma = 1\n"), ConfigError);
  EXPECT_THROW(Config::parse("[model]\nsigma\n"), ConfigError);
  EXPECT_THROW(Config::parse("[model]\n = 3\n"), ConfigError);
  const auto bad = Config::parse("[model]\nsigma = one\nflag = maybe\n");
  EXPECT_THROW(bad.get_double("model.sigma"), ConfigError);
  EXPECT_THROW(bad.get_bool("model.flag", false), ConfigError);
  Config c;
  EXPECT_THROW(c.set("nodot", "1"), ConfigError);
  c.set("run.seed", "-3");
  EXPECT_THROW(c.get_uint("run.seed"), ConfigError);
}
