#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "infolearn/normal.hpp"
#include "oracle.hpp"

namespace nm = infolearn::normal;

TEST(Normal, LogCdfMatchesExtendedPrecision) {
  for (double z = -300.0; z <= 10.0; z += 0.37) {
    const double ref = oracle::log_Phi(z);
    EXPECT_NEAR(nm::log_cdf(z), ref, 1e-12 * std::max(1.0, std::abs(ref))) << "z=" << z;
  }
}

TEST(Normal, LogCdfAroundAsymptoticCutoff) {
  for (double z : {-19.5, -19.999, -20.0, -20.001, -20.5, -37.9, -38.1}) {
    const double ref = oracle::log_Phi(z);
    EXPECT_NEAR(nm::log_cdf(z), ref, 1e-13 * std::abs(ref)) << "z=" << z;
  }
}

TEST(Normal, DeepTailValue) {
  // Normal(2, 4) left tail at x = 200: log Phi(-101).
  const double ref = oracle::log_Phi(-101.0);
  EXPECT_NEAR(nm::log_cdf(-101.0), ref, 1e-10);
  EXPECT_NEAR(ref, -5106.0342, 1e-3);
}

TEST(Normal, LogSfIsMirror) {
  for (double z = -40.0; z <= 40.0; z += 0.5) EXPECT_EQ(nm::log_sf(z), nm::log_cdf(-z));
}

TEST(Normal, CdfValues) {
  EXPECT_NEAR(nm::cdf(-1.0), 0.158655253931457, 1e-14);
  EXPECT_NEAR(nm::cdf(1.0), 0.841344746068543, 1e-14);
  EXPECT_EQ(nm::cdf(0.0), 0.5);
}

TEST(Normal, QuantileRoundTrip) {
  for (double u : {1e-300, 1e-100, 1e-12, 1e-5, 0.01, 0.2, 0.5, 0.77, 0.99, 1 - 1e-9}) {
    const double z = nm::quantile(u);
    EXPECT_NEAR(nm::cdf(z), u, 1e-12 * std::max(u, 1e-3)) << "u=" << u;
  }
  EXPECT_EQ(nm::quantile(0.0), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(nm::quantile(1.0), std::numeric_limits<double>::infinity());
}

TEST(Normal, LogAddSubExp) {
  EXPECT_NEAR(nm::log_add_exp(std::log(2.0), std::log(3.0)), std::log(5.0), 1e-15);
  EXPECT_NEAR(nm::log_sub_exp(std::log(5.0), std::log(3.0)), std::log(2.0), 1e-15);
  const double ninf = -std::numeric_limits<double>::infinity();
  EXPECT_EQ(nm::log_add_exp(ninf, 1.5), 1.5);
  EXPECT_EQ(nm::log_add_exp(ninf, ninf), ninf);
  EXPECT_NEAR(nm::log_add_exp(-1000.0, -1000.0), -1000.0 + std::log(2.0), 1e-12);
}

TEST(Normal, LogPdf) {
  for (double z : {-50.0, -3.0, 0.0, 2.5}) EXPECT_NEAR(nm::log_pdf(z), oracle::log_normal_pdf(z, 0, 1), 1e-12);
}
