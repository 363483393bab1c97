#include <gtest/gtest.h>

#include "property_oracle.hpp"

TEST(FirstOrderReduction, MatchesDirectFormulas) {
  int compared = 0;
  oracle::first_order_trials(2024, 100, [&](const std::string& name, double got, double want) {
    EXPECT_LE(oracle::relative(got, want), 1e-10) << name << ": " << got << " vs " << want;
    ++compared;
  });
  EXPECT_EQ(compared, 100 * (4 * 4 + 2));
}

TEST(SecondOrderCorollary, MatchesGeneralNoether) {
  int compared = 0;
  oracle::second_order_trials(4242, 100, [&](const std::string& name, double got, double want) {
    EXPECT_LE(oracle::relative(got, want), 1e-8) << name << ": " << got << " vs " << want;
    ++compared;
  });
  EXPECT_EQ(compared, 400);
}
