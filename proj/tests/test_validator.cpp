#include <gtest/gtest.h>

#include "support.hpp"

using namespace pitaevskii;
using namespace testing_support;

TEST(Validator, SingleComplexModeRatios) {
  const auto g = torus({16, 16});
  const std::array<double, 3> k{1, 0, 0};
  const std::vector<ComplexField> f{plane_wave(g, cplx(0.3, 0.4), k)};
  const auto rep = inequality_validator<cplx>(f);
  const double V = kTwoPi * kTwoPi;
  // |f| is constant, so every Lebesgue ratio is exactly 1
  EXPECT_NEAR(rep.find("lebesgue")->max_ratio, 1.0, 1e-13);
  EXPECT_NEAR(rep.find("poincare")->max_ratio, 1.0, 1e-13);
  EXPECT_NEAR(rep.find("agmon")->max_ratio, 1.0 / std::sqrt(2 * std::sqrt(2.0) * V), 1e-13);
  EXPECT_NEAR(rep.find("sobolev")->max_ratio, std::pow(V, 1.0 / 6) / std::sqrt(2 * V), 1e-13);
  EXPECT_FALSE(rep.find("sobolev")->asserted);
  EXPECT_TRUE(rep.passed());
}

TEST(Validator, LadyzhenskayaOnlyInThreeDimensions) {
  const auto g2 = torus({8, 8});
  const auto rep2 = inequality_validator<double>(validator_samples(g2, 3, 1, 2));
  EXPECT_EQ(rep2.find("ladyzhenskaya"), nullptr);
  ASSERT_EQ(rep2.notices.size(), 1u);
  EXPECT_NE(rep2.notices[0].find("d=2"), std::string::npos);

  const auto g3 = torus({8, 8, 8});
  const auto rep3 = inequality_validator<double>(validator_samples(g3, 3, 1, 2));
  ASSERT_NE(rep3.find("ladyzhenskaya"), nullptr);
  EXPECT_EQ(rep3.find("ladyzhenskaya")->evaluated, 3u);
  EXPECT_TRUE(rep3.notices.empty());
}

TEST(Validator, ZeroFieldSkipped) {
  const auto g = torus({8, 8, 8});
  auto fields = validator_samples(g, 2, 4, 2);
  fields.emplace_back(g);
  const auto rep = inequality_validator<double>(fields);
  for (const auto& r : rep.results) {
    EXPECT_EQ(r.evaluated, 2u) << r.name;
    EXPECT_EQ(r.skipped, 1u) << r.name;
    EXPECT_TRUE(std::isfinite(r.max_ratio));
  }
}

TEST(Validator, CapEnforced) {
  const auto g = torus({8, 8});
  const auto fields = validator_samples(g, 4, 2, 2);
  EXPECT_TRUE(inequality_validator<double>(fields).passed());
  EXPECT_FALSE(inequality_validator<double>(fields, 1e-3).passed());
}

TEST(Validator, SamplesMeanZeroAndReproducible) {
  const auto g = torus({16, 16, 16});
  const auto a = validator_samples(g, 2, 42), b = validator_samples(g, 2, 42);
  EXPECT_EQ(a[0].values()[5], b[0].values()[5]);
  EXPECT_NEAR(integral(a[1]), 0.0, 1e-10);
}

TEST(Validator, StableAcrossResolutionsAndSeeds) {
  const auto coarse = inequality_validator<double>(validator_samples(torus({16, 16, 16}), 40, 1));
  const auto fine = inequality_validator<double>(validator_samples(torus({24, 24, 24}), 40, 2));
  for (const auto& r : coarse.results) {
    const double other = fine.find(r.name)->max_ratio;
    EXPECT_LE(std::abs(r.max_ratio - other), 0.2 * std::max(r.max_ratio, other)) << r.name;
  }
}

TEST(RhsProperties, IdentitiesHoldOnRandomStates) {
  const Params p;
  for (const auto& g : {torus({16, 16}), torus({8, 8, 8})}) {
    const auto rep = rhs_property_suite(g, p, 5, 3);
    EXPECT_EQ(rep.states, 5u);
    EXPECT_LT(rep.source_form_max, 1e-12);
    EXPECT_LT(rep.quadratic_form_max, 1e-12);
    EXPECT_TRUE(rep.passed());
  }
}
