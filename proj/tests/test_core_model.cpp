#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"
#include "tarifflab/errors.hpp"
#include "tarifflab/model_file.hpp"
#include "tarifflab/oracle.hpp"
#include "tarifflab/welfare.hpp"

using namespace tarifflab;
using namespace tarifflab::testing;

// Scenario-by-scenario margin (1/J) sum_j (p - lambda_j)^T (Omega_j - G p).
static double settled_margin(const LinearDemandModel& m, const Vector& p) {
  double sum = 0.0;
  for (const auto& s : m.scenarios().scenarios())
    sum += (p - s.price).dot(s.state - m.sensitivity() * p);
  return sum / static_cast<double>(m.scenarios().size());
}

TEST(ScenarioSet, MomentsOfTwoPairedScenarios) {
  const auto m = instance_i2_cov();
  const auto& set = m.scenarios();
  EXPECT_EQ(set.periods(), 2u);
  EXPECT_EQ(set.size(), 2u);
  EXPECT_EQ(set.mean_price(), vec({1, 2}));
  EXPECT_EQ(set.mean_state(), vec({10, 8}));
  Matrix expected(2, 2);
  expected << 0.5, 0.5, 0.5, 0.5;
  EXPECT_EQ(set.cross_covariance(), expected);
  EXPECT_DOUBLE_EQ(set.cross_covariance().trace(), 1.0);
}

TEST(ScenarioSet, CovarianceIsPriceRowsByStateColumns) {
  ScenarioSet set({{vec({1, 0}), vec({0, 2})}, {vec({3, 0}), vec({0, 6})}});
  EXPECT_DOUBLE_EQ(set.cross_covariance()(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(set.cross_covariance()(1, 0), 0.0);
}

TEST(ScenarioSet, RejectsBadInput) {
  EXPECT_THROW(ScenarioSet({}), InvalidModel);
  EXPECT_THROW(ScenarioSet({{vec({1, 2}), vec({1})}}), DimensionMismatch);
  EXPECT_THROW(ScenarioSet({{vec({1, 2}), vec({1, 2})}, {vec({1}), vec({1})}}), DimensionMismatch);
  EXPECT_THROW(ScenarioSet({{vec({-0.1, 2}), vec({1, 2})}}), InvalidModel);
  EXPECT_THROW(ScenarioSet({{vec({1, 2}), vec({std::nan(""), 2})}}), InvalidModel);
  EXPECT_THROW(ScenarioSet({{vec({1, std::numeric_limits<double>::infinity()}), vec({1, 2})}}), InvalidModel);
}

TEST(ScenarioSet, ShiftedStatesKeepPricesAndCovariance) {
  const auto m = instance_i2_cov();
  const ScenarioSet shifted = m.scenarios().with_shifted_states(vec({1, -1}));
  EXPECT_EQ(shifted.mean_state(), vec({11, 7}));
  EXPECT_EQ(shifted.mean_price(), m.scenarios().mean_price());
  EXPECT_LT(max_abs(Matrix(shifted.cross_covariance() - m.scenarios().cross_covariance())), 1e-15);
}

TEST(LinearDemandModel, RejectsInvalidSensitivity) {
  ScenarioSet set({{vec({1, 2}), vec({10, 8})}});
  Matrix asym = i2_sensitivity();
  asym(0, 1) = -0.4;
  EXPECT_THROW(LinearDemandModel(asym, set, 1.0), InvalidModel);
  Matrix indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  EXPECT_THROW(LinearDemandModel(indefinite, set, 1.0), InvalidModel);
  EXPECT_THROW(LinearDemandModel(Matrix::Zero(2, 2), set, 1.0), InvalidModel);
  EXPECT_THROW(LinearDemandModel(Matrix::Identity(3, 3), set, 1.0), DimensionMismatch);
  EXPECT_THROW(LinearDemandModel(i2_sensitivity(), set, -1.0), InvalidModel);
}

TEST(LinearDemandModel, SymmetryToleranceIsRelative) {
  ScenarioSet set({{vec({1, 2}), vec({10, 8})}});
  Matrix g = 1e6 * i2_sensitivity();
  g(0, 1) += 1e-7;  // relative 1e-13
  EXPECT_NO_THROW(LinearDemandModel(g, set, 1.0));
}

TEST(LinearDemandModel, SatiationPrice) {
  const auto m = instance_i2();
  EXPECT_LT(max_abs(Vector(m.satiation_price() - vec({8, 12}))), 1e-14);
  EXPECT_LT(max_abs(expected_demand(m, m.satiation_price())), 1e-13);
}

TEST(LinearDemandModel, PerScenarioDemandAndJacobian) {
  const auto m = instance_i2_cov();
  EXPECT_EQ(m.demand(vec({1, 2}), 0), vec({11, 9}) - i2_sensitivity() * vec({1, 2}));
  EXPECT_EQ(m.jacobian(vec({0, 0}), 1), Matrix(-i2_sensitivity()));
  EXPECT_THROW(m.demand(vec({1}), 0), DimensionMismatch);
  EXPECT_THROW(m.demand(vec({1, 2}), 2), std::out_of_range);
}

TEST(ExpectedDemand, Examples) {
  const auto m = instance_i2();
  EXPECT_EQ(expected_demand(m, vec({1, 2})), vec({9, 6.5}));
  EXPECT_EQ(expected_demand(m, vec({0, 0})), vec({10, 8}));
  EXPECT_LT(max_abs(expected_demand(m, vec({8, 12}))), 1e-14);
  EXPECT_THROW(expected_demand(m, vec({1, 2, 3})), DimensionMismatch);
}

TEST(PhiBar, Examples) {
  EXPECT_DOUBLE_EQ(phi_bar(instance_i2(), vec({1, 2})), 0.0);
  // (3.5, 5) . (4.5, 3.25) = 15.75 + 16.25
  EXPECT_DOUBLE_EQ(phi_bar(instance_i2(), vec({4.5, 7})), 32.0);
  EXPECT_DOUBLE_EQ(phi_bar(instance_i2_cov(), vec({1, 2})), -1.0);
  EXPECT_DOUBLE_EQ(settled_margin(instance_i2_cov(), vec({1, 2})), -1.0);
}

TEST(PhiBar, MatchesSettlement) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_model(2 + trial % 4, 5 + trial, rng);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int i = 0; i < 5; ++i) {
      Vector p(m.periods());
      for (Eigen::Index k = 0; k < p.size(); ++k) p(k) = u(rng);
      const double analytic = phi_bar(m, p), settled = settled_margin(m, p);
      EXPECT_NEAR(analytic, settled, 1e-10 * std::max(1.0, std::abs(settled)));
    }
  }
}

TEST(WelfareGains, Examples) {
  const auto m = instance_i2();
  const Tariff base = two_part(0.0, vec({1, 2}));

  const WelfareReport same = welfare_gains(m, base, base);
  EXPECT_EQ(same.delta_cs, 0.0);
  EXPECT_EQ(same.delta_rs, 0.0);
  EXPECT_EQ(same.delta_sw, 0.0);

  const WelfareReport lump = welfare_gains(m, two_part(24.0, vec({1, 2})), base);
  EXPECT_DOUBLE_EQ(lump.delta_cs, -24.0);
  EXPECT_DOUBLE_EQ(lump.delta_rs, 24.0);
  EXPECT_DOUBLE_EQ(lump.delta_sw, 0.0);
  EXPECT_DOUBLE_EQ(lump.rs_absolute, 24.0);

  // Hand-computed: cs offset -24 at (1, 2) and -52 at (2.75, 4.5).
  const WelfareReport ramsey = welfare_gains(m, linear(vec({2.75, 4.5})), base);
  EXPECT_DOUBLE_EQ(ramsey.delta_rs, 24.0);
  EXPECT_DOUBLE_EQ(ramsey.delta_cs, -28.0);
  EXPECT_DOUBLE_EQ(ramsey.delta_sw, -4.0);
  EXPECT_LT(ramsey.delta_sw, 0.0);
}

TEST(WelfareGains, WelfareGainMatchesSettledOracle) {
  const auto m = instance_i2_cov(2.0);
  const Tariff base = two_part(1.0, vec({1.2, 2.4}));
  const Tariff t = two_part(3.0, vec({2.0, 3.1}));
  const auto a = oracle::settle_scenarios(m, t), b = oracle::settle_scenarios(m, base);
  const WelfareReport r = welfare_gains(m, t, base);
  EXPECT_NEAR(r.delta_sw, a.mean_total_surplus - b.mean_total_surplus, 1e-12);
  EXPECT_NEAR(r.delta_rs, a.mean_margin - b.mean_margin, 1e-12);
  EXPECT_NEAR(r.delta_cs, a.mean_consumer_surplus - b.mean_consumer_surplus, 1e-12);
}

TEST(WelfareGains, ConnectionChargeIsATransfer) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_model(3, 6, rng, false, 1.0 + trial);
    const Vector p = m.scenarios().mean_price() * 1.3;
    const Tariff base = two_part(0.7, m.scenarios().mean_price());
    const double dA = 0.25 * trial - 2.0;
    const WelfareReport r0 = welfare_gains(m, two_part(1.0, p), base);
    const WelfareReport r1 = welfare_gains(m, two_part(1.0 + dA, p), base);
    const double scale = std::max(1.0, std::abs(r0.delta_cs));
    EXPECT_NEAR(r1.delta_cs - r0.delta_cs, -m.customers() * dA, 1e-12 * scale);
    EXPECT_NEAR(r1.delta_rs - r0.delta_rs, m.customers() * dA, 1e-12 * scale);
    EXPECT_NEAR(r1.delta_sw, r0.delta_sw, 1e-12 * scale);
    EXPECT_NEAR(r1.delta_sw, r1.delta_cs + r1.delta_rs, 1e-9 * scale);
  }
}

TEST(ElasticityMatrix, Examples) {
  const auto m = instance_i2();
  const ElasticityMatrix e = elasticity_matrix(m, vec({1, 2}));
  EXPECT_DOUBLE_EQ(e.values(0, 0), -2.0 / 9.0);
  EXPECT_DOUBLE_EQ(e.values(1, 1), -2.0 / 6.5);
  EXPECT_NEAR(e.values(0, 0), -0.2222, 5e-5);
  EXPECT_NEAR(e.values(1, 1), -0.3077, 5e-5);
  EXPECT_DOUBLE_EQ(e.values(0, 1), 0.5 * 2.0 / 9.0);

  const LinearDemandModel diag(Matrix(vec({2, 1}).asDiagonal()), ScenarioSet({{vec({1, 2}), vec({10, 8})}}), 1.0);
  const ElasticityMatrix d = elasticity_matrix(diag, vec({1, 2}));
  EXPECT_EQ(d.values(0, 1), 0.0);
  EXPECT_EQ(d.values(1, 0), 0.0);
}

TEST(ElasticityMatrix, MatchesLogDerivative) {
  const auto m = instance_i2_cov();
  const Vector p = vec({1.3, 2.2});
  const ElasticityMatrix e = elasticity_matrix(m, p);
  for (Eigen::Index t = 0; t < 2; ++t) {
    const double h = 1e-6;
    Vector up = p, down = p;
    up(t) *= std::exp(h);
    down(t) *= std::exp(-h);
    const Vector fd = (expected_demand(m, up).array().log() - expected_demand(m, down).array().log()) / (2 * h);
    for (Eigen::Index k = 0; k < 2; ++k) EXPECT_NEAR(e.values(k, t), fd(k), 1e-8);
  }
}

TEST(ElasticityMatrix, ColumnScalesWithPrice) {
  // Keep expected demand fixed by shifting the state with the price change.
  const auto m = instance_i2();
  const Vector p = vec({1, 2}), q = vec({1, 4});
  const LinearDemandModel shifted(m.sensitivity(), m.scenarios().with_shifted_states(m.sensitivity() * (q - p)), 1.0);
  const ElasticityMatrix a = elasticity_matrix(m, p), b = elasticity_matrix(shifted, q);
  EXPECT_EQ(a.expected_demand, b.expected_demand);
  EXPECT_DOUBLE_EQ(b.values(0, 1), 2.0 * a.values(0, 1));
  EXPECT_DOUBLE_EQ(b.values(1, 1), 2.0 * a.values(1, 1));
  EXPECT_DOUBLE_EQ(b.values(0, 0), a.values(0, 0));
}

TEST(ElasticityMatrix, AggregateIsDemandWeighted) {
  const auto m = instance_i2();
  const Vector p = vec({1, 2});
  const ElasticityMatrix e = elasticity_matrix(m, p);
  // Uniform proportional price change: d log(1^T D) / d log s at s = 1.
  const double h = 1e-6;
  const double fd = (std::log(expected_demand(m, p * std::exp(h)).sum()) -
                     std::log(expected_demand(m, p * std::exp(-h)).sum())) / (2 * h);
  EXPECT_NEAR(e.aggregate(), fd, 1e-8);
}

TEST(ElasticityMatrix, ZeroDemandThrows) {
  const auto m = instance_i2();
  EXPECT_THROW(elasticity_matrix(m, vec({8, 12})), ZeroExpectedDemand);
  try {
    elasticity_matrix(m, vec({0, 20}));
    FAIL();
  } catch (const ZeroExpectedDemand& e) {
    EXPECT_EQ(e.period(), 1u);
  }
}

TEST(Tariff, Invariants) {
  EXPECT_NO_THROW(Tariff(TariffFamily::FlatLinear, 0.0, vec({1, 1})));
  EXPECT_THROW(Tariff(TariffFamily::FlatLinear, 0.0, vec({1, 2})), InvalidModel);
  EXPECT_THROW(Tariff(TariffFamily::AdjustedFlat, 1.0, vec({1, 2})), InvalidModel);
  EXPECT_THROW(Tariff(TariffFamily::FlatLinear, 1.0, vec({1, 1})), InvalidModel);
  EXPECT_THROW(Tariff(TariffFamily::LinearOptimal, 1.0, vec({1, 2})), InvalidModel);
  EXPECT_THROW(Tariff(TariffFamily::TwoPartOptimal, 1.0, vec({1, std::nan("")})), InvalidModel);
  EXPECT_THROW(Tariff(TariffFamily::TwoPartOptimal, std::nan(""), vec({1, 2})), InvalidModel);
}

TEST(Tariff, FamilyNames) {
  for (auto f : kAllFamilies) EXPECT_EQ(parse_family(family_name(f)), f);
  EXPECT_EQ(parse_family("two-part-optimal"), TariffFamily::TwoPartOptimal);
  EXPECT_EQ(parse_family("linear-optimal"), TariffFamily::LinearOptimal);
  EXPECT_EQ(parse_family("fixed-a"), TariffFamily::FixedChargeTwoPart);
  EXPECT_FALSE(parse_family("none"));
}

TEST(ModelFile, RoundTripIsExact) {
  std::mt19937_64 rng(3);
  const auto m = random_model(4, 7, rng);
  const ModelFile file = to_model_file(m, {{"note", "two words"}, {"flat_rate", "0.172"}});
  std::stringstream a;
  write_model(a, file);
  const ModelFile back = read_model(a, "mem");
  std::stringstream b;
  write_model(b, back);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(back.sensitivity, m.sensitivity());
  EXPECT_EQ(back.provenance.at("note"), "two words");
  EXPECT_EQ(provenance_number(back, "flat_rate"), 0.172);
  EXPECT_FALSE(provenance_number(back, "note"));
  const LinearDemandModel rebuilt = build_model(back);
  EXPECT_EQ(rebuilt.scenarios().cross_covariance(), m.scenarios().cross_covariance());
}

TEST(ModelFile, RowMajorLayout) {
  std::stringstream s;
  Matrix g(2, 2);
  g << 2, -0.25, -0.25, 1;
  write_model(s, to_model_file(LinearDemandModel(g, ScenarioSet({{vec({1, 2}), vec({10, 8})}}), 1.0)));
  EXPECT_NE(s.str().find("sensitivity 2 -0.25 -0.25 1\n"), std::string::npos);
  EXPECT_NE(s.str().find("scenario 0 price 1 2 state 10 8\n"), std::string::npos);
}

namespace {

std::string i2_text(const std::string& extra = "", const std::string& drop = "") {
  std::string text =
      "tarifflab-model 1\nperiods 2\ncustomers 1\nscenario_count 1\n"
      "sensitivity 2 -0.5 -0.5 1\nmean_price 1 2\nmean_state 10 8\n"
      "covariance_convention population\ncross_covariance 0 0 0 0\n"
      "scenario 0 price 1 2 state 10 8\n" +
      extra + "end\n";
  if (!drop.empty()) {
    const auto at = text.find(drop);
    text.erase(at, text.find('\n', at) - at + 1);
  }
  return text;
}

ModelFile parse(const std::string& text) {
  std::istringstream in(text);
  return read_model(in, "m.tlm");
}

}  // namespace

TEST(ModelFile, ReaderRejectsSchemaErrors) {
  EXPECT_NO_THROW(parse(i2_text()));
  EXPECT_NO_THROW(parse("# comment\n" + i2_text("provenance.x anything at all\n")));
  EXPECT_THROW(parse(i2_text("bogus 1\n")), ModelFormatError);
  EXPECT_THROW(parse(i2_text("periods 2\n")), ModelFormatError);
  EXPECT_THROW(parse(i2_text("", "end")), ModelFormatError);
  EXPECT_THROW(parse(i2_text("", "mean_state")), ModelFormatError);
  EXPECT_THROW(parse(i2_text("scenario 1 price 1 2 state 10 8\n")), ModelFormatError);
  EXPECT_THROW(parse(i2_text() + "periods 2\n"), ModelFormatError);
  EXPECT_THROW(parse("tarifflab-model 2\n"), ModelFormatError);
  std::string bad = i2_text();
  bad.replace(bad.find("customers 1"), 11, "customers x");
  EXPECT_THROW(parse(bad), ModelFormatError);
  bad = i2_text();
  bad.replace(bad.find("mean_price 1 2"), 14, "mean_price 1 2 3");
  try {
    parse(bad);
    FAIL();
  } catch (const ModelFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("m.tlm:6"), std::string::npos) << e.what();
  }
}

TEST(ModelFile, BuildRejectsInconsistentMoments) {
  std::string text = i2_text();
  text.replace(text.find("mean_state 10 8"), 15, "mean_state 10 9");
  EXPECT_THROW(build_model(parse(text)), InvalidModel);
  text = i2_text();
  text.replace(text.find("cross_covariance 0 0 0 0"), 24, "cross_covariance 1 0 0 0");
  EXPECT_THROW(build_model(parse(text)), InvalidModel);
}

TEST(ModelFile, ReaderKeepsIndefiniteSensitivity) {
  std::string text = i2_text();
  text.replace(text.find("sensitivity 2 -0.5 -0.5 1"), 25, "sensitivity 1 2 2 1");
  const ModelFile file = parse(text);
  EXPECT_EQ(file.sensitivity(0, 1), 2.0);
  EXPECT_THROW(build_model(file), InvalidModel);
}
