#include <sstream>

#include <Eigen/Cholesky>
#include <gtest/gtest.h>

#include "support.hpp"
#include "tarifflab/errors.hpp"
#include "tarifflab/ingest.hpp"
#include "tarifflab/welfare.hpp"

using namespace tarifflab;
using namespace tarifflab::testing;

namespace {

RawSeries parse(const std::string& text, SeriesKind kind = SeriesKind::Load, double scale = 1.0) {
  std::istringstream in(text);
  return parse_csv(in, kind, "test.csv", scale);
}

template <typename E>
E capture(const std::string& text, SeriesKind kind = SeriesKind::Load) {
  try {
    parse(text, kind);
  } catch (const E& e) {
    return e;
  }
  throw std::logic_error("expected exception not thrown");
}

ScenarioSet consumption(std::initializer_list<std::pair<Vector, Vector>> days) {
  std::vector<Scenario> s;
  for (const auto& [price, load] : days) s.push_back({price, load});
  return ScenarioSet(std::move(s));
}

}  // namespace

TEST(ParseCsv, TwoCompleteDays) {
  const RawSeries s = parse("day,hour,value\n0,0,5\n0,1,6\n1,0,7\n1,1,8\n");
  EXPECT_EQ(s.days(), 2u);
  EXPECT_EQ(s.periods(), 2u);
  EXPECT_EQ(s.values(1, 0), 7.0);
  EXPECT_EQ(s.day_labels, (std::vector<long>{0, 1}));
}

TEST(ParseCsv, RowsInAnyOrderAndSparseDayLabels) {
  const RawSeries s = parse("day, hour, value\r\n\n17,1,2.5\n3,0,1\n17,0,2\n3,1,1.5\n", SeriesKind::Price, 1e-3);
  EXPECT_EQ(s.day_labels, (std::vector<long>{3, 17}));
  EXPECT_DOUBLE_EQ(s.values(0, 1), 1.5e-3);
  EXPECT_DOUBLE_EQ(s.values(1, 1), 2.5e-3);
}

TEST(ParseCsv, MissingHourNamesDayAndHour) {
  const auto e = capture<MissingHour>("day,hour,value\n0,0,5\n0,1,6\n1,0,7\n");
  EXPECT_EQ(e.day(), 1);
  EXPECT_EQ(e.hour(), 1);
}

TEST(ParseCsv, NonFiniteValues) {
  EXPECT_EQ(capture<NonFiniteValue>("day,hour,value\n0,0,NaN\n").line(), 2u);
  EXPECT_EQ(capture<NonFiniteValue>("day,hour,value\n0,0,1\n0,1,inf\n", SeriesKind::Price).line(), 3u);
}

TEST(ParseCsv, MalformedRowsReportTheLine) {
  EXPECT_EQ(capture<MalformedRow>("day,hour,value\n0,0,1\n0,1\n").line(), 3u);
  EXPECT_EQ(capture<MalformedRow>("day,hour,value\n0,x,1\n").line(), 2u);
  EXPECT_EQ(capture<MalformedRow>("day,hour,value\n0,-1,1\n").line(), 2u);
  EXPECT_EQ(capture<MalformedRow>("day,hour,value\n0,0,abc\n").line(), 2u);
  EXPECT_EQ(capture<MalformedRow>("day,hour,value\n0,0,1\n0,0,2\n").line(), 3u);
  EXPECT_EQ(capture<MalformedRow>("day,hour,value\n0,0,-1\n").line(), 2u);
  EXPECT_EQ(capture<MalformedRow>("d,h,v\n0,0,1\n").line(), 1u);
  EXPECT_THROW(parse(""), MalformedRow);
  EXPECT_THROW(parse("day,hour,value\n"), MalformedRow);
  EXPECT_NO_THROW(parse("day,hour,value\n0,0,-1\n", SeriesKind::Price));
}

TEST(ParseCsv, MissingFile) {
  EXPECT_THROW(parse_csv(std::filesystem::path("/nonexistent/load.csv"), SeriesKind::Load), InputError);
}

TEST(EstimateMoments, PairsDaysAndUsesBothConventions) {
  const RawSeries load = parse("day,hour,value\n0,0,11\n0,1,9\n1,0,9\n1,1,7\n");
  const RawSeries prices = parse("day,hour,value\n0,0,1.5\n0,1,2.5\n1,0,0.5\n1,1,1.5\n", SeriesKind::Price);
  const MomentEstimate m = estimate_moments(load, prices);
  EXPECT_EQ(m.scenarios.size(), 2u);
  EXPECT_EQ(m.scenarios.mean_price(), vec({1, 2}));
  EXPECT_EQ(m.scenarios.mean_state(), vec({10, 8}));
  EXPECT_DOUBLE_EQ(m.unbiased_cross_covariance.trace(), 2.0);
  EXPECT_DOUBLE_EQ(m.scenarios.cross_covariance().trace(), 1.0);
}

TEST(EstimateMoments, IdenticalDaysHaveNoCovariance) {
  const RawSeries load = parse("day,hour,value\n0,0,3\n0,1,4\n1,0,3\n1,1,4\n");
  const RawSeries prices = parse("day,hour,value\n0,0,1\n0,1,2\n1,0,1\n1,1,2\n", SeriesKind::Price);
  const MomentEstimate m = estimate_moments(load, prices);
  EXPECT_EQ(max_abs(m.unbiased_cross_covariance), 0.0);
}

TEST(EstimateMoments, Errors) {
  const RawSeries one = parse("day,hour,value\n0,0,3\n0,1,4\n");
  const RawSeries one_price = parse("day,hour,value\n0,0,1\n0,1,2\n", SeriesKind::Price);
  EXPECT_THROW(estimate_moments(one, one_price), SingleScenario);

  const RawSeries load = parse("day,hour,value\n0,0,3\n0,1,4\n1,0,3\n1,1,4\n");
  const RawSeries shifted = parse("day,hour,value\n0,0,1\n0,1,2\n2,0,1\n2,1,2\n", SeriesKind::Price);
  const RawSeries three_hours = parse("day,hour,value\n0,0,1\n0,1,2\n0,2,2\n1,0,1\n1,1,2\n1,2,2\n",
                                      SeriesKind::Price);
  EXPECT_THROW(estimate_moments(load, shifted), AlignmentMismatch);
  EXPECT_THROW(estimate_moments(load, three_hours), AlignmentMismatch);
  EXPECT_THROW(estimate_moments(load, one_price), AlignmentMismatch);
  EXPECT_THROW(estimate_moments(load, load), AlignmentMismatch);
}

TEST(Calibrate, NearIdentityKernel) {
  const auto days = consumption({{vec({1, 2}), vec({10, 7})}, {vec({2, 1}), vec({8, 6})}});
  CalibrationConfig config;
  config.flat_rate = 1.0;
  config.elasticity = -0.2;
  config.kernel_decay = 1e-12;
  config.customers = 1.0;
  const LinearDemandModel m = calibrate_demand(days, config);
  EXPECT_NEAR(m.sensitivity()(0, 0), 1.55, 1e-10);
  EXPECT_NEAR(m.sensitivity()(0, 1), 0.0, 1e-10);
  EXPECT_NEAR(elasticity_matrix(m, vec({1, 1})).aggregate(), -0.2, 1e-12);
}

TEST(Calibrate, ReproducesConsumptionAtTheFlatRate) {
  std::mt19937_64 rng(53);
  const auto source = random_model(6, 15, rng);
  CalibrationConfig config;
  config.flat_rate = 0.15;
  const LinearDemandModel m = calibrate_demand(source.scenarios(), config);
  const Vector flat = Vector::Constant(6, 0.15);
  for (std::size_t j = 0; j < m.scenarios().size(); ++j) {
    const Vector d = m.scenarios()[j].state - m.sensitivity() * flat;
    EXPECT_LT(max_abs(Vector(d - source.scenarios()[j].state)), 1e-12 * max_abs(source.scenarios()[j].state));
    EXPECT_EQ(m.scenarios()[j].price, source.scenarios()[j].price);
  }
  EXPECT_EQ(m.customers(), config.customers);
}

TEST(Calibrate, ElasticityRoundTripAndDefiniteness) {
  std::mt19937_64 rng(59);
  const auto source = random_model(24, 10, rng);
  for (double alpha : {0.05, 0.2, 0.8}) {
    for (double eps : {-0.05, -0.3, -1.2}) {
      CalibrationConfig config;
      config.kernel_decay = alpha;
      config.elasticity = eps;
      const LinearDemandModel m = calibrate_demand(source.scenarios(), config);
      const double realised = elasticity_matrix(m, Vector::Constant(24, config.flat_rate)).aggregate();
      EXPECT_NEAR(realised, eps, 1e-9);
      EXPECT_EQ(Eigen::LLT<Matrix>(m.sensitivity()).info(), Eigen::Success) << alpha;
    }
  }
}

TEST(Calibrate, Errors) {
  const auto days = consumption({{vec({1, 2}), vec({10, 7})}, {vec({2, 1}), vec({8, 6})}});
  CalibrationConfig config;
  config.elasticity = 0.0;
  EXPECT_THROW(calibrate_demand(days, config), ScaleNonPositive);
  config.elasticity = 0.4;
  EXPECT_THROW(calibrate_demand(days, config), ScaleNonPositive);
  config.elasticity = -0.3;
  config.kernel_decay = 1.0;
  EXPECT_THROW(calibrate_demand(days, config), InvalidArgument);
  config.kernel_decay = 0.2;
  EXPECT_THROW(calibrate_demand(consumption({{vec({1, 2}), vec({0, 0})}, {vec({2, 1}), vec({0, 0})}}), config),
               NonPositiveLoad);
}

TEST(RevenueBaseline, Reductions) {
  const auto days = consumption({{vec({1, 2}), vec({10, 7})}, {vec({2, 1}), vec({8, 6})}});
  CalibrationConfig config;
  config.flat_rate = 0.2;
  config.connection_charge = 0.0;
  config.customers = 4.0;
  const LinearDemandModel m = calibrate_demand(days, config);
  const RevenueBaseline r = revenue_baseline(m, config);
  EXPECT_NEAR(r.gross, 15.5 * 0.2, 1e-12);
  EXPECT_NEAR(r.net, phi_bar(m, vec({0.2, 0.2})), 1e-12);

  config.connection_charge = 0.5;
  const RevenueBaseline with_charge = revenue_baseline(m, config);
  EXPECT_NEAR(with_charge.gross - r.gross, 2.0, 1e-12);

  const LinearDemandModel nobody(m.sensitivity(), m.scenarios(), 0.0);
  EXPECT_EQ(revenue_baseline(nobody, config).net, phi_bar(nobody, vec({0.2, 0.2})));
}

TEST(Pipeline, DeterministicAndPaperScale) {
  const auto dir = source_dir() / "data" / "synthetic";
  auto run = [&] {
    const MomentEstimate m = estimate_moments(parse_csv(dir / "load.csv", SeriesKind::Load),
                                              parse_csv(dir / "prices.csv", SeriesKind::Price, 1e-3));
    return calibrate_demand(m.scenarios, CalibrationConfig{});
  };
  const LinearDemandModel a = run(), b = run();
  EXPECT_EQ(a.sensitivity(), b.sensitivity());
  for (std::size_t j = 0; j < a.scenarios().size(); ++j) EXPECT_EQ(a.scenarios()[j].state, b.scenarios()[j].state);
  EXPECT_EQ(a.scenarios().size(), 92u);
  EXPECT_EQ(a.periods(), 24u);

  const RevenueBaseline r = revenue_baseline(a, CalibrationConfig{});
  EXPECT_GT(r.gross, 7.19e6 * 0.9);
  EXPECT_LT(r.gross, 7.19e6 * 1.1);
  EXPECT_LT(r.net, r.gross);
}
