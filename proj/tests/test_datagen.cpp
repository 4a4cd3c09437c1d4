#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "gradeq/csv.hpp"
#include "gradeq/datagen.hpp"

using namespace gradeq;

TEST_CASE("determinism: same spec and seed give byte-identical output") {
  StreamSpec spec;
  spec.kind = StreamKind::iid_gaussian;
  spec.length = 5;
  spec.seed = 7;
  auto a = generate(spec);
  auto b = generate(spec);
  std::ostringstream sa, sb;
  write_stream_csv(sa, a);
  write_stream_csv(sb, b);
  CHECK(sa.str() == sb.str());

  spec.seed = 8;
  auto c = generate(spec);
  std::ostringstream sc;
  write_stream_csv(sc, c);
  CHECK(sa.str() != sc.str());
}

TEST_CASE("bound respect: clipped residuals never exceed b") {
  StreamSpec spec;
  spec.kind = StreamKind::iid_gaussian;
  spec.mu = 0.5;
  spec.sigma = 2.0;
  spec.length = 5000;
  spec.seed = 3;
  spec.bound_b = 1.0;
  auto s = generate(spec);
  for (const auto& rec : s.records) REQUIRE(std::fabs(rec.y - rec.f) <= 1.0);

  auto scores = bounded_scores(spec, 0.5);
  for (double v : scores) REQUIRE(std::fabs(v) <= 0.5);
  CHECK_THROWS_AS(bounded_scores(spec, 0.0), std::invalid_argument);
}

TEST_CASE("piecewise shift and drifting mean") {
  StreamSpec spec;
  spec.kind = StreamKind::piecewise_shift;
  spec.segments = {{1000, 0.0, 0.1}, {1000, 3.0, 0.1}};
  spec.length = 2000;
  spec.seed = 11;
  auto s = generate(spec);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t t = 0; t < 1000; ++t) m1 += s.records[t].y - s.records[t].f;
  for (std::size_t t = 1000; t < 2000; ++t) m2 += s.records[t].y - s.records[t].f;
  CHECK(m1 / 1000.0 == Catch::Approx(0.0).margin(0.05));
  CHECK(m2 / 1000.0 == Catch::Approx(3.0).margin(0.05));

  StreamSpec drift;
  drift.kind = StreamKind::drifting_mean;
  drift.drift_rate = 0.01;
  drift.length = 1000;
  drift.sigma = 0.01;
  drift.seed = 12;
  auto sd = generate(drift);
  CHECK(sd.records[999].y - sd.records[999].f ==
        Catch::Approx(0.01 * 999.0).margin(0.1));
}

TEST_CASE("disjoint grouping activates exactly one bit") {
  StreamSpec spec;
  spec.kind = StreamKind::iid_gaussian;
  spec.length = 2000;
  spec.seed = 5;
  spec.groups.kind = GroupingKind::disjoint;
  spec.groups.weights = {0.5, 0.5};
  auto s = generate(spec);
  CHECK(s.disjoint_declared);
  CHECK(s.group_labels.size() == 2);
  for (const auto& rec : s.records) {
    REQUIRE(rec.z.size() == 2);
    REQUIRE(rec.z[0] + rec.z[1] == 1.0);
  }
}

TEST_CASE("overlapping grouping and per-group offsets") {
  StreamSpec spec;
  spec.kind = StreamKind::bernoulli_calibrated;
  spec.length = 20000;
  spec.seed = 9;
  spec.p_lo = 0.4;
  spec.p_hi = 0.6;
  spec.groups.kind = GroupingKind::overlapping;
  spec.groups.weights = {0.5, 0.3};
  spec.group_offsets = {0.2, 0.0};
  auto s = generate(spec);
  // records in group 0 should see y-rate exceeding the reported base rate
  double bias0 = 0.0, n0 = 0.0;
  for (const auto& rec : s.records) {
    REQUIRE(rec.f >= 0.4);
    REQUIRE(rec.f <= 0.6);
    if (rec.z[0] == 1.0 && rec.z[1] == 0.0) {
      bias0 += rec.y - rec.f;
      n0 += 1.0;
    }
  }
  CHECK(n0 > 1000.0);
  CHECK(bias0 / n0 == Catch::Approx(0.2).margin(0.03));
}

TEST_CASE("bradley-terry empirical win rate matches the sigmoid") {
  StreamSpec spec;
  spec.kind = StreamKind::bradley_terry;
  spec.num_models = 2;
  spec.strengths = {0.0, 1.0};
  spec.length = 100000;
  spec.seed = 21;
  auto s = generate(spec);
  double wins2 = 0.0;
  for (const auto& rec : s.records) {
    bool two_won = (rec.model_b == 1 && rec.y == 1.0) || (rec.model_a == 1 && rec.y == 0.0);
    wins2 += two_won ? 1.0 : 0.0;
    REQUIRE(rec.model_a != rec.model_b);
  }
  // Monte-Carlo vs analytic sigma(1) ~ 0.7311
  CHECK(wins2 / 100000.0 == Catch::Approx(sigmoid(1.0)).margin(0.005));
}

TEST_CASE("bradley-terry win matrix converges within 3 standard errors") {
  StreamSpec spec;
  spec.kind = StreamKind::bradley_terry;
  spec.num_models = 3;
  spec.strengths = {0.0, 0.5, 1.5};
  spec.length = 300000;
  spec.seed = 33;
  auto s = generate(spec);
  double wins[3][3] = {};
  double games[3][3] = {};
  for (const auto& rec : s.records) {
    auto a = static_cast<std::size_t>(rec.model_a);
    auto b = static_cast<std::size_t>(rec.model_b);
    games[a][b] += 1.0;
    if (rec.y == 1.0) wins[a][b] += 1.0;
  }
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) {
      if (a == b) continue;
      double n = games[a][b];
      REQUIRE(n > 1000.0);
      double p_hat = wins[a][b] / n;
      double p = sigmoid(spec.strengths[b] - spec.strengths[a]);
      double se = std::sqrt(p * (1.0 - p) / n);
      REQUIRE(std::fabs(p_hat - p) <= 3.0 * se);
    }
}

TEST_CASE("spec validation") {
  StreamSpec spec;
  spec.length = 0;
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec.length = 10;
  spec.kind = StreamKind::bradley_terry;
  spec.num_models = 1;
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec.num_models = 2;
  spec.strengths = {0.0};
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec.strengths = {0.0, 1.0};
  CHECK_NOTHROW(generate(spec));

  StreamSpec g;
  g.length = 10;
  g.groups.kind = GroupingKind::disjoint;
  g.groups.weights = {0.5, 0.4};
  CHECK_THROWS_AS(generate(g), std::invalid_argument);
}
