#include <doctest.h>

#include <cmath>

#include "qtf/stats.hpp"

using namespace qtf;

namespace {

JointCountMatrix noisy_diag(int d, std::uint64_t diag, std::uint64_t off) {
  JointCountMatrix m = JointCountMatrix::zeros(d, d, "time", "time");
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m.at(i, j) = i == j ? diag : off;
  return m;
}

}  // namespace

TEST_CASE("measurement budgets match the published table") {
  const MeasurementBudget b31 = measurement_budget(31);
  CHECK(b31.fst == 984064);
  CHECK(b31.fidelity_direct == 30752);
  CHECK(b31.two_bases == 1922);
  CHECK(b31.this_work == 962);

  const MeasurementBudget b2 = measurement_budget(2);
  CHECK(b2.fst == 36);
  CHECK(b2.fidelity_direct == 12);
  CHECK(b2.two_bases == 8);
  CHECK(b2.this_work == 5);

  // this_work / two_bases -> 1/2 for large d
  const MeasurementBudget big = measurement_budget(1000);
  CHECK(static_cast<double>(big.this_work) / static_cast<double>(big.two_bases) ==
        doctest::Approx(0.5).epsilon(0.001));

  CHECK_THROWS(measurement_budget(1));
}

TEST_CASE("bootstrap is deterministic under a fixed seed") {
  const int d = 3;
  const JointCountMatrix jti = noisy_diag(d, 5000, 100);
  const JointCountMatrix jsi = noisy_diag(d, 4800, 120);
  const TargetState t = TargetState::maximally_entangled(d);

  const auto a = poisson_bootstrap(jti, jsi, t, 1.0 / d, "all", 50, 99);
  const auto b = poisson_bootstrap(jti, jsi, t, 1.0 / d, "all", 50, 99);
  REQUIRE(a.size() == b.size());
  for (const auto& [name, s] : a) {
    CHECK(s.estimate == b.at(name).estimate);
    CHECK(s.std == b.at(name).std);
    CHECK(s.resamples == b.at(name).resamples);
  }
  CHECK(a.count("f_tilde") == 1);
  CHECK(a.count("eof_lb") == 1);
  CHECK(a.count("delta") == 1);
}

TEST_CASE("bootstrap std shrinks with sqrt of counts") {
  const int d = 3;
  const TargetState t = TargetState::maximally_entangled(d);
  const JointCountMatrix jti = noisy_diag(d, 2000, 50);
  const JointCountMatrix jsi = noisy_diag(d, 2000, 50);
  JointCountMatrix jti100 = jti, jsi100 = jsi;
  for (auto& c : jti100.counts) c *= 100;
  for (auto& c : jsi100.counts) c *= 100;

  const auto small = poisson_bootstrap(jti, jsi, t, 1.0 / d, "f_tilde", 1000, 5);
  const auto large = poisson_bootstrap(jti100, jsi100, t, 1.0 / d, "f_tilde", 1000, 6);
  const double ratio = small.at("f_tilde").std / large.at("f_tilde").std;
  CHECK(ratio == doctest::Approx(10.0).epsilon(0.20));

  // mean close to the point estimate on the high-count matrices
  const double point = fidelity_certify(jti100, jsi100, t).f_tilde;
  CHECK(large.at("f_tilde").estimate == doctest::Approx(point).epsilon(0.01));
}

TEST_CASE("bootstrap excludes failing resamples") {
  const int d = 3;
  const TargetState t = TargetState::maximally_entangled(d);
  const JointCountMatrix zero = JointCountMatrix::zeros(d, d, "time", "time");
  // All-zero matrices: every resample fails the normalization step.
  const auto out = poisson_bootstrap(zero, zero, t, 1.0 / d, "f_tilde", 10, 1);
  CHECK(out.at("f_tilde").resamples == 0);
  CHECK(out.at("f_tilde").excluded == 10);
  CHECK(std::isnan(out.at("f_tilde").estimate));
}

TEST_CASE("bootstrap argument validation") {
  const int d = 3;
  const TargetState t = TargetState::maximally_entangled(d);
  const JointCountMatrix m = noisy_diag(d, 100, 1);
  CHECK_THROWS(poisson_bootstrap(m, m, t, 1.0 / d, "all", 1, 1));
  CHECK_THROWS(poisson_bootstrap(m, m, t, 1.0 / d, "bogus", 10, 1));
  const auto only_s = poisson_bootstrap(m, m, t, 1.0 / d, "sr_lb", 10, 1);
  CHECK(only_s.size() == 1);
  CHECK(only_s.count("sr_lb") == 1);
}
