#include <doctest.h>

#include <cmath>
#include <random>

#include "qtf/coincidence.hpp"
#include "qtf/source_sim.hpp"

using namespace qtf;

namespace {

TagStream stream_of(std::vector<std::int64_t> times, std::uint8_t ch = 0) {
  TagStream s;
  for (std::int64_t t : times) s.tags.push_back({ch, t});
  s.duration_ps = times.empty() ? 0 : times.back() + 1;
  return s;
}

}  // namespace

TEST_CASE("correlogram of identical single tags peaks at zero") {
  const TagStream a = stream_of({1000});
  const Correlogram c = cross_correlogram(a, a, 10, 100);
  std::uint64_t total = 0;
  for (std::size_t k = 0; k < c.counts.size(); ++k) total += c.counts[k];
  CHECK(total == 1);
  CHECK(c.counts[c.n_half] == 1);
}

TEST_CASE("correlogram of a shifted stream peaks at the shift") {
  std::vector<std::int64_t> base, shifted;
  for (int i = 0; i < 1000; ++i) {
    base.push_back(10'000 * i);
    shifted.push_back(10'000 * i + 100);
  }
  const Correlogram c = cross_correlogram(stream_of(base), stream_of(shifted), 10, 500);
  const int peak_bin = c.n_half + 10;  // +100 ps at 10 ps bins
  CHECK(c.counts[peak_bin] == 1000);
  for (std::size_t k = 0; k < c.counts.size(); ++k)
    if (static_cast<int>(k) != peak_bin) CHECK(c.counts[k] == 0);
}

TEST_CASE("fwhm of an exact discrete Gaussian") {
  Correlogram c;
  c.bin_width_ps = 1;
  c.n_half = 200;
  c.counts.resize(401);
  const double sigma = 31.6 / 2.3548200450309493;
  for (int k = 0; k < 401; ++k) {
    const double x = c.offset_of(k);
    c.counts[k] = static_cast<std::uint64_t>(
        std::llround(1e6 * std::exp(-0.5 * x * x / (sigma * sigma))));
  }
  CHECK(std::abs(fwhm_ps(c) - 31.6) <= static_cast<double>(c.bin_width_ps));
}

TEST_CASE("fwhm of a rectangular peak equals its width") {
  Correlogram c;
  c.bin_width_ps = 2;
  c.n_half = 100;
  c.counts.assign(201, 0);
  for (int k = -15; k <= 15; ++k) c.counts[c.n_half + k] = 1000;  // width 31 bins = 62 ps
  CHECK(std::abs(fwhm_ps(c) - 62.0) <= static_cast<double>(c.bin_width_ps));
}

TEST_CASE("fwhm rejects a flat histogram") {
  Correlogram c;
  c.bin_width_ps = 1;
  c.n_half = 50;
  c.counts.assign(101, 42);
  CHECK_THROWS_WITH_AS(fwhm_ps(c), doctest::Contains("no peak"), std::runtime_error);
}

TEST_CASE("match_pairs picks the nearest partner inside the window") {
  const TagStream a = stream_of({100});
  const TagStream b = stream_of({90, 105}, 2);
  const auto pairs = match_pairs(a, b, 20);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].t_a == 100);
  CHECK(pairs[0].t_b == 105);

  CHECK(match_pairs(a, stream_of({150}, 2), 20).empty());
}

TEST_CASE("match_pairs uses every tag at most once") {
  const TagStream a = stream_of({100, 102});
  const TagStream b = stream_of({101}, 2);
  const auto pairs = match_pairs(a, b, 10);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].t_a == 100);  // earlier a wins the shared partner
}

TEST_CASE("build_jti bins, spillover, and subspace accounting") {
  const FrameSpec frame{100, 4};  // frames of 400 ps
  std::vector<CoincidencePair> pairs = {
      {50, 50},     // frame 0, bins (0,0)
      {150, 250},   // frame 0, bins (1,2)
      {390, 410},   // straddles the frame boundary -> spillover
      {750, 750},   // frame 1, bins (3,3) -> outside d=3 subspace
  };
  const JtiBuild r = build_jti(pairs, frame, 3, 0, 1.0);
  CHECK(r.matched_pairs == 4);
  CHECK(r.spillover == 1);
  CHECK(r.outside == 1);
  CHECK(r.matrix.total() == 2);
  CHECK(r.matrix.at(0, 0) == 1);
  CHECK(r.matrix.at(1, 2) == 1);
  CHECK(r.matrix.meta.at("spillover") == "1");

  CHECK_THROWS_AS(build_jti(pairs, frame, 5, 0, 1.0), std::out_of_range);
}

TEST_CASE("jti of a subspace equals subspace of the jti") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::int64_t> t(0, 10'000'000);
  std::vector<CoincidencePair> pairs;
  for (int i = 0; i < 20'000; ++i) {
    const std::int64_t ta = t(rng);
    pairs.push_back({ta, ta + static_cast<std::int64_t>(rng() % 40) - 20});
  }
  const FrameSpec frame{250, 256};
  const JointCountMatrix big = build_jti(pairs, frame, 31, 0).matrix;
  const JointCountMatrix small = build_jti(pairs, frame, 7, 0).matrix;
  CHECK(subspace(big, 7, 0).counts == small.counts);
}

TEST_CASE("crosstalk metric") {
  JointCountMatrix m = JointCountMatrix::zeros(3, 3, "time", "time");
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m.at(i, j) = 1;
  CHECK(crosstalk_metric(m) == doctest::Approx(4.0 / 3.0));

  JointCountMatrix z = JointCountMatrix::zeros(2, 2, "time", "time");
  z.at(0, 1) = 5;
  CHECK_THROWS(crosstalk_metric(z));
}

TEST_CASE("correlogram mirror symmetry for odd bin widths") {
  std::mt19937_64 rng(10);
  std::vector<std::int64_t> ta, tb;
  std::int64_t t = 0;
  for (int i = 0; i < 5000; ++i) {
    t += 1 + static_cast<std::int64_t>(rng() % 2000);
    ta.push_back(t);
    tb.push_back(t + static_cast<std::int64_t>(rng() % 31) - 15);
  }
  std::sort(tb.begin(), tb.end());
  const TagStream a = stream_of(ta), b = stream_of(tb, 2);
  const Correlogram fwd = cross_correlogram(a, b, 5, 100);
  const Correlogram rev = cross_correlogram(b, a, 5, 100);
  for (std::size_t k = 0; k < fwd.counts.size(); ++k)
    CHECK(fwd.counts[k] == rev.counts[rev.counts.size() - 1 - k]);
}

TEST_CASE("narrow time bins degrade the temporal correlation") {
  // With tau comparable to the 31.6 ps peak the pair mass leaks into
  // neighbouring bins; at tau = 250 ps it stays on the diagonal.
  SourceConfig src;
  src.pair_rate_per_s = 2e5;
  src.correlation_time_ps = 0.1;
  const double duration = 0.2;
  const auto pairs_ev = generate_pairs(src, duration, 12);
  ChannelConfig ch;
  ch.a.efficiency = 1.0;
  ch.b.efficiency = 1.0;
  ch.a.jitter_fwhm_ps = 22.345;
  ch.b.jitter_fwhm_ps = 22.345;
  const auto streams = detect(pairs_ev, src, ch, std::nullopt, duration, 12);
  const auto matched = match_pairs(streams[kChannelAT], streams[kChannelBT], 158);

  const JointCountMatrix coarse = build_jti(matched, FrameSpec{250, 128}, 31, 0).matrix;
  const JointCountMatrix fine = build_jti(matched, FrameSpec{31, 1024}, 31, 0).matrix;
  CHECK(crosstalk_metric(fine) > 10.0 * crosstalk_metric(coarse));
  CHECK(crosstalk_metric(coarse) < 0.2);
}
