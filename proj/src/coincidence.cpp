#include "qtf/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace qtf {

namespace {

// Uniform binning: bin k covers [k*bw - bw/2, k*bw + bw/2). Every bin spans
// exactly bw integer offsets (a sign-symmetric rule would give the center
// bin only bw-1 of them and comb the histogram for even widths).
inline std::int64_t offset_bin(std::int64_t dt, std::int64_t bw) {
  const std::int64_t num = 2 * dt + bw;
  const std::int64_t den = 2 * bw;
  return num >= 0 ? num / den : -((-num + den - 1) / den);
}

}  // namespace

Correlogram cross_correlogram(const TagStream& a, const TagStream& b,
                              std::int64_t bin_width_ps, std::int64_t range_ps) {
  if (bin_width_ps <= 0 || range_ps <= 0)
    throw std::invalid_argument("cross_correlogram: bin width and range must be > 0");
  Correlogram c;
  c.bin_width_ps = bin_width_ps;
  c.n_half = static_cast<int>(range_ps / bin_width_ps);
  c.counts.assign(2 * c.n_half + 1, 0);

  std::size_t j0 = 0;
  for (const TimeTag& ta : a.tags) {
    while (j0 < b.tags.size() && b.tags[j0].t < ta.t - range_ps) ++j0;
    for (std::size_t j = j0; j < b.tags.size() && b.tags[j].t <= ta.t + range_ps; ++j) {
      const std::int64_t k = offset_bin(b.tags[j].t - ta.t, bin_width_ps);
      if (k >= -c.n_half && k <= c.n_half) ++c.counts[k + c.n_half];
    }
  }
  return c;
}

namespace {

double fwhm_scan(const Correlogram& c, int half_width);

}  // namespace

double fwhm_ps(const Correlogram& c) {
  // Two passes: a raw estimate sets the scale, then a moving average of
  // about a fifth of the peak width suppresses the counting-noise bias of
  // the max-bin peak and first-below-half crossings (which otherwise pull
  // the width low by several percent) without widening the peak itself.
  const double raw = fwhm_scan(c, 0);
  const int hw = std::clamp(
      static_cast<int>(raw / static_cast<double>(c.bin_width_ps) / 10.0), 0, 4);
  return hw == 0 ? raw : fwhm_scan(c, hw);
}

namespace {

double fwhm_scan(const Correlogram& c, int half_width) {
  const int n = static_cast<int>(c.counts.size());
  if (n < 5) throw std::runtime_error("fwhm: too few bins");

  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half_width), hi = std::min(n - 1, i + half_width);
    double sum = 0.0;
    for (int k = lo; k <= hi; ++k) sum += static_cast<double>(c.counts[k]);
    y[i] = sum / (hi - lo + 1);
  }

  // Baseline: median of the outer 20% of bins (10% each side, at least 1).
  const int edge = std::max(1, n / 10);
  std::vector<double> outer;
  for (int i = 0; i < edge; ++i) outer.push_back(y[i]);
  for (int i = n - edge; i < n; ++i) outer.push_back(y[i]);
  std::sort(outer.begin(), outer.end());
  const double baseline = outer.size() % 2
                              ? outer[outer.size() / 2]
                              : 0.5 * (outer[outer.size() / 2 - 1] + outer[outer.size() / 2]);

  int peak = 0;
  for (int i = 1; i < n; ++i)
    if (y[i] > y[peak]) peak = i;
  if (y[peak] <= baseline + 3.0 * std::sqrt(baseline + 1.0))
    throw std::runtime_error("fwhm: no peak above baseline");
  const double half = baseline + 0.5 * (y[peak] - baseline);

  // Crossing positions, linearly interpolated between bin centers.
  double left = c.offset_of(0);
  for (int i = peak; i >= 0; --i) {
    if (y[i] < half) {
      left = c.offset_of(i) + (half - y[i]) / (y[i + 1] - y[i]) * c.bin_width_ps;
      break;
    }
    if (i == 0) left = c.offset_of(0);
  }
  double right = c.offset_of(n - 1);
  for (int i = peak; i < n; ++i) {
    if (y[i] < half) {
      right = c.offset_of(i - 1) + (y[i - 1] - half) / (y[i - 1] - y[i]) * c.bin_width_ps;
      break;
    }
    if (i == n - 1) right = c.offset_of(n - 1);
  }
  return right - left;
}

}  // namespace

std::vector<CoincidencePair> match_pairs(const TagStream& a, const TagStream& b,
                                         std::int64_t window_ps) {
  if (window_ps < 0) throw std::invalid_argument("match_pairs: negative window");
  std::vector<CoincidencePair> out;
  std::size_t i = 0, j = 0;
  while (i < a.tags.size() && j < b.tags.size()) {
    const std::int64_t dt = b.tags[j].t - a.tags[i].t;
    if (dt < -window_ps) {
      ++j;  // b too early for any remaining a
    } else if (dt > window_ps) {
      ++i;  // a has no partner
    } else if (j + 1 < b.tags.size() &&
               std::llabs(b.tags[j + 1].t - a.tags[i].t) < std::llabs(dt)) {
      ++j;  // strictly closer successor; tie keeps the earlier b tag
    } else {
      out.push_back({a.tags[i].t, b.tags[j].t});
      ++i;
      ++j;
    }
  }
  return out;
}

JtiBuild build_jti(const std::vector<CoincidencePair>& pairs, const FrameSpec& frame,
                   int d, int offset, double acquisition_seconds) {
  if (frame.tau_ps <= 0 || frame.n_bins < 2)
    throw std::invalid_argument("build_jti: invalid frame spec");
  if (d <= 0 || offset < 0 || offset + d > frame.n_bins)
    throw std::out_of_range("build_jti: subspace outside frame");

  JtiBuild r;
  r.matrix = JointCountMatrix::zeros(d, d, "time", "time");
  r.matrix.acquisition_seconds = acquisition_seconds;
  r.matched_pairs = pairs.size();
  const std::int64_t frame_len = frame.frame_length_ps();
  for (const CoincidencePair& p : pairs) {
    if (p.t_a / frame_len != p.t_b / frame_len) {
      ++r.spillover;
      continue;
    }
    const int bin_a = static_cast<int>((p.t_a % frame_len) / frame.tau_ps);
    const int bin_b = static_cast<int>((p.t_b % frame_len) / frame.tau_ps);
    if (bin_a < offset || bin_a >= offset + d || bin_b < offset || bin_b >= offset + d) {
      ++r.outside;
      continue;
    }
    ++r.matrix.at(bin_a - offset, bin_b - offset);
  }
  r.matrix.meta["tau_ps"] = std::to_string(frame.tau_ps);
  r.matrix.meta["n_bins"] = std::to_string(frame.n_bins);
  r.matrix.meta["offset"] = std::to_string(offset);
  r.matrix.meta["matched_pairs"] = std::to_string(r.matched_pairs);
  r.matrix.meta["spillover"] = std::to_string(r.spillover);
  r.matrix.meta["outside_subspace"] = std::to_string(r.outside);
  return r;
}

double crosstalk_metric(const JointCountMatrix& m) {
  if (m.d_a != m.d_b) throw std::invalid_argument("crosstalk_metric: matrix not square");
  std::uint64_t diag = 0, off1 = 0;
  for (int i = 0; i < m.d_a; ++i) {
    diag += m.at(i, i);
    if (i + 1 < m.d_a) off1 += m.at(i, i + 1) + m.at(i + 1, i);
  }
  if (diag == 0) throw std::runtime_error("crosstalk_metric: zero diagonal");
  return static_cast<double>(off1) / static_cast<double>(diag);
}

}  // namespace qtf
