#pragma once

#include <cstdint>
#include <vector>

#include "qtf/count_matrix.hpp"
#include "qtf/tagcore.hpp"

namespace qtf {

/// Histogram of t_b - t_a offsets, bins centered on 0.
struct Correlogram {
  std::int64_t bin_width_ps = 0;
  int n_half = 0;  // bins = 2*n_half + 1, bin k is centered at (k - n_half)*bin_width
  std::vector<std::uint64_t> counts;

  double offset_of(int k) const {
    return static_cast<double>(k - n_half) * static_cast<double>(bin_width_ps);
  }
};

struct CoincidencePair {
  std::int64_t t_a = 0;
  std::int64_t t_b = 0;
};

/// Sorted two-pointer sweep, O(n_a + n_b + pairs-in-range).
Correlogram cross_correlogram(const TagStream& a, const TagStream& b,
                              std::int64_t bin_width_ps, std::int64_t range_ps);

/// Linear-interpolated full width at half of (peak - baseline); baseline is
/// the median of the outer 20% of bins. Throws if there is no peak.
double fwhm_ps(const Correlogram& c);

/// Greedy nearest-neighbor matching in one forward sweep; each tag used at
/// most once, ties broken toward the earlier b tag.
std::vector<CoincidencePair> match_pairs(const TagStream& a, const TagStream& b,
                                         std::int64_t window_ps);

struct JtiBuild {
  JointCountMatrix matrix;
  std::uint64_t spillover = 0;       // clicks in different frames
  std::uint64_t outside = 0;         // same frame, bin outside [offset, offset+d)
  std::uint64_t matched_pairs = 0;   // input size
};

/// Discretized joint temporal intensity. Frames are anchored at t = 0; pairs
/// straddling a frame boundary are discarded into `spillover`.
JtiBuild build_jti(const std::vector<CoincidencePair>& pairs, const FrameSpec& frame,
                   int d, int offset, double acquisition_seconds = 0.0);

/// (sum of |i-j| = 1 entries) / (sum of diagonal entries).
double crosstalk_metric(const JointCountMatrix& m);

}  // namespace qtf
