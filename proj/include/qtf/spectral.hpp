#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qtf/count_matrix.hpp"
#include "qtf/source_sim.hpp"

namespace qtf {

/// Filter-sweep schedule for a d x d JSI. B-side centers are mirrored so the
/// energy-anti-correlated outcome lands on the matrix diagonal.
struct SweepPlan {
  int d = 0;
  double step_ghz = 0.0;
  double filter_fwhm_ghz = 0.0;
  std::vector<double> centers_a;  // ascending
  std::vector<double> centers_b;  // mirrored: centers_b[j] = -centers_a[j]
  bool coverage_warning = false;  // sweep span exceeds the source envelope
  double span_ghz = 0.0;
};

/// Cross-basis (time x frequency) unbiasedness estimate.
struct OverlapEstimate {
  int d = 0;
  Eigen::MatrixXd overlap;       // column-normalized |<i|j~>|^2 estimates
  double max_overlap = 0.0;
  double max_overlap_std = 0.0;
  double avg_deviation = 0.0;    // mean |entry - 1/d|
  double avg_deviation_std = 0.0;
  bool low_statistics = false;   // some column below 100 counts
  JointCountMatrix counts;       // raw (time-bin x filter-setting) counts
};

/// Equally spaced centers at step = 2 x filter FWHM, symmetric about the band
/// center. envelope_fwhm_ghz > 0 enables the coverage warning check.
SweepPlan sweep_plan(int d, double filter_fwhm_ghz, double envelope_fwhm_ghz = 0.0);

/// Closed-form expected rate (pairs/s) through both filters at setting (i, j),
/// before detector efficiency and splitter routing.
double jsi_expectation(const SourceConfig& src, const SweepPlan& plan, int i, int j);

/// Simulated filter sweep: d^2 independent sub-runs (seed + setting index),
/// counting A_F x B_F coincidences within window_ps per setting.
JointCountMatrix acquire_jsi(const SourceConfig& src, const ChannelConfig& channels,
                             const SweepPlan& plan, double seconds_per_setting,
                             std::uint64_t seed, std::int64_t window_ps = 500);

/// Cross-basis acquisition: d sub-runs sweeping B's filter, binning A_T
/// arrival times into frame bins [0, d) and column-normalizing.
OverlapEstimate acquire_cross_basis(const SourceConfig& src,
                                    const ChannelConfig& channels,
                                    const SweepPlan& plan, const FrameSpec& frame,
                                    double seconds_per_setting, std::uint64_t seed,
                                    std::int64_t window_ps = 500);

/// Overlap statistics from an existing cross-basis count matrix.
OverlapEstimate overlap_from_counts(const JointCountMatrix& counts);

}  // namespace qtf
