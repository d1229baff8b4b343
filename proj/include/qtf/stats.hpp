#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "qtf/certify.hpp"
#include "qtf/count_matrix.hpp"

namespace qtf {

struct BootstrapSummary {
  double estimate = 0.0;  // mean over resamples
  double std = 0.0;       // sample standard deviation
  int resamples = 0;      // successful resamples
  int excluded = 0;       // resamples where the estimator failed
  std::uint64_t seed = 0;
};

/// Poisson bootstrap: every count is replaced by an independent Poisson(c)
/// draw and the certification re-run; per-resample seeds are seed + index.
/// estimator is one of "f_tilde", "eof_lb", "s", "sr_lb", "delta", "n_cert"
/// or "all". Failed resamples are excluded and counted.
std::map<std::string, BootstrapSummary> poisson_bootstrap(
    const JointCountMatrix& jti, const JointCountMatrix& jsi,
    const TargetState& target, double max_overlap, const std::string& estimator,
    int resamples, std::uint64_t seed, bool allow_nonprime = false);

struct MeasurementBudget {
  std::uint64_t fst = 0;              // (d+1)^2 d^2
  std::uint64_t fidelity_direct = 0;  // (d+1) d^2
  std::uint64_t two_bases = 0;        // 2 d^2
  std::uint64_t this_work = 0;        // d^2 + 1
};

MeasurementBudget measurement_budget(int d);

}  // namespace qtf
