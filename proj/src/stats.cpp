#include "qtf/stats.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace qtf {

namespace {

JointCountMatrix resample(const JointCountMatrix& m, std::mt19937_64& rng) {
  JointCountMatrix out = m;
  for (std::uint64_t& c : out.counts) {
    if (c == 0) continue;  // Poisson(0) is identically 0
    std::poisson_distribution<std::uint64_t> p(static_cast<double>(c));
    c = p(rng);
  }
  return out;
}

struct Accumulator {
  std::vector<double> values;
  void add(double v) { values.push_back(v); }
  BootstrapSummary summarize(int excluded, std::uint64_t seed) const {
    BootstrapSummary s;
    s.resamples = static_cast<int>(values.size());
    s.excluded = excluded;
    s.seed = seed;
    if (values.empty()) {
      s.estimate = std::nan("");
      s.std = std::nan("");
      return s;
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    s.estimate = mean;
    s.std = values.size() > 1 ? std::sqrt(var / (values.size() - 1)) : 0.0;
    return s;
  }
};

}  // namespace

std::map<std::string, BootstrapSummary> poisson_bootstrap(
    const JointCountMatrix& jti, const JointCountMatrix& jsi,
    const TargetState& target, double max_overlap, const std::string& estimator,
    int resamples, std::uint64_t seed, bool allow_nonprime) {
  if (resamples < 2) throw std::invalid_argument("poisson_bootstrap: resamples must be >= 2");
  const bool all = estimator == "all";
  auto wanted = [&](const char* name) { return all || estimator == name; };
  if (!all && estimator != "f_tilde" && estimator != "eof_lb" && estimator != "s" &&
      estimator != "sr_lb" && estimator != "delta" && estimator != "n_cert")
    throw std::invalid_argument("poisson_bootstrap: unknown estimator " + estimator);

  std::map<std::string, Accumulator> acc;
  int excluded = 0;
  for (int r = 0; r < resamples; ++r) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r));
    const JointCountMatrix jti_r = resample(jti, rng);
    const JointCountMatrix jsi_r = resample(jsi, rng);
    try {
      // Compute everything first so a failure excludes the whole resample.
      std::map<std::string, double> vals;
      if (wanted("f_tilde"))
        vals["f_tilde"] = fidelity_certify(jti_r, jsi_r, target, allow_nonprime).f_tilde;
      if (wanted("eof_lb")) vals["eof_lb"] = eof_certify(jti_r, jsi_r, max_overlap).eof_lb;
      if (wanted("s") || wanted("sr_lb") || wanted("delta") || wanted("n_cert")) {
        const SteeringResult st = steering_certify(jti_r, jsi_r, jti.d_a, allow_nonprime);
        if (wanted("s")) vals["s"] = st.s;
        if (wanted("sr_lb")) vals["sr_lb"] = st.sr_lb;
        if (wanted("delta")) vals["delta"] = st.delta;
        if (wanted("n_cert")) vals["n_cert"] = st.n_cert;
      }
      for (const auto& [name, v] : vals) acc[name].add(v);
    } catch (const std::exception&) {
      ++excluded;
    }
  }

  std::map<std::string, BootstrapSummary> out;
  if (all || estimator == "f_tilde")
    out["f_tilde"] = acc["f_tilde"].summarize(excluded, seed);
  if (all || estimator == "eof_lb") out["eof_lb"] = acc["eof_lb"].summarize(excluded, seed);
  for (const char* name : {"s", "sr_lb", "delta", "n_cert"})
    if (all || estimator == name) out[name] = acc[name].summarize(excluded, seed);
  return out;
}

MeasurementBudget measurement_budget(int d) {
  if (d < 2) throw std::invalid_argument("measurement_budget: d must be >= 2");
  const std::uint64_t du = static_cast<std::uint64_t>(d);
  MeasurementBudget b;
  b.fst = (du + 1) * (du + 1) * du * du;
  b.fidelity_direct = (du + 1) * du * du;
  b.two_bases = 2 * du * du;
  b.this_work = du * du + 1;
  return b;
}

}  // namespace qtf
