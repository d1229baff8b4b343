#include "qtf/spectral.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "qtf/coincidence.hpp"

namespace qtf {

SweepPlan sweep_plan(int d, double filter_fwhm_ghz, double envelope_fwhm_ghz) {
  if (d < 2) throw std::invalid_argument("sweep_plan: d must be >= 2");
  if (filter_fwhm_ghz <= 0) throw std::invalid_argument("sweep_plan: fwhm must be > 0");
  SweepPlan plan;
  plan.d = d;
  plan.filter_fwhm_ghz = filter_fwhm_ghz;
  plan.step_ghz = 2.0 * filter_fwhm_ghz;
  plan.centers_a.resize(d);
  plan.centers_b.resize(d);
  for (int i = 0; i < d; ++i) {
    plan.centers_a[i] = (i - 0.5 * (d - 1)) * plan.step_ghz;
    plan.centers_b[i] = -plan.centers_a[i];
  }
  plan.span_ghz = (d - 1) * plan.step_ghz;
  plan.coverage_warning = envelope_fwhm_ghz > 0 && plan.span_ghz > envelope_fwhm_ghz;
  return plan;
}

namespace {

// E[T_A(nu_s - ca) * T_B(nu_i - cb)] over the double-Gaussian biphoton
// spectrum, with nu_s = delta + eps/2 and nu_i = -delta + eps/2. Gaussian
// integral in (delta, eps); the cross terms cancel so the quadratic form is
// diagonal.
double filter_pair_probability(double sigma_detuning, double sigma_pump,
                               double sigma_filter, double ca, double cb) {
  const double f2 = sigma_filter * sigma_filter;
  const double s1 = sigma_detuning;
  const double a11 = 1.0 / (s1 * s1) + 2.0 / f2;
  const double b1 = (ca - cb) / f2;
  const double c = (ca * ca + cb * cb) / f2;
  if (sigma_pump <= 0.0) {
    return 1.0 / (s1 * std::sqrt(a11)) * std::exp(0.5 * b1 * b1 / a11 - 0.5 * c);
  }
  const double s2 = sigma_pump;
  const double a22 = 1.0 / (s2 * s2) + 0.5 / f2;
  const double b2 = (ca + cb) / (2.0 * f2);
  return 1.0 / (s1 * s2 * std::sqrt(a11 * a22)) *
         std::exp(0.5 * (b1 * b1 / a11 + b2 * b2 / a22) - 0.5 * c);
}

// E[T(nu - c)] for a single filter against nu ~ N(0, sigma_nu).
double filter_single_probability(double sigma_nu, double sigma_filter, double c) {
  const double v = sigma_filter * sigma_filter + sigma_nu * sigma_nu;
  return sigma_filter / std::sqrt(v) * std::exp(-0.5 * c * c / v);
}

}  // namespace

double jsi_expectation(const SourceConfig& src, const SweepPlan& plan, int i, int j) {
  if (i < 0 || j < 0 || i >= plan.d || j >= plan.d)
    throw std::out_of_range("jsi_expectation: setting index out of range");
  const double p = filter_pair_probability(
      fwhm_to_sigma(src.pm_bandwidth_ghz), fwhm_to_sigma(src.pump_linewidth_ghz),
      fwhm_to_sigma(plan.filter_fwhm_ghz), plan.centers_a[i], plan.centers_b[j]);
  return src.pair_rate_per_s * p;
}

JointCountMatrix acquire_jsi(const SourceConfig& src, const ChannelConfig& channels,
                             const SweepPlan& plan, double seconds_per_setting,
                             std::uint64_t seed, std::int64_t window_ps) {
  JointCountMatrix m = JointCountMatrix::zeros(plan.d, plan.d, "frequency", "frequency");
  m.acquisition_seconds = seconds_per_setting;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", plan.step_ghz);
  m.meta["step_ghz"] = buf;
  std::snprintf(buf, sizeof(buf), "%.12g", plan.filter_fwhm_ghz);
  m.meta["filter_fwhm_ghz"] = buf;
  if (seconds_per_setting <= 0.0) return m;

  const double s1 = fwhm_to_sigma(src.pm_bandwidth_ghz);
  const double s2 = fwhm_to_sigma(src.pump_linewidth_ghz);
  const double sf = fwhm_to_sigma(plan.filter_fwhm_ghz);
  const double sc = fwhm_to_sigma(src.correlation_time_ps);
  const double sj_a = fwhm_to_sigma(channels.a.jitter_fwhm_ps);
  const double sj_b = fwhm_to_sigma(channels.b.jitter_fwhm_ps);
  const double eff_a = channels.a.efficiency * (1.0 - channels.a.splitter_ratio);
  const double eff_b = channels.b.efficiency * (1.0 - channels.b.splitter_ratio);
  const double sigma_nu = std::sqrt(s1 * s1 + 0.25 * s2 * s2);
  const double f2 = sf * sf;
  const double a11 = 1.0 / (s1 * s1) + 2.0 / f2;
  const double a22 = s2 > 0 ? 1.0 / (s2 * s2) + 0.5 / f2 : 0.0;

  for (int i = 0; i < plan.d; ++i) {
    for (int j = 0; j < plan.d; ++j) {
      std::mt19937_64 rng(seed + static_cast<std::uint64_t>(i) * plan.d + j);
      std::normal_distribution<double> n01(0.0, 1.0);
      const double ca = plan.centers_a[i];
      const double cb = plan.centers_b[j];
      // Gaussian spectrum x Gaussian filters: the number of pairs passing
      // both filters is Poisson with a closed-form mean, and the spectral
      // coordinates of an accepted pair follow the (Gaussian) posterior
      // obtained by completing the square. Only accepted pairs are sampled,
      // so the sweep cost is proportional to the detected counts.
      const double p_pair =
          filter_pair_probability(s1, s2, sf, ca, cb) * eff_a * eff_b;
      const double b1 = (ca - cb) / f2;
      const double b2 = (ca + cb) / (2.0 * f2);
      std::poisson_distribution<std::int64_t> np(src.pair_rate_per_s *
                                                 seconds_per_setting * p_pair);
      const std::int64_t n = np(rng);
      std::uint64_t count = 0;
      for (std::int64_t k = 0; k < n; ++k) {
        const double delta = b1 / a11 + n01(rng) / std::sqrt(a11);
        const double eps = s2 > 0 ? b2 / a22 + n01(rng) / std::sqrt(a22) : 0.0;
        const double nu_s = delta + 0.5 * eps;
        const double nu_i = -delta + 0.5 * eps;
        // Timing gate of the coincidence logic.
        double dt = sc > 0 ? sc * n01(rng) : 0.0;
        dt += dispersion_delay_ps(nu_s, channels.a.dispersion_ps_per_nm,
                                  src.center_wavelength_nm) -
              dispersion_delay_ps(nu_i, channels.b.dispersion_ps_per_nm,
                                  src.center_wavelength_nm);
        if (sj_a > 0) dt += sj_a * n01(rng);
        if (sj_b > 0) dt -= sj_b * n01(rng);
        if (std::llabs(std::llround(dt)) <= window_ps) ++count;
      }
      // Accidental coincidences between uncorrelated singles.
      const double singles_a =
          src.pair_rate_per_s * eff_a * filter_single_probability(sigma_nu, sf, ca) +
          channels.a.dark_rate_per_s;
      const double singles_b =
          src.pair_rate_per_s * eff_b * filter_single_probability(sigma_nu, sf, cb) +
          channels.b.dark_rate_per_s;
      const double acc_mean = singles_a * singles_b * (2.0 * window_ps * 1e-12) *
                              seconds_per_setting;
      if (acc_mean > 0) {
        std::poisson_distribution<std::int64_t> acc(acc_mean);
        count += acc(rng);
      }
      m.at(i, j) = count;
    }
  }
  return m;
}

OverlapEstimate overlap_from_counts(const JointCountMatrix& counts) {
  OverlapEstimate est;
  est.d = counts.d_a;
  est.counts = counts;
  const int d = counts.d_a;
  est.overlap = Eigen::MatrixXd::Zero(d, counts.d_b);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(d, counts.d_b);
  const double ideal = 1.0 / d;
  double dev_sum = 0.0, dev_var = 0.0;
  int max_i = 0, max_j = 0;
  for (int j = 0; j < counts.d_b; ++j) {
    double col = 0.0;
    for (int i = 0; i < d; ++i) col += static_cast<double>(counts.at(i, j));
    if (col < 100.0) est.low_statistics = true;
    if (col <= 0.0) continue;
    for (int i = 0; i < d; ++i) {
      const double c = static_cast<double>(counts.at(i, j));
      const double p = c / col;
      est.overlap(i, j) = p;
      sigma(i, j) = std::sqrt(std::max(0.0, c * (col - c) / (col * col * col)));
      dev_sum += std::abs(p - ideal);
      dev_var += sigma(i, j) * sigma(i, j);
      if (p > est.overlap(max_i, max_j)) {
        max_i = i;
        max_j = j;
      }
    }
  }
  const double cells = static_cast<double>(d) * counts.d_b;
  est.max_overlap = est.overlap(max_i, max_j);
  est.max_overlap_std = sigma(max_i, max_j);
  est.avg_deviation = dev_sum / cells;
  est.avg_deviation_std = std::sqrt(dev_var) / cells;
  return est;
}

OverlapEstimate acquire_cross_basis(const SourceConfig& src,
                                    const ChannelConfig& channels,
                                    const SweepPlan& plan, const FrameSpec& frame,
                                    double seconds_per_setting, std::uint64_t seed,
                                    std::int64_t window_ps) {
  const int d = plan.d;
  JointCountMatrix counts = JointCountMatrix::zeros(d, d, "time", "frequency");
  counts.acquisition_seconds = seconds_per_setting;
  counts.meta["tau_ps"] = std::to_string(frame.tau_ps);
  counts.meta["n_bins"] = std::to_string(frame.n_bins);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", plan.step_ghz);
  counts.meta["step_ghz"] = buf;

  const std::int64_t frame_len = frame.frame_length_ps();
  for (int j = 0; j < d; ++j) {
    const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(j);
    const auto pairs = generate_pairs(src, seconds_per_setting, run_seed);
    FilterSetting filter{plan.centers_a[j], plan.centers_b[j], plan.filter_fwhm_ghz};
    const auto streams = detect(pairs, src, channels, filter, seconds_per_setting,
                                run_seed);
    const auto matched = match_pairs(streams[kChannelAT], streams[kChannelBF], window_ps);
    for (const CoincidencePair& p : matched) {
      const int bin_a = static_cast<int>((p.t_a % frame_len) / frame.tau_ps);
      if (bin_a >= 0 && bin_a < d) ++counts.at(bin_a, j);
    }
  }
  return overlap_from_counts(counts);
}

}  // namespace qtf
