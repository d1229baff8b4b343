#include "qtf/source_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qtf {

std::vector<PairEvent> generate_pairs(const SourceConfig& src, double duration_s,
                                      std::uint64_t seed) {
  if (duration_s <= 0) throw std::invalid_argument("generate_pairs: duration must be > 0");
  std::mt19937_64 rng(seed);
  const double duration_ps = duration_s * 1e12;

  std::poisson_distribution<std::int64_t> pair_count(src.pair_rate_per_s * duration_s);
  const std::int64_t n = pair_count(rng);

  std::uniform_real_distribution<double> birth(0.0, duration_ps);
  std::vector<PairEvent> pairs(static_cast<std::size_t>(n));
  for (auto& p : pairs) p.birth_time_ps = birth(rng);
  std::sort(pairs.begin(), pairs.end(), [](const PairEvent& a, const PairEvent& b) {
    return a.birth_time_ps < b.birth_time_ps;
  });

  std::normal_distribution<double> detuning(0.0, fwhm_to_sigma(src.pm_bandwidth_ghz));
  const double pump_sigma = fwhm_to_sigma(src.pump_linewidth_ghz);
  std::normal_distribution<double> pump(0.0, pump_sigma > 0 ? pump_sigma : 1.0);
  for (auto& p : pairs) {
    p.detuning_ghz = detuning(rng);
    p.pump_jitter_ghz = pump_sigma > 0 ? pump(rng) : 0.0;
  }
  return pairs;
}

double dispersion_delay_ps(double detuning_ghz, double dispersion_ps_per_nm,
                           double center_wavelength_nm) {
  // d_lambda [nm] = -(lambda0^2 / c) * d_f; c in nm/ps, d_f in GHz = 1e-3/ps.
  const double d_lambda_nm = -center_wavelength_nm * center_wavelength_nm *
                             detuning_ghz * 1e-3 / kSpeedOfLightNmPerPs;
  return dispersion_ps_per_nm * d_lambda_nm;
}

double filter_transmission(double detuning_ghz, double center_ghz, double fwhm_ghz) {
  if (fwhm_ghz <= 0) throw std::invalid_argument("filter_transmission: fwhm must be > 0");
  const double x = (detuning_ghz - center_ghz) / fwhm_to_sigma(fwhm_ghz);
  return std::exp(-0.5 * x * x);
}

namespace {

struct PhotonOutcome {
  PhotonFate fate = PhotonFate::kLost;
  std::int64_t t = 0;
  int detector = -1;  // Channel index
};

PhotonOutcome detect_photon(double arrival_ps, double detuning_ghz, bool party_a,
                            const PartyChannel& ch, double center_wavelength_nm,
                            const std::optional<FilterSetting>& filter,
                            std::int64_t duration_ps, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  PhotonOutcome out;
  if (u01(rng) >= ch.efficiency) return out;  // kLost

  const bool time_arm = u01(rng) < ch.splitter_ratio;
  if (!time_arm && filter) {
    const double center =
        party_a ? filter->center_offset_a_ghz : filter->center_offset_b_ghz;
    if (u01(rng) >= filter_transmission(detuning_ghz, center, filter->fwhm_ghz)) {
      out.fate = PhotonFate::kFilterBlocked;
      return out;
    }
  }

  double t = arrival_ps + dispersion_delay_ps(detuning_ghz, ch.dispersion_ps_per_nm,
                                              center_wavelength_nm);
  if (ch.jitter_fwhm_ps > 0) {
    std::normal_distribution<double> jitter(0.0, fwhm_to_sigma(ch.jitter_fwhm_ps));
    t += jitter(rng);
  }
  const std::int64_t ti = std::llround(t);
  if (ti < 0 || ti > duration_ps) {
    out.fate = PhotonFate::kOutOfRange;
    return out;
  }
  out.fate = time_arm ? PhotonFate::kDetectedTime : PhotonFate::kDetectedFreq;
  out.t = ti;
  out.detector = (party_a ? 0 : 2) + (time_arm ? 0 : 1);
  return out;
}

}  // namespace

std::array<TagStream, 4> detect(const std::vector<PairEvent>& pairs,
                                const SourceConfig& src, const ChannelConfig& channels,
                                const std::optional<FilterSetting>& filter,
                                double duration_s, std::uint64_t seed,
                                std::vector<PairFate>* fates) {
  if (duration_s <= 0) throw std::invalid_argument("detect: duration must be > 0");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  const std::int64_t duration_ps = static_cast<std::int64_t>(duration_s * 1e12);

  std::array<TagStream, 4> streams;
  if (fates) {
    fates->clear();
    fates->reserve(pairs.size());
  }

  const double corr_sigma = fwhm_to_sigma(src.correlation_time_ps);
  std::normal_distribution<double> corr(0.0, corr_sigma > 0 ? corr_sigma : 1.0);
  for (const PairEvent& p : pairs) {
    // Intrinsic arrival-time difference split evenly so the pair difference
    // has FWHM = correlation_time.
    const double dt = corr_sigma > 0 ? corr(rng) : 0.0;
    const double nu_signal = p.detuning_ghz + 0.5 * p.pump_jitter_ghz;
    const double nu_idler = -p.detuning_ghz + 0.5 * p.pump_jitter_ghz;

    const PhotonOutcome a =
        detect_photon(p.birth_time_ps + 0.5 * dt, nu_signal, true, channels.a,
                      src.center_wavelength_nm, filter, duration_ps, rng);
    const PhotonOutcome b =
        detect_photon(p.birth_time_ps - 0.5 * dt, nu_idler, false, channels.b,
                      src.center_wavelength_nm, filter, duration_ps, rng);
    if (a.detector >= 0)
      streams[a.detector].tags.push_back({static_cast<std::uint8_t>(a.detector), a.t});
    if (b.detector >= 0)
      streams[b.detector].tags.push_back({static_cast<std::uint8_t>(b.detector), b.t});
    if (fates) fates->push_back({a.fate, b.fate});
  }

  // Dark counts: uniform in time, independent per detector.
  const double dark_rates[4] = {channels.a.dark_rate_per_s, channels.a.dark_rate_per_s,
                                channels.b.dark_rate_per_s, channels.b.dark_rate_per_s};
  std::uniform_real_distribution<double> ut(0.0, static_cast<double>(duration_ps));
  for (int det = 0; det < 4; ++det) {
    if (dark_rates[det] > 0) {
      std::poisson_distribution<std::int64_t> nd(dark_rates[det] * duration_s);
      const std::int64_t n = nd(rng);
      for (std::int64_t i = 0; i < n; ++i)
        streams[det].tags.push_back(
            {static_cast<std::uint8_t>(det), std::llround(ut(rng))});
    }
    streams[det].duration_ps = duration_ps;
    std::sort(streams[det].tags.begin(), streams[det].tags.end(),
              [](const TimeTag& x, const TimeTag& y) { return x.t < y.t; });
  }
  return streams;
}

}  // namespace qtf
