#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "qtf/tagcore.hpp"

namespace qtf {

constexpr double kSpeedOfLightNmPerPs = 299792.458;  // nm/ps (= nm*GHz*1e-3)

/// FWHM of a Gaussian to its standard deviation.
inline double fwhm_to_sigma(double fwhm) { return fwhm / 2.3548200450309493; }

/// Parametric model of the SPDC source. The biphoton spectrum is
/// double-Gaussian: signal-idler detuning envelope (pm_bandwidth) times the
/// sum-frequency spread (pump_linewidth).
struct SourceConfig {
  double pair_rate_per_s = 1e6;
  double pm_bandwidth_ghz = 250.0;      // FWHM of the detuning envelope
  double pump_linewidth_ghz = 0.0;      // FWHM of the sum-frequency spread
  double center_wavelength_nm = 1560.0;
  double correlation_time_ps = 0.1;     // FWHM of intrinsic arrival-time diff
};

/// One party's fiber channel and detectors.
struct PartyChannel {
  double dispersion_ps_per_nm = 0.0;
  double efficiency = 1.0;
  double jitter_fwhm_ps = 0.0;   // per detector
  double dark_rate_per_s = 0.0;  // per detector
  double splitter_ratio = 0.5;   // probability routed to the time arm
};

struct ChannelConfig {
  PartyChannel a;
  PartyChannel b;
};

/// Band-pass filter placement for the frequency arms, detunings from the
/// signal/idler band center.
struct FilterSetting {
  double center_offset_a_ghz = 0.0;
  double center_offset_b_ghz = 0.0;
  double fwhm_ghz = 5.9;
};

/// Ground-truth pair record (simulation-internal).
/// Signal detuning = detuning + pump_jitter/2, idler = -detuning + pump_jitter/2.
struct PairEvent {
  double birth_time_ps = 0.0;
  double detuning_ghz = 0.0;
  double pump_jitter_ghz = 0.0;
};

enum class PhotonFate : std::uint8_t {
  kLost = 0,          // failed the efficiency draw
  kFilterBlocked = 1, // routed to the frequency arm, absorbed by the filter
  kDetectedTime = 2,
  kDetectedFreq = 3,
  kOutOfRange = 4,    // detection time fell outside the run
};

struct PairFate {
  PhotonFate a = PhotonFate::kLost;
  PhotonFate b = PhotonFate::kLost;
};

/// Poisson process of pair births over [0, duration); deterministic per seed.
std::vector<PairEvent> generate_pairs(const SourceConfig& src, double duration_s,
                                      std::uint64_t seed);

/// First-order (group-delay) chromatic dispersion:
/// delay = dispersion * d_lambda with d_lambda = -(lambda0^2/c) * detuning.
double dispersion_delay_ps(double detuning_ghz, double dispersion_ps_per_nm,
                           double center_wavelength_nm);

/// Gaussian band-pass transmission, peak 1 at the filter center.
double filter_transmission(double detuning_ghz, double center_ghz, double fwhm_ghz);

/// Full detection chain: efficiency, 50:50 routing, filter absorption,
/// dispersion delay, detector jitter, dark counts. Returns the four sorted
/// detector streams indexed by Channel; optionally records per-pair fates.
std::array<TagStream, 4> detect(const std::vector<PairEvent>& pairs,
                                const SourceConfig& src, const ChannelConfig& channels,
                                const std::optional<FilterSetting>& filter,
                                double duration_s, std::uint64_t seed,
                                std::vector<PairFate>* fates = nullptr);

}  // namespace qtf
