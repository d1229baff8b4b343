#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qtf/source_sim.hpp"

namespace qtf {

inline constexpr const char* kToolVersion = "0.1.0";

// Flat key/value config with [section] headers; '#' starts a comment.
using ConfigMap = std::map<std::string, std::string>;  // "section.key" -> value
ConfigMap parse_config(const std::string& text);
ConfigMap parse_config_file(const std::string& path);
double config_get(const ConfigMap& cfg, const std::string& key, double fallback);
std::string config_get_str(const ConfigMap& cfg, const std::string& key,
                           const std::string& fallback);

/// FNV-1a 64 hex digest of the raw config bytes.
std::string config_digest(const std::string& text);

/// Canonical JSON: sorted keys, doubles at 12 significant digits. Values are
/// snapped through the same formatting so parse-back is exact.
std::string canonical_json(const nlohmann::json& j);
double canonical_double(double v);

/// Everything `run` needs, decoded from a config file.
struct PipelineConfig {
  SourceConfig source;
  ChannelConfig channels;
  FrameSpec frame{250, 256};
  double filter_fwhm_ghz = 5.9;
  double duration_s = 3.0;
  double jsi_seconds_per_setting = 3.0;
  int d = 31;
  int mub_d = 7;
  double mub_seconds_per_setting = 10.0;
  std::int64_t window_ps = 0;  // 0 = auto (5x expected correlation FWHM)
  std::int64_t correlogram_bin_ps = 5;
  std::int64_t correlogram_range_ps = 2000;
  int bootstrap_resamples = 1000;
  std::uint64_t seed = 1;
  std::string digest;
};

PipelineConfig pipeline_config_from(const ConfigMap& cfg, const std::string& raw_text);

/// simulate -> correlate -> jti -> jsi -> mub-check -> certify, writing all
/// artifacts under out_dir. Returns the report path. Throws
/// std::runtime_error prefixed with the failing stage name.
std::string run_pipeline(const PipelineConfig& cfg, const std::string& out_dir);

}  // namespace qtf
