#include "qtf/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qtf/certify.hpp"
#include "qtf/coincidence.hpp"
#include "qtf/count_matrix.hpp"
#include "qtf/spectral.hpp"
#include "qtf/stats.hpp"
#include "qtf/tagcore.hpp"

namespace qtf {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

ConfigMap parse_config(const std::string& text) {
  ConfigMap cfg;
  std::istringstream in(text);
  std::string line, section;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    cfg[(section.empty() ? key : section + "." + key)] = value;
  }
  return cfg;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

double config_get(const ConfigMap& cfg, const std::string& key, double fallback) {
  const auto it = cfg.find(key);
  return it == cfg.end() ? fallback : std::stod(it->second);
}

std::string config_get_str(const ConfigMap& cfg, const std::string& key,
                           const std::string& fallback) {
  const auto it = cfg.find(key);
  return it == cfg.end() ? fallback : it->second;
}

std::string config_digest(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double canonical_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::strtod(buf, nullptr);
}

namespace {

void emit(const nlohmann::json& j, std::string& out) {
  using value_t = nlohmann::json::value_t;
  switch (j.type()) {
    case value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(it.key()).dump();
        out += ':';
        emit(it.value(), out);
      }
      out += '}';
      break;
    }
    case value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        emit(j[i], out);
      }
      out += ']';
      break;
    }
    case value_t::number_float: {
      const double v = j.get<double>();
      if (std::isnan(v) || std::isinf(v)) {
        out += "null";
      } else {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        out += buf;
      }
      break;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string canonical_json(const nlohmann::json& j) {
  std::string out;
  emit(j, out);
  out += '\n';
  return out;
}

PipelineConfig pipeline_config_from(const ConfigMap& cfg, const std::string& raw_text) {
  PipelineConfig p;
  p.source.pair_rate_per_s = config_get(cfg, "source.pair_rate_per_s", 1e6);
  p.source.pm_bandwidth_ghz = config_get(cfg, "source.pm_bandwidth_ghz", 250.0);
  p.source.pump_linewidth_ghz = config_get(cfg, "source.pump_linewidth_ghz", 0.0);
  p.source.center_wavelength_nm = config_get(cfg, "source.center_wavelength_nm", 1560.0);
  p.source.correlation_time_ps = config_get(cfg, "source.correlation_time_ps", 0.1);

  auto party = [&](const std::string& s) {
    PartyChannel ch;
    ch.dispersion_ps_per_nm = config_get(cfg, s + ".dispersion_ps_per_nm", 0.0);
    ch.efficiency = config_get(cfg, s + ".efficiency", 1.0);
    ch.jitter_fwhm_ps = config_get(cfg, s + ".jitter_fwhm_ps", 0.0);
    ch.dark_rate_per_s = config_get(cfg, s + ".dark_rate_per_s", 0.0);
    ch.splitter_ratio = config_get(cfg, s + ".splitter_ratio", 0.5);
    return ch;
  };
  p.channels.a = party("channel_a");
  p.channels.b = party("channel_b");

  p.frame.tau_ps = static_cast<std::int64_t>(config_get(cfg, "frame.tau_ps", 250));
  p.frame.n_bins = static_cast<int>(config_get(cfg, "frame.n_bins", 256));
  p.filter_fwhm_ghz = config_get(cfg, "filter.fwhm_ghz", 5.9);

  p.duration_s = config_get(cfg, "run.duration_s", 3.0);
  p.jsi_seconds_per_setting = config_get(cfg, "run.jsi_seconds_per_setting", 3.0);
  p.d = static_cast<int>(config_get(cfg, "run.d", 31));
  p.mub_d = static_cast<int>(config_get(cfg, "run.mub_d", 7));
  p.mub_seconds_per_setting = config_get(cfg, "run.mub_seconds_per_setting", 10.0);
  p.window_ps = static_cast<std::int64_t>(config_get(cfg, "run.window_ps", 0));
  p.correlogram_bin_ps =
      static_cast<std::int64_t>(config_get(cfg, "run.correlogram_bin_ps", 5));
  p.correlogram_range_ps =
      static_cast<std::int64_t>(config_get(cfg, "run.correlogram_range_ps", 2000));
  p.bootstrap_resamples = static_cast<int>(config_get(cfg, "run.bootstrap_resamples", 1000));
  p.seed = static_cast<std::uint64_t>(config_get(cfg, "run.seed", 1));
  p.digest = config_digest(raw_text);
  return p;
}

namespace {

namespace fs = std::filesystem;

/// Predicted FWHM of the A_T x B_T correlation peak from the configured
/// jitters, intrinsic correlation time, and residual dispersion.
double expected_correlation_fwhm_ps(const SourceConfig& src, const ChannelConfig& ch) {
  const double lam2_c = src.center_wavelength_nm * src.center_wavelength_nm * 1e-3 /
                        kSpeedOfLightNmPerPs;  // ps per (GHz * ps/nm)
  const double disp_sum = ch.a.dispersion_ps_per_nm + ch.b.dispersion_ps_per_nm;
  const double disp_diff = ch.a.dispersion_ps_per_nm - ch.b.dispersion_ps_per_nm;
  const double w_delta = lam2_c * disp_sum * src.pm_bandwidth_ghz;
  const double w_pump = lam2_c * 0.5 * disp_diff * src.pump_linewidth_ghz;
  return std::sqrt(ch.a.jitter_fwhm_ps * ch.a.jitter_fwhm_ps +
                   ch.b.jitter_fwhm_ps * ch.b.jitter_fwhm_ps +
                   src.correlation_time_ps * src.correlation_time_ps +
                   w_delta * w_delta + w_pump * w_pump);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

nlohmann::json summary_json(const BootstrapSummary& s) {
  return {{"estimate", canonical_double(s.estimate)},
          {"std", canonical_double(s.std)},
          {"resamples", s.resamples},
          {"excluded", s.excluded}};
}

}  // namespace

std::string run_pipeline(const PipelineConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  auto path = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };
  auto stage_fail = [](const std::string& stage, const std::exception& e) {
    throw std::runtime_error("stage " + stage + ": " + e.what());
  };

  const double corr_fwhm = expected_correlation_fwhm_ps(cfg.source, cfg.channels);
  const std::int64_t window =
      cfg.window_ps > 0 ? cfg.window_ps
                        : std::max<std::int64_t>(10, std::llround(5.0 * corr_fwhm));

  // -- simulate ------------------------------------------------------------
  std::array<TagStream, 4> streams;
  try {
    const auto pairs = generate_pairs(cfg.source, cfg.duration_s, cfg.seed);
    std::vector<PairFate> fates;
    streams = detect(pairs, cfg.source, cfg.channels, std::nullopt, cfg.duration_s,
                     cfg.seed, &fates);
    const char* names[4] = {"tags_at.qtag", "tags_af.qtag", "tags_bt.qtag",
                            "tags_bf.qtag"};
    for (int i = 0; i < 4; ++i) write_tags_file(streams[i], path(names[i]));
    std::ostringstream truth;
    truth << "birth_time_ps,detuning_ghz,pump_jitter_ghz,fate_a,fate_b\n";
    char buf[128];
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%d,%d\n", pairs[i].birth_time_ps,
                    pairs[i].detuning_ghz, pairs[i].pump_jitter_ghz,
                    static_cast<int>(fates[i].a), static_cast<int>(fates[i].b));
      truth << buf;
    }
    write_text(path("truth.csv"), truth.str());
  } catch (const std::exception& e) {
    stage_fail("simulate", e);
  }

  // -- correlate -----------------------------------------------------------
  try {
    const Correlogram c =
        cross_correlogram(streams[kChannelAT], streams[kChannelBT],
                          cfg.correlogram_bin_ps, cfg.correlogram_range_ps);
    std::ostringstream csv;
    csv << "offset_ps,counts\n";
    for (std::size_t k = 0; k < c.counts.size(); ++k)
      csv << c.offset_of(static_cast<int>(k)) << ',' << c.counts[k] << '\n';
    write_text(path("correlogram.csv"), csv.str());
    nlohmann::json fj{{"fwhm_ps", canonical_double(fwhm_ps(c))},
                      {"bin_ps", cfg.correlogram_bin_ps},
                      {"range_ps", cfg.correlogram_range_ps}};
    write_text(path("correlogram_fwhm.json"), canonical_json(fj));
  } catch (const std::exception& e) {
    stage_fail("correlate", e);
  }

  // -- jti -----------------------------------------------------------------
  JointCountMatrix jti;
  std::uint64_t matched_total = 0;
  try {
    const auto pairs_tt = match_pairs(streams[kChannelAT], streams[kChannelBT], window);
    matched_total = pairs_tt.size();
    JtiBuild build = build_jti(pairs_tt, cfg.frame, cfg.d, 0, cfg.duration_s);
    jti = std::move(build.matrix);
    write_matrix_csv_file(jti, path("jti.csv"));
    const JtiBuild full =
        build_jti(pairs_tt, cfg.frame, cfg.frame.n_bins, 0, cfg.duration_s);
    write_matrix_csv_file(full.matrix, path("jti_full.csv"));
  } catch (const std::exception& e) {
    stage_fail("jti", e);
  }

  // -- jsi -----------------------------------------------------------------
  JointCountMatrix jsi;
  SweepPlan plan;
  try {
    plan = sweep_plan(cfg.d, cfg.filter_fwhm_ghz, cfg.source.pm_bandwidth_ghz);
    jsi = acquire_jsi(cfg.source, cfg.channels, plan, cfg.jsi_seconds_per_setting,
                      cfg.seed + 1000, window);
    write_matrix_csv_file(jsi, path("jsi.csv"));
  } catch (const std::exception& e) {
    stage_fail("jsi", e);
  }

  // -- mub-check -----------------------------------------------------------
  OverlapEstimate mub;       // documentation run at mub_d
  OverlapEstimate cert_ovl;  // overlap at the certification dimension
  try {
    const SweepPlan mub_plan =
        sweep_plan(cfg.mub_d, cfg.filter_fwhm_ghz, cfg.source.pm_bandwidth_ghz);
    const FrameSpec mub_frame{cfg.frame.tau_ps, cfg.mub_d};
    mub = acquire_cross_basis(cfg.source, cfg.channels, mub_plan, mub_frame,
                              cfg.mub_seconds_per_setting, cfg.seed + 2000, window);
    write_matrix_csv_file(mub.counts, path("cross_basis.csv"));
    nlohmann::json mj{{"d", mub.d},
                      {"max_overlap", canonical_double(mub.max_overlap)},
                      {"max_overlap_std", canonical_double(mub.max_overlap_std)},
                      {"avg_deviation", canonical_double(mub.avg_deviation)},
                      {"avg_deviation_std", canonical_double(mub.avg_deviation_std)},
                      {"ideal", canonical_double(1.0 / mub.d)},
                      {"low_statistics", mub.low_statistics}};
    write_text(path("mub.json"), canonical_json(mj));

    if (cfg.mub_d == cfg.d) {
      cert_ovl = mub;
    } else {
      const FrameSpec cert_frame{cfg.frame.tau_ps, cfg.d};
      cert_ovl = acquire_cross_basis(cfg.source, cfg.channels, plan, cert_frame,
                                     cfg.jsi_seconds_per_setting, cfg.seed + 3000, window);
      write_matrix_csv_file(cert_ovl.counts, path("cross_basis_cert.csv"));
    }
  } catch (const std::exception& e) {
    stage_fail("mub-check", e);
  }

  // -- certify -------------------------------------------------------------
  try {
    const TargetState target = TargetState::maximally_entangled(cfg.d);
    const FidelityResult fid = fidelity_certify(jti, jsi, target);
    const EofResult eof = eof_certify(jti, jsi, cert_ovl.max_overlap);
    const SteeringResult steer = steering_certify(jti, jsi, cfg.d);
    const auto boot = poisson_bootstrap(jti, jsi, target, cert_ovl.max_overlap, "all",
                                        cfg.bootstrap_resamples, cfg.seed + 4000);

    nlohmann::json warnings = nlohmann::json::array();
    if (plan.coverage_warning) warnings.push_back("jsi-sweep-exceeds-envelope");
    if (cert_ovl.low_statistics) warnings.push_back("overlap-low-statistics");

    const double discarded_time =
        matched_total == 0
            ? 0.0
            : 1.0 - static_cast<double>(jti.total()) / static_cast<double>(matched_total);

    nlohmann::json curve = nlohmann::json::array();
    std::ostringstream fid_csv, steer_csv;
    fid_csv << "d,f_tilde,d_ent,eof_lb\n";
    steer_csv << "d,s,sr_lb,delta,n_cert\n";
    for (int dd = 2; dd <= cfg.d; ++dd) {
      if (!is_prime(dd)) continue;
      const JointCountMatrix jti_d = subspace(jti, dd, 0);
      const JointCountMatrix jsi_d = subspace(jsi, dd, (cfg.d - dd) / 2);
      const TargetState t_d = TargetState::maximally_entangled(dd);
      nlohmann::json row{{"d", dd}};
      try {
        const FidelityResult f_d = fidelity_certify(jti_d, jsi_d, t_d);
        const JointCountMatrix ovl_d =
            subspace(cert_ovl.counts, dd, (cert_ovl.d - dd) / 2);
        const double mo = overlap_from_counts(ovl_d).max_overlap;
        const EofResult e_d = eof_certify(jti_d, jsi_d, mo > 0 ? mo : 1.0 / dd);
        const SteeringResult s_d = steering_certify(jti_d, jsi_d, dd);
        row["f_tilde"] = canonical_double(f_d.f_tilde);
        row["d_ent"] = f_d.d_ent;
        row["eof_lb"] = canonical_double(e_d.eof_lb);
        row["max_overlap"] = canonical_double(e_d.max_overlap);
        row["s"] = canonical_double(s_d.s);
        row["sr_lb"] = canonical_double(s_d.sr_lb);
        row["delta"] = canonical_double(s_d.delta);
        row["n_cert"] = s_d.n_cert;
        fid_csv << dd << ',' << f_d.f_tilde << ',' << f_d.d_ent << ',' << e_d.eof_lb
                << '\n';
        steer_csv << dd << ',' << s_d.s << ',' << s_d.sr_lb << ',' << s_d.delta << ','
                  << s_d.n_cert << '\n';
      } catch (const std::exception& e) {
        row["error"] = e.what();
      }
      curve.push_back(row);
    }
    write_text(path("fidelity_vs_d.csv"), fid_csv.str());
    write_text(path("steering_vs_d.csv"), steer_csv.str());

    nlohmann::json b_k = nlohmann::json::array();
    for (double b : fid.b_k) b_k.push_back(canonical_double(b));

    nlohmann::json report{
        {"config_digest", cfg.digest},
        {"tool_version", kToolVersion},
        {"seed", cfg.seed},
        {"d", cfg.d},
        {"window_ps", window},
        {"f1", canonical_double(fid.f1)},
        {"f2_tilde", canonical_double(fid.f2_tilde)},
        {"f_tilde", canonical_double(fid.f_tilde)},
        {"f_tilde_bootstrap", summary_json(boot.at("f_tilde"))},
        {"b_k", b_k},
        {"d_ent", fid.d_ent},
        {"h1", canonical_double(eof.h1)},
        {"h2", canonical_double(eof.h2)},
        {"max_overlap", canonical_double(cert_ovl.max_overlap)},
        {"max_overlap_std", canonical_double(cert_ovl.max_overlap_std)},
        {"eof_lb", canonical_double(eof.eof_lb)},
        {"eof_lb_raw", canonical_double(eof.eof_lb_raw)},
        {"eof_lb_bootstrap", summary_json(boot.at("eof_lb"))},
        {"s", canonical_double(steer.s)},
        {"sr_lb", canonical_double(steer.sr_lb)},
        {"sr_lb_bootstrap", summary_json(boot.at("sr_lb"))},
        {"delta", canonical_double(steer.delta)},
        {"delta_bootstrap", summary_json(boot.at("delta"))},
        {"n_cert", steer.n_cert},
        {"discarded_fraction_time", canonical_double(discarded_time)},
        {"discarded_fraction_freq", 0.0},
        {"warnings", warnings},
        {"curve", curve}};
    const std::string report_path = path("report.json");
    write_text(report_path, canonical_json(report));
    return report_path;
  } catch (const std::exception& e) {
    stage_fail("certify", e);
  }
  return "";  // unreachable
}

}  // namespace qtf
