// qtf: command-line front end for the time-frequency entanglement toolkit.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qtf/certify.hpp"
#include "qtf/coincidence.hpp"
#include "qtf/count_matrix.hpp"
#include "qtf/report.hpp"
#include "qtf/source_sim.hpp"
#include "qtf/spectral.hpp"
#include "qtf/stats.hpp"
#include "qtf/tagcore.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

qtf::TargetState load_target(const std::string& spec, int d) {
  if (spec.empty() || spec == "max") return qtf::TargetState::maximally_entangled(d);
  qtf::TargetState t;
  t.d = d;
  std::ifstream in(spec);
  if (!in) throw std::runtime_error("cannot open target file " + spec);
  double v;
  while (in >> v) t.lambdas.push_back(v);
  if (static_cast<int>(t.lambdas.size()) != d)
    throw std::runtime_error("target file must list exactly d coefficients");
  t.validate();
  return t;
}

double meta_num(const qtf::JointCountMatrix& m, const std::string& key) {
  const auto it = m.meta.find(key);
  return it == m.meta.end() ? 0.0 : std::stod(it->second);
}

json summary_json(const qtf::BootstrapSummary& s) {
  return {{"estimate", qtf::canonical_double(s.estimate)},
          {"std", qtf::canonical_double(s.std)},
          {"resamples", s.resamples},
          {"excluded", s.excluded}};
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Time-frequency entangled photon-pair simulation and certification"};
  app.require_subcommand(1);

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "Generate detector tag streams from a config");
  std::string sim_config, sim_out = ".";
  double sim_duration = -1.0;
  std::uint64_t sim_seed = 1;
  bool sim_seed_set = false;
  sim->add_option("--config", sim_config, "Config file")->required();
  sim->add_option("--out", sim_out, "Output directory");
  sim->add_option("--duration", sim_duration, "Run length in seconds (overrides config)");
  sim->add_option("--seed", sim_seed, "RNG seed (overrides config)")
      ->each([&](const std::string&) { sim_seed_set = true; });

  // --- correlate ---
  auto* corr = app.add_subcommand("correlate", "Cross-correlogram of two tag files");
  std::string corr_a, corr_b, corr_out = "correlogram";
  std::int64_t corr_bin = 5, corr_range = 2000;
  corr->add_option("--a", corr_a, "First tag file")->required();
  corr->add_option("--b", corr_b, "Second tag file")->required();
  corr->add_option("--bin-ps", corr_bin, "Bin width (ps)");
  corr->add_option("--range-ps", corr_range, "Offset range (±ps)");
  corr->add_option("--out", corr_out, "Output prefix (.csv and _fwhm.json)");

  // --- jti ---
  auto* jti_cmd = app.add_subcommand("jti", "Joint temporal intensity from two tag files");
  std::string jti_a, jti_b, jti_out = "jti.csv";
  std::int64_t jti_tau = 250, jti_window = 0;
  int jti_nbins = 256, jti_d = 31, jti_offset = 0;
  jti_cmd->add_option("--a", jti_a, "Party-A time-arm tag file")->required();
  jti_cmd->add_option("--b", jti_b, "Party-B time-arm tag file")->required();
  jti_cmd->add_option("--tau-ps", jti_tau, "Bin width (ps)");
  jti_cmd->add_option("--n-bins", jti_nbins, "Bins per frame");
  jti_cmd->add_option("--d", jti_d, "Subspace dimension");
  jti_cmd->add_option("--offset", jti_offset, "Subspace start bin");
  jti_cmd->add_option("--window-ps", jti_window, "Matching window (ps)")->required();
  jti_cmd->add_option("--out", jti_out, "Output CSV");

  // --- jsi ---
  auto* jsi_cmd = app.add_subcommand("jsi", "Joint spectral intensity via filter sweep");
  std::string jsi_config, jsi_out = "jsi.csv";
  int jsi_d = 31;
  double jsi_fwhm = 5.9, jsi_step = 0.0, jsi_seconds = 3.0;
  std::uint64_t jsi_seed = 1;
  std::int64_t jsi_window = 500;
  jsi_cmd->add_option("--config", jsi_config, "Config file")->required();
  jsi_cmd->add_option("--d", jsi_d, "Matrix dimension");
  jsi_cmd->add_option("--filter-fwhm-ghz", jsi_fwhm, "Filter FWHM (GHz)");
  jsi_cmd->add_option("--step-ghz", jsi_step, "Center spacing (default 2x FWHM)");
  jsi_cmd->add_option("--seconds", jsi_seconds, "Acquisition per setting (s)");
  jsi_cmd->add_option("--window-ps", jsi_window, "Coincidence window (ps)");
  jsi_cmd->add_option("--seed", jsi_seed, "RNG seed");
  jsi_cmd->add_option("--out", jsi_out, "Output CSV");

  // --- mub-check ---
  auto* mub = app.add_subcommand("mub-check", "Cross-basis unbiasedness check");
  std::string mub_config, mub_out = "mub.json";
  int mub_d = 7;
  double mub_fwhm = 5.9, mub_seconds = 10.0;
  std::int64_t mub_tau = 250, mub_window = 500;
  std::uint64_t mub_seed = 1;
  mub->add_option("--config", mub_config, "Config file")->required();
  mub->add_option("--d", mub_d, "Dimension");
  mub->add_option("--filter-fwhm-ghz", mub_fwhm, "Filter FWHM (GHz)");
  mub->add_option("--tau-ps", mub_tau, "Time-bin width (ps)");
  mub->add_option("--seconds", mub_seconds, "Acquisition per setting (s)");
  mub->add_option("--window-ps", mub_window, "Coincidence window (ps)");
  mub->add_option("--seed", mub_seed, "RNG seed");
  mub->add_option("--out", mub_out, "Output JSON");

  // --- certify ---
  auto* cert = app.add_subcommand("certify", "Entanglement certification from matrices");
  std::string cert_jti, cert_jsi, cert_target = "max", cert_out;
  int cert_d = 0, cert_boot = 0;
  double cert_overlap = 0.0;
  std::uint64_t cert_seed = 1;
  bool cert_nonprime = false;
  cert->add_option("--jti", cert_jti, "Time-basis matrix CSV")->required();
  cert->add_option("--jsi", cert_jsi, "Frequency-basis matrix CSV")->required();
  cert->add_option("--d", cert_d, "Dimension (default: matrix size)");
  cert->add_option("--overlap", cert_overlap, "Measured max basis overlap (default 1/d)");
  cert->add_option("--target", cert_target, "'max' or file of Schmidt coefficients");
  cert->add_option("--bootstrap", cert_boot, "Poisson-bootstrap resamples");
  cert->add_option("--seed", cert_seed, "Bootstrap seed");
  cert->add_flag("--allow-nonprime", cert_nonprime, "Permit non-prime d (non-rigorous)");
  cert->add_option("--out", cert_out, "Report path (default stdout)");

  // --- schmidt ---
  auto* schmidt = app.add_subcommand("schmidt", "Schmidt decomposition of a count matrix");
  std::string schmidt_in;
  schmidt->add_option("--matrix", schmidt_in, "Matrix CSV")->required();

  // --- budget ---
  auto* budget = app.add_subcommand("budget", "Measurement-setting budgets for dimension d");
  int budget_d = 31;
  budget->add_option("--d", budget_d, "Dimension");

  // --- run ---
  auto* run = app.add_subcommand("run", "Full pipeline from a config file");
  std::string run_config, run_out = "out";
  std::uint64_t run_seed = 0;
  bool run_seed_set = false;
  run->add_option("--config", run_config, "Config file")->required();
  run->add_option("--out", run_out, "Output directory");
  run->add_option("--seed", run_seed, "RNG seed (overrides config)")
      ->each([&](const std::string&) { run_seed_set = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints the help text
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  }

  if (*sim) {
    const std::string raw = slurp(sim_config);
    qtf::PipelineConfig cfg = qtf::pipeline_config_from(qtf::parse_config(raw), raw);
    if (sim_duration > 0) cfg.duration_s = sim_duration;
    if (sim_seed_set) cfg.seed = sim_seed;
    fs::create_directories(sim_out);
    const auto pairs = qtf::generate_pairs(cfg.source, cfg.duration_s, cfg.seed);
    std::vector<qtf::PairFate> fates;
    const auto streams = qtf::detect(pairs, cfg.source, cfg.channels, std::nullopt,
                                     cfg.duration_s, cfg.seed, &fates);
    const char* names[4] = {"tags_at.qtag", "tags_af.qtag", "tags_bt.qtag", "tags_bf.qtag"};
    json sizes;
    for (int i = 0; i < 4; ++i) {
      qtf::write_tags_file(streams[i], (fs::path(sim_out) / names[i]).string());
      sizes[names[i]] = streams[i].tags.size();
    }
    std::ostringstream truth;
    truth << "birth_time_ps,detuning_ghz,pump_jitter_ghz,fate_a,fate_b\n";
    char buf[128];
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%d,%d\n", pairs[i].birth_time_ps,
                    pairs[i].detuning_ghz, pairs[i].pump_jitter_ghz,
                    static_cast<int>(fates[i].a), static_cast<int>(fates[i].b));
      truth << buf;
    }
    write_text((fs::path(sim_out) / "truth.csv").string(), truth.str());
    sizes["pairs"] = pairs.size();
    std::cout << qtf::canonical_json(sizes);
    return 0;
  }

  if (*corr) {
    const qtf::TagStream a = qtf::read_tags_file(corr_a);
    const qtf::TagStream b = qtf::read_tags_file(corr_b);
    const qtf::Correlogram c = qtf::cross_correlogram(a, b, corr_bin, corr_range);
    std::ostringstream csv;
    csv << "offset_ps,counts\n";
    for (std::size_t k = 0; k < c.counts.size(); ++k)
      csv << c.offset_of(static_cast<int>(k)) << ',' << c.counts[k] << '\n';
    write_text(corr_out + ".csv", csv.str());
    json fj{{"fwhm_ps", qtf::canonical_double(qtf::fwhm_ps(c))},
            {"bin_ps", corr_bin},
            {"range_ps", corr_range}};
    write_text(corr_out + "_fwhm.json", qtf::canonical_json(fj));
    std::cout << qtf::canonical_json(fj);
    return 0;
  }

  if (*jti_cmd) {
    const qtf::TagStream a = qtf::read_tags_file(jti_a);
    const qtf::TagStream b = qtf::read_tags_file(jti_b);
    const auto pairs = qtf::match_pairs(a, b, jti_window);
    const qtf::FrameSpec frame{jti_tau, jti_nbins};
    qtf::JtiBuild built = qtf::build_jti(pairs, frame, jti_d, jti_offset);
    qtf::write_matrix_csv_file(built.matrix, jti_out);
    json j{{"matched_pairs", built.matched_pairs},
           {"spillover", built.spillover},
           {"outside_subspace", built.outside},
           {"out", jti_out}};
    std::cout << qtf::canonical_json(j);
    return 0;
  }

  if (*jsi_cmd) {
    const std::string raw = slurp(jsi_config);
    const qtf::PipelineConfig cfg = qtf::pipeline_config_from(qtf::parse_config(raw), raw);
    qtf::SweepPlan plan = qtf::sweep_plan(jsi_d, jsi_fwhm, cfg.source.pm_bandwidth_ghz);
    if (jsi_step > 0.0) {
      plan.step_ghz = jsi_step;
      for (int i = 0; i < plan.d; ++i) {
        plan.centers_a[i] = (i - 0.5 * (plan.d - 1)) * jsi_step;
        plan.centers_b[i] = -plan.centers_a[i];
      }
      plan.span_ghz = (plan.d - 1) * jsi_step;
      plan.coverage_warning = plan.span_ghz > cfg.source.pm_bandwidth_ghz;
    }
    const qtf::JointCountMatrix m = qtf::acquire_jsi(cfg.source, cfg.channels, plan,
                                                     jsi_seconds, jsi_seed, jsi_window);
    qtf::write_matrix_csv_file(m, jsi_out);
    json j{{"total_counts", m.total()},
           {"coverage_warning", plan.coverage_warning},
           {"out", jsi_out}};
    std::cout << qtf::canonical_json(j);
    return 0;
  }

  if (*mub) {
    const std::string raw = slurp(mub_config);
    const qtf::PipelineConfig cfg = qtf::pipeline_config_from(qtf::parse_config(raw), raw);
    const qtf::SweepPlan plan = qtf::sweep_plan(mub_d, mub_fwhm, cfg.source.pm_bandwidth_ghz);
    const qtf::FrameSpec frame{mub_tau, mub_d};
    const qtf::OverlapEstimate est = qtf::acquire_cross_basis(
        cfg.source, cfg.channels, plan, frame, mub_seconds, mub_seed, mub_window);
    json j{{"d", est.d},
           {"max_overlap", qtf::canonical_double(est.max_overlap)},
           {"max_overlap_std", qtf::canonical_double(est.max_overlap_std)},
           {"avg_deviation", qtf::canonical_double(est.avg_deviation)},
           {"avg_deviation_std", qtf::canonical_double(est.avg_deviation_std)},
           {"ideal", qtf::canonical_double(1.0 / est.d)},
           {"low_statistics", est.low_statistics}};
    write_text(mub_out, qtf::canonical_json(j));
    std::cout << qtf::canonical_json(j);
    return 0;
  }

  if (*cert) {
    qtf::JointCountMatrix jti = qtf::read_matrix_csv_file(cert_jti);
    qtf::JointCountMatrix jsi = qtf::read_matrix_csv_file(cert_jsi);
    if (cert_d > 0 && cert_d != jti.d_a) jti = qtf::subspace(jti, cert_d, 0);
    if (cert_d > 0 && cert_d != jsi.d_a)
      jsi = qtf::subspace(jsi, cert_d, (jsi.d_a - cert_d) / 2);
    const int d = jti.d_a;
    const bool idealized_overlap = cert_overlap <= 0.0;
    const double overlap = idealized_overlap ? 1.0 / d : cert_overlap;
    const qtf::TargetState target = load_target(cert_target, d);

    const qtf::FidelityResult fid = qtf::fidelity_certify(jti, jsi, target, cert_nonprime);
    const qtf::EofResult eof = qtf::eof_certify(jti, jsi, overlap);
    const qtf::SteeringResult steer = qtf::steering_certify(jti, jsi, d, cert_nonprime);

    json warnings = json::array();
    if (!qtf::is_prime(d)) warnings.push_back("nonprime-dimension");
    if (idealized_overlap) warnings.push_back("idealized-overlap");

    const double matched = meta_num(jti, "matched_pairs");
    const double discarded =
        matched > 0 ? 1.0 - static_cast<double>(jti.total()) / matched : 0.0;

    json b_k = json::array();
    for (double b : fid.b_k) b_k.push_back(qtf::canonical_double(b));
    json report{{"config_digest", qtf::config_digest(slurp(cert_jti) + slurp(cert_jsi))},
                {"tool_version", qtf::kToolVersion},
                {"seed", cert_seed},
                {"d", d},
                {"f1", qtf::canonical_double(fid.f1)},
                {"f2_tilde", qtf::canonical_double(fid.f2_tilde)},
                {"f_tilde", qtf::canonical_double(fid.f_tilde)},
                {"b_k", b_k},
                {"d_ent", fid.d_ent},
                {"h1", qtf::canonical_double(eof.h1)},
                {"h2", qtf::canonical_double(eof.h2)},
                {"max_overlap", qtf::canonical_double(overlap)},
                {"eof_lb", qtf::canonical_double(eof.eof_lb)},
                {"eof_lb_raw", qtf::canonical_double(eof.eof_lb_raw)},
                {"s", qtf::canonical_double(steer.s)},
                {"sr_lb", qtf::canonical_double(steer.sr_lb)},
                {"delta", qtf::canonical_double(steer.delta)},
                {"n_cert", steer.n_cert},
                {"discarded_fraction_time", qtf::canonical_double(discarded)},
                {"warnings", warnings}};
    if (cert_boot > 0) {
      const auto boot = qtf::poisson_bootstrap(jti, jsi, target, overlap, "all",
                                               cert_boot, cert_seed, cert_nonprime);
      for (const auto& [name, summary] : boot)
        report[name + "_bootstrap"] = summary_json(summary);
    }
    const std::string text = qtf::canonical_json(report);
    if (cert_out.empty())
      std::cout << text;
    else
      write_text(cert_out, text);
    return 0;
  }

  if (*schmidt) {
    const qtf::JointCountMatrix m = qtf::read_matrix_csv_file(schmidt_in);
    const std::vector<double> eig = qtf::schmidt_decompose(m);
    double k = 0.0;  // inverse participation ratio (effective Schmidt number)
    for (double e : eig) k += e * e;
    json ej = json::array();
    for (double e : eig) ej.push_back(qtf::canonical_double(e));
    json j{{"eigenvalues", ej}, {"schmidt_number_k", qtf::canonical_double(1.0 / k)}};
    std::cout << qtf::canonical_json(j);
    return 0;
  }

  if (*budget) {
    const qtf::MeasurementBudget b = qtf::measurement_budget(budget_d);
    json j{{"d", budget_d},
           {"fst", b.fst},
           {"fidelity_direct", b.fidelity_direct},
           {"two_bases", b.two_bases},
           {"this_work", b.this_work}};
    std::cout << qtf::canonical_json(j);
    return 0;
  }

  if (*run) {
    const std::string raw = slurp(run_config);
    qtf::PipelineConfig cfg = qtf::pipeline_config_from(qtf::parse_config(raw), raw);
    if (run_seed_set) cfg.seed = run_seed;
    const std::string report = qtf::run_pipeline(cfg, run_out);
    std::cout << qtf::canonical_json(json{{"report", report}});
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::cerr << json{{"error", e.what()}, {"code", "usage"}}.dump() << '\n';
    return e.get_exit_code() == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"code", "runtime"}}.dump() << '\n';
    return 1;
  }
}
