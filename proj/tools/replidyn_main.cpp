// replidyn: batch driver for replicator-equation experiments.
//
// Subcommands:
//   simulate        iterate an orbit and write CSV/JSON artifacts
//   verify-folk     run the folk-theorem certificate on a stable-kind config
//   verify-historic run the historic-behavior pipeline on a zero-sum config
//   catalog         list or check the fitness-map catalog
//
// Exit codes: 0 pass, 1 config error, 2 numeric invariant violation,
//             3 certificate failure, 4 insufficient data.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "replidyn/catalog.hpp"
#include "replidyn/config.hpp"
#include "replidyn/equilibrium.hpp"
#include "replidyn/historic.hpp"
#include "replidyn/io.hpp"
#include "replidyn/version.hpp"

namespace {

using namespace replidyn;
namespace fs = std::filesystem;

constexpr int kExitPass = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInvariant = 2;
constexpr int kExitCertificate = 3;
constexpr int kExitInsufficient = 4;

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::invariant:
    case ErrorKind::numeric:
      return kExitInvariant;
    case ErrorKind::insufficient:
      return kExitInsufficient;
    default:
      return kExitConfig;
  }
}

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
};

ExperimentConfig load_config(const CommonArgs& args) {
  ExperimentConfig cfg = ExperimentConfig::load(args.config_path);
  if (!args.out_override.empty()) cfg.output_dir = args.out_override;
  if (args.has_seed_override) {
    cfg.seed = args.seed_override;
    cfg.folk.seed = args.seed_override;
  }
  return cfg;
}

void write_sidecar(const ExperimentConfig& cfg, const fs::path& dir, double wall_seconds) {
  nlohmann::json meta;
  meta["config"] = cfg.resolved_json();
  meta["wall_time_s"] = wall_seconds;
  meta["version"] = kVersion;
  meta["timestamp_utc"] = [] {
    auto now = std::chrono::system_clock::now();
    auto t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return std::string(buf);
  }();
  write_json_atomic(dir / "run_meta.json", meta);
}

Orbit run_orbit(const ExperimentConfig& cfg) {
  SimplexPointD x0 = cfg.initial.resolve(cfg.system.dim());
  IterateOptions opt;
  opt.thinning = cfg.thinning;
  opt.record_trace = true;
  return iterate(cfg.system, x0, cfg.steps, cfg.resolved_precision(), opt);
}

int cmd_simulate(const CommonArgs& args) {
  auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = load_config(args);
  Orbit orbit = run_orbit(cfg);
  fs::create_directories(cfg.output_dir);
  write_orbit_csv(orbit, cfg.output_dir / "orbit.csv");

  if (cfg.run_itinerary) {
    ItineraryCertificate cert = itinerary_certificate(orbit, cfg.historic.delta0);
    write_json_atomic(cfg.output_dir / "itinerary.json", cert.to_json());
  }
  if (cfg.trapping) {
    TrappingAnalysis tr = trapping_runs(orbit, RegionPartition{cfg.trapping->delta0});
    write_json_atomic(cfg.output_dir / "trapping.json", tr.to_json());
    for (int r = 1; r <= 3; ++r)
      write_trapping_csv(tr, r, cfg.output_dir / ("trapping_u" + std::to_string(r) + ".csv"));
  }
  if (cfg.averages) {
    TimeAverageStack stack = repeated_averages(orbit, cfg.averages->s_max);
    write_averages_csv(stack, cfg.output_dir / "averages.csv");
  }
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_sidecar(cfg, cfg.output_dir, wall);
  if (orbit.drift_flagged) {
    std::cerr << "invariant violation: per-step drift exceeded 2^(-prec/2), max drift "
              << orbit.max_drift << "\n";
    return kExitInvariant;
  }
  return kExitPass;
}

int cmd_verify_folk(const CommonArgs& args) {
  auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = load_config(args);
  if (cfg.system.kind() != DynamicsKind::stable) {
    std::cerr << "verify-folk requires a stable-kind system\n";
    return kExitConfig;
  }
  FolkCertificate cert = certify_folk_theorem(cfg.system, cfg.folk);
  fs::create_directories(cfg.output_dir);
  write_json_atomic(cfg.output_dir / "folk_certificate.json", cert.to_json());

  // Per-trial CSV (deterministic given the config seed).
  std::string csv = "trial,converged_at,final_residual,max_ind_constant,lyapunov_monotone,pass";
  int m = cfg.system.dim();
  for (int i = 1; i <= m; ++i) csv += ",limit" + std::to_string(i);
  csv += "\n";
  for (std::size_t t = 0; t < cert.trials.size(); ++t) {
    const TrialRecord& r = cert.trials[t];
    csv += std::to_string(t) + ',' + std::to_string(r.converged_at) + ',' +
           format_double(r.final_residual) + ',' + (r.max_ind_constant ? "1" : "0") + ',' +
           (r.lyapunov_monotone ? "1" : "0") + ',' + (r.pass ? "1" : "0");
    for (double v : r.predicted_limit) csv += ',' + format_double(v);
    csv += '\n';
  }
  write_file_atomic(cfg.output_dir / "folk_trials.csv", csv);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_sidecar(cfg, cfg.output_dir, wall);

  std::cout << "folk certificate: " << (cert.pass() ? "PASS" : "FAIL") << "\n";
  return cert.pass() ? kExitPass : kExitCertificate;
}

int cmd_verify_historic(const CommonArgs& args) {
  auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = load_config(args);
  if (!cfg.system.zero_sum()) {
    std::cerr << "verify-historic requires a zero-sum system\n";
    return kExitConfig;
  }
  Orbit orbit = run_orbit(cfg);
  fs::create_directories(cfg.output_dir);
  write_orbit_csv(orbit, cfg.output_dir / "orbit.csv");

  bool xi_ok = orbit.xi_increase_steps == 0;
  ItineraryCertificate itin = itinerary_certificate(orbit, cfg.historic.delta0);
  write_json_atomic(cfg.output_dir / "itinerary.json", itin.to_json());

  TrappingAnalysis tr = trapping_runs(orbit, RegionPartition{cfg.historic.delta0});
  write_json_atomic(cfg.output_dir / "trapping.json", tr.to_json());
  for (int r = 1; r <= 3; ++r)
    write_trapping_csv(tr, r, cfg.output_dir / ("trapping_u" + std::to_string(r) + ".csv"));
  GapCertificate gap = gap_certificate(tr);

  TimeAverageStack stack = repeated_averages(orbit, cfg.historic.s_max);
  write_averages_csv(stack, cfg.output_dir / "averages.csv");
  DivergenceReport div =
      divergence_report(stack, cfg.historic.window_fraction, cfg.historic.thresholds);

  nlohmann::json cert;
  cert["xi_descent"] = {{"pass", xi_ok}, {"violations", orbit.xi_increase_steps}};
  cert["itinerary"] = itin.to_json();
  cert["gap"] = gap.to_json();
  cert["divergence"] = div.to_json();
  bool pass = xi_ok && itin.pass && gap.pass && div.verdict == "historic";
  cert["pass"] = pass;
  write_json_atomic(cfg.output_dir / "historic_certificate.json", cert);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_sidecar(cfg, cfg.output_dir, wall);

  std::cout << "historic certificate: " << (pass ? "PASS" : "FAIL") << " (xi "
            << (xi_ok ? "ok" : "violated") << ", itinerary " << (itin.pass ? "ok" : "violated")
            << ", gap " << (gap.pass ? "ok" : ("failed: " + gap.reason)) << ", averages verdict "
            << div.verdict << ")\n";
  return pass ? kExitPass : kExitCertificate;
}

int cmd_catalog_list() {
  int primitives = 0, combinators = 0;
  for (const CatalogEntry& e : catalog_entries()) {
    if (e.kind == "primitive") ++primitives;
    else ++combinators;
  }
  std::cout << "fitness-map catalog: " << primitives << " primitive families, " << combinators
            << " combinators\n\n";
  for (const CatalogEntry& e : catalog_entries()) {
    std::cout << e.kind << "  " << e.name << "\n";
    if (!e.parameters.empty()) std::cout << "    parameters: " << e.parameters << "\n";
    std::cout << "    " << e.notes << "\n";
  }
  return kExitPass;
}

int cmd_catalog_check(int samples, std::uint64_t seed, const std::string& out,
                      bool inject_broken) {
  CatalogCheckReport report = catalog_check({2, 3, 5}, samples, seed, inject_broken);
  if (!out.empty()) {
    fs::create_directories(out);
    write_json_atomic(fs::path(out) / "catalog_report.json", report.to_json());
  }
  std::cout << "catalog check: " << report.sop_maps_checked << " maps, "
            << report.sop_violations << " order violations\n";
  for (const auto& f : report.sop_failures) std::cout << "  violation in " << f << "\n";
  double worst = 0.0;
  for (const auto& g : report.gradient_checks) worst = std::max(worst, g.max_rel_error);
  std::cout << "gradient checks: " << report.gradient_checks.size()
            << " maps, worst relative error " << worst << "\n";
  return report.pass() ? kExitPass : kExitCertificate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"replidyn: replicator equations generated by similar-order preserving maps"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", args.out_override, "override config output_dir");
    sub->add_option("--seed", args.seed_override, "override config seed")
        ->each([&](const std::string&) { args.has_seed_override = true; });
  };

  CLI::App* sim = app.add_subcommand("simulate", "iterate an orbit and write artifacts");
  add_common(sim);
  CLI::App* folk = app.add_subcommand("verify-folk", "folk-theorem certificate");
  add_common(folk);
  CLI::App* hist = app.add_subcommand("verify-historic", "historic-behavior certificate");
  add_common(hist);

  CLI::App* cat = app.add_subcommand("catalog", "fitness-map catalog");
  cat->require_subcommand(1);
  CLI::App* list = cat->add_subcommand("list", "print the catalog");
  int samples = 10000;
  std::uint64_t cat_seed = 1;
  std::string cat_out;
  bool inject_broken = false;
  CLI::App* check = cat->add_subcommand("check", "run SOP and gradient verification suites");
  check->add_option("--samples", samples, "points per domain per map");
  check->add_option("--seed", cat_seed, "sampling seed");
  check->add_option("--out", cat_out, "directory for catalog_report.json");
  check->add_flag("--inject-broken", inject_broken,
                  "include the order-swapping negative control");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(args);
    if (folk->parsed()) return cmd_verify_folk(args);
    if (hist->parsed()) return cmd_verify_historic(args);
    if (list->parsed()) return cmd_catalog_list();
    if (check->parsed()) return cmd_catalog_check(samples, cat_seed, cat_out, inject_broken);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
