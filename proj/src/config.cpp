#include "replidyn/config.hpp"

#include <algorithm>
#include <fstream>

#include "replidyn/rng.hpp"

namespace replidyn {

using nlohmann::json;

SimplexPointD InitialSpec::resolve(int m) const {
  switch (kind) {
    case Kind::point: {
      if (static_cast<int>(point.size()) != m)
        fail(ErrorKind::config, "initial.point has wrong dimension");
      return SimplexPointD::from_coords(std::vector<double>(point), 53);
    }
    case Kind::face_center:
      return face_center(Face(std::vector<int>(face_indices), m));
    case Kind::random_interior: {
      SampleRng rng(seed);
      return SimplexPointD::from_coords(rng.interior_simplex_point(m, 1e-9), 53);
    }
  }
  fail(ErrorKind::config, "initial point spec is empty");
}

namespace {

InitialSpec initial_from_json(const json& j) {
  InitialSpec spec;
  if (j.contains("point")) {
    spec.kind = InitialSpec::Kind::point;
    spec.point = j.at("point").get<std::vector<double>>();
  } else if (j.contains("face_center")) {
    spec.kind = InitialSpec::Kind::face_center;
    spec.face_indices = j.at("face_center").get<std::vector<int>>();
  } else if (j.contains("random_interior")) {
    spec.kind = InitialSpec::Kind::random_interior;
    spec.seed = j.value("seed", 1ull);
  } else {
    fail(ErrorKind::config, "initial: need one of point / face_center / random_interior");
  }
  return spec;
}

json initial_to_json(const InitialSpec& s) {
  switch (s.kind) {
    case InitialSpec::Kind::point: return {{"point", s.point}};
    case InitialSpec::Kind::face_center: return {{"face_center", s.face_indices}};
    case InitialSpec::Kind::random_interior: return {{"random_interior", true}, {"seed", s.seed}};
  }
  return {};
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.contains("system")) fail(ErrorKind::config, "missing field: system");
  const json& sysj = j.at("system");
  if (!sysj.contains("fitness")) fail(ErrorKind::config, "missing field: system.fitness");
  if (!sysj.contains("kind")) fail(ErrorKind::config, "missing field: system.kind");

  FitnessMap fitness = FitnessMap::from_json(sysj.at("fitness"));
  if (sysj.contains("normalize_epsilon") && !sysj.at("normalize_epsilon").is_null()) {
    double eps = sysj.at("normalize_epsilon").get<double>();
    if (!(eps > 0.0)) fail(ErrorKind::config, "system.normalize_epsilon must be > 0");
    fitness = fitness.normalized(eps);
  }
  DynamicsKind kind = dynamics_kind_from_string(sysj.at("kind").get<std::string>());

  ExperimentConfig cfg{ReplicatorSystem(std::move(fitness), kind)};
  if (!j.contains("initial")) fail(ErrorKind::config, "missing field: initial");
  cfg.initial = initial_from_json(j.at("initial"));
  cfg.steps = j.value("steps", 1000L);
  if (cfg.steps < 1) fail(ErrorKind::config, "steps must be >= 1");
  cfg.precision_bits = j.value("precision_bits", 0);
  if (cfg.precision_bits != 0 &&
      !(cfg.precision_bits == 53 || (cfg.precision_bits >= 64 && cfg.precision_bits <= 4096)))
    fail(ErrorKind::config, "precision_bits must be 53 or in [64, 4096]");
  cfg.thinning = j.value("thinning", 1);
  if (cfg.thinning < 1) fail(ErrorKind::config, "thinning must be >= 1");
  cfg.seed = j.value("seed", 1ull);
  cfg.output_dir = j.value("output_dir", std::string("out"));

  if (j.contains("analyses")) {
    for (const auto& a : j.at("analyses")) {
      std::string kindstr;
      json params;
      if (a.is_string()) {
        kindstr = a.get<std::string>();
      } else {
        kindstr = a.at("kind").get<std::string>();
        params = a;
      }
      if (kindstr == "folk") {
        cfg.run_folk = true;
      } else if (kindstr == "historic") {
        cfg.run_historic = true;
      } else if (kindstr == "itinerary") {
        cfg.run_itinerary = true;
      } else if (kindstr == "averages") {
        AveragesOptions opt;
        opt.s_max = params.value("s_max", 3);
        if (opt.s_max < 1) fail(ErrorKind::config, "analyses.averages.s_max must be >= 1");
        cfg.averages = opt;
      } else if (kindstr == "trapping") {
        TrappingOptions opt;
        opt.delta0 = params.value("delta0", 0.05);
        if (!(opt.delta0 > 0.0)) fail(ErrorKind::config, "analyses.trapping.delta0 must be > 0");
        cfg.trapping = opt;
      } else {
        fail(ErrorKind::config, "unknown analysis kind '" + kindstr + "'");
      }
    }
  }

  if (j.contains("folk")) {
    const json& f = j.at("folk");
    cfg.folk.trials = f.value("trials", 100);
    cfg.folk.horizon = f.value("horizon", 100000L);
    cfg.folk.tol = f.value("tol", 1e-8);
    cfg.folk.rest_tol = f.value("rest_tol", 1e-12);
    cfg.folk.lyap_slack = f.value("lyap_slack", 1e-12);
    cfg.folk.probe.radius = f.value("probe_radius", 1e-3);
    cfg.folk.probe.probes = f.value("probes", 64);
    cfg.folk.probe.horizon = f.value("probe_horizon", 100000L);
    if (cfg.folk.trials < 1) fail(ErrorKind::config, "folk.trials must be >= 1");
  }
  cfg.folk.seed = cfg.seed;

  if (j.contains("historic")) {
    const json& h = j.at("historic");
    cfg.historic.delta0 = h.value("delta0", 0.05);
    cfg.historic.s_max = h.value("s_max", 3);
    cfg.historic.window_fraction = h.value("window_fraction", 0.5);
    cfg.historic.thresholds.theta = h.value("theta", 0.1);
    cfg.historic.thresholds.theta_high = h.value("theta_high", 0.02);
    cfg.historic.thresholds.theta_conv = h.value("theta_conv", 1e-6);
    if (!(cfg.historic.delta0 > 0.0)) fail(ErrorKind::config, "historic.delta0 must be > 0");
    if (!(cfg.historic.window_fraction > 0.0 && cfg.historic.window_fraction < 1.0))
      fail(ErrorKind::config, "historic.window_fraction must lie in (0,1)");
    if (cfg.historic.s_max < 1) fail(ErrorKind::config, "historic.s_max must be >= 1");
  }
  if (cfg.trapping) cfg.historic.delta0 = cfg.trapping->delta0;
  if (cfg.averages) cfg.historic.s_max = std::max(cfg.historic.s_max, cfg.averages->s_max);
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("config parse error: ") + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::resolved_json() const {
  json j;
  j["system"] = system.to_json();
  j["initial"] = initial_to_json(initial);
  j["steps"] = steps;
  j["precision_bits"] = resolved_precision();
  j["thinning"] = thinning;
  j["seed"] = seed;
  j["output_dir"] = output_dir.string();
  json analyses = json::array();
  if (run_folk) analyses.push_back("folk");
  if (run_historic) analyses.push_back("historic");
  if (run_itinerary) analyses.push_back("itinerary");
  if (averages) analyses.push_back({{"kind", "averages"}, {"s_max", averages->s_max}});
  if (trapping) analyses.push_back({{"kind", "trapping"}, {"delta0", trapping->delta0}});
  j["analyses"] = analyses;
  j["folk"] = {{"trials", folk.trials},       {"horizon", folk.horizon},
               {"tol", folk.tol},             {"rest_tol", folk.rest_tol},
               {"lyap_slack", folk.lyap_slack}, {"probe_radius", folk.probe.radius},
               {"probes", folk.probe.probes}, {"probe_horizon", folk.probe.horizon}};
  j["historic"] = {{"delta0", historic.delta0},
                   {"s_max", historic.s_max},
                   {"window_fraction", historic.window_fraction},
                   {"theta", historic.thresholds.theta},
                   {"theta_high", historic.thresholds.theta_high},
                   {"theta_conv", historic.thresholds.theta_conv}};
  return j;
}

}  // namespace replidyn
