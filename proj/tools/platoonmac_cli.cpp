#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "platoonmac/scenario.hpp"

using namespace platoonmac;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;

struct GlobalOpts {
  std::string config_path;
  std::string out_dir;
  std::string model = "both";
  std::uint64_t seed = 0;
  int workers = -1;
  bool seed_set = false;
};

int load_config(const GlobalOpts& g, ScenarioConfig& cfg) {
  std::string text;
  if (!g.config_path.empty()) {
    std::ifstream f(g.config_path);
    if (!f) {
      std::cerr << "error: cannot open config file " << g.config_path << "\n";
      return kExitConfig;
    }
    std::stringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }
  ConfigParseResult res = validate_config(text);
  if (!res.errors.empty()) {
    for (const auto& e : res.errors)
      std::cerr << "config error [" << e.field << "]: " << e.message << "\n";
    return kExitConfig;
  }
  cfg = *res.config;
  if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
  if (g.seed_set) cfg.seed = g.seed;
  if (g.workers >= 0) cfg.workers = g.workers;
  if (g.model == "fvd") cfg.model = ModelSelect::Fvd;
  else if (g.model == "movm") cfg.model = ModelSelect::Movm;
  else if (g.model == "both") cfg.model = ModelSelect::Both;
  else {
    std::cerr << "config error [--model]: expected fvd, movm or both\n";
    return kExitConfig;
  }
  return kExitOk;
}

int cmd_critical_delay(const ScenarioConfig& cfg) {
  std::cout << "headway_m,model,tau_cr_s,budget_ms,config_hash\n";
  const std::string h = cfg.hash();
  for (double y : cfg.headway_grid()) {
    for (int fvd = 0; fvd < 2; ++fvd) {
      if (fvd && cfg.model == ModelSelect::Movm) continue;
      if (!fvd && cfg.model == ModelSelect::Fvd) continue;
      PlatoonModel m = cfg.platoon;
      m.l = fvd ? (cfg.platoon.l > 0 ? cfg.platoon.l : 2.0) : 0.0;
      m.ovf.v0 = solve_v0_for_equilibrium(y, m.lead_speed, m.ovf.y_m,
                                          m.ovf.y_tilde);
      const Equilibrium eq = equilibrium(m, y);
      const double tc = critical_delay(m, eq);
      std::cout << y << ',' << (fvd ? "fvd" : "movm") << ',' << tc << ','
                << cfg.delay_budget_fraction * tc * 1e3 << ',' << h << '\n';
    }
  }
  return kExitOk;
}

int cmd_gap(const ScenarioConfig& cfg) {
  std::cout << "headway_m,gap_probability";
  for (RateKind k : cfg.rate_models) std::cout << ",lambda0_" << to_string(k);
  std::cout << ",config_hash\n";
  const std::string h = cfg.hash();
  for (double y : cfg.headway_grid()) {
    const double p = gap_probability(y, cfg.platoon.lead_speed, cfg.traffic.gap);
    std::cout << y << ',' << p;
    for (RateKind k : cfg.rate_models) {
      RateModel rm = cfg.traffic.rate;
      rm.kind = k;
      std::cout << ',' << lambda0(p, rm);
    }
    std::cout << ',' << h << '\n';
  }
  return kExitOk;
}

int cmd_analyze(const ScenarioConfig& cfg, double headway, bool dump_dist) {
  ScenarioConfig one = cfg;
  one.sweep_start = one.sweep_stop = headway;
  one.sweep_step = 1.0;
  const ScenarioResult r = run_pipeline_in_memory(one);
  if (r.cells.empty()) {
    for (const auto& d : r.diagnostics)
      std::cerr << "error [" << d.stage << " @ y*=" << d.headway
                << "]: " << d.message << "\n";
    return kExitNumeric;
  }
  std::cout << "headway_m,rate_model,n_cs,lambda0,lambda1,omega0,omega1,pb0,"
               "pb1,rho0,rho1,mean0_ms,mean1_ms,std0_ms,std1_ms,fit_shift_ms,"
               "fit_rate0_per_ms,fit_rate1_per_ms,config_hash\n";
  for (const auto& c : r.cells) {
    std::cout.precision(8);
    std::cout << c.headway << ',' << to_string(c.rate) << ',' << c.n_cs << ','
              << c.lambda0 << ',' << cfg.traffic.lambda1 << ',' << c.fp.omega0
              << ',' << c.fp.omega1 << ',' << c.fp.pb0 << ',' << c.fp.pb1
              << ',' << c.fp.rho0 << ',' << c.fp.rho1 << ','
              << c.moments[0].mean_us * 1e-3 << ','
              << c.moments[1].mean_us * 1e-3 << ','
              << std::sqrt(c.moments[0].variance_us2) * 1e-3 << ','
              << std::sqrt(c.moments[1].variance_us2) * 1e-3 << ','
              << c.fit[0].shift_us * 1e-3 << ',' << c.fit[0].rate_per_ms << ','
              << c.fit[1].rate_per_ms << ',' << r.config_hash << '\n';
  }
  if (dump_dist) {
    std::filesystem::create_directories(cfg.output_dir);
    for (const auto& c : r.cells)
      for (int ac = 0; ac < 2; ++ac) {
        std::ostringstream name;
        name << "dist_" << to_string(c.rate) << "_ac" << ac << ".csv";
        std::ofstream f(std::filesystem::path(cfg.output_dir) / name.str());
        f << "delay_us,pmf\n";
        f.precision(12);
        for (const auto& [x, p] : c.dist[ac].atoms) f << x << ',' << p << '\n';
      }
  }
  return kExitOk;
}

int cmd_simulate(const ScenarioConfig& cfg, double headway, int n_reps) {
  const double p = gap_probability(headway, cfg.platoon.lead_speed,
                                   cfg.traffic.gap);
  RateModel rm = cfg.traffic.rate;
  rm.kind = cfg.rate_models.empty() ? RateKind::Linear : cfg.rate_models[0];
  SimConfig sc;
  sc.n_vehicles = contender_count(headway, cfg.edca.cs_range,
                                  cfg.platoon.n_vehicles > 1
                                      ? cfg.platoon.n_vehicles
                                      : 0);
  sc.headway = headway;
  sc.lambda0 = lambda0(p, rm);
  sc.lambda1 = cfg.traffic.lambda1;
  sc.duration_s = cfg.des_duration_s;
  sc.warmup_s = cfg.des_warmup_s;
  sc.seed = cfg.seed;
  sc.edca = cfg.edca;
  sc.record_packets = true;

  std::filesystem::path dir = cfg.output_dir;
  std::filesystem::create_directories(dir);

  std::ofstream packets(dir / "packets.csv");
  packets << "replication,station,ac,arrival_us,hol_us,done_us,outcome\n";
  std::ofstream agg(dir / "aggregate.csv");
  agg << "replication,ac,samples,mean_access_ms,std_access_ms,mean_sojourn_ms,"
         "arrivals,transmissions,external_collisions,virtual_collisions,"
         "dropped,backlog,busy_fraction\n";
  agg.precision(8);
  for (int rep = 0; rep < n_reps; ++rep) {
    SimConfig rc = sc;
    rc.seed = sc.seed + static_cast<std::uint64_t>(rep);
    const SimStats st = run_simulation(rc);
    for (const auto& pk : st.packets)
      packets << rep << ',' << pk.station << ',' << pk.ac << ','
              << pk.arrival_us << ',' << pk.hol_us << ',' << pk.done_us << ','
              << pk.outcome << '\n';
    for (int ac = 0; ac < 2; ++ac) {
      const AcStats& a = st.ac[ac];
      double soj = 0;
      for (double v : a.sojourn_us) soj += v;
      if (!a.sojourn_us.empty()) soj /= a.sojourn_us.size();
      agg << rep << ',' << ac << ',' << a.access_us.size() << ','
          << a.mean_us() * 1e-3 << ',' << a.std_us() * 1e-3 << ','
          << soj * 1e-3 << ',' << a.arrivals << ',' << a.transmissions << ','
          << a.external_collisions << ',' << a.virtual_collisions << ','
          << a.dropped << ',' << a.backlog << ',' << st.busy_fraction << '\n';
    }
  }
  std::ofstream manifest(dir / "run_manifest.txt");
  manifest << "# simulation run manifest\n";
  manifest << "config_hash = " << cfg.hash() << "\n";
  manifest << "rng = mt19937_64 (per-station substreams via splitmix64)\n";
  manifest << "headway_m = " << headway << "\n";
  manifest << "n_vehicles = " << sc.n_vehicles << "\n";
  manifest << "lambda0 = " << sc.lambda0 << "\n";
  manifest << "lambda1 = " << sc.lambda1 << "\n";
  manifest << "seed = " << sc.seed << "\n";
  manifest << "replications = " << n_reps << "\n";
  manifest << "duration_s = " << sc.duration_s << "\n";
  manifest << "warmup_s = " << sc.warmup_s << "\n";
  manifest << cfg.serialize();
  std::cout << "wrote " << (dir / "packets.csv").string() << ", "
            << (dir / "aggregate.csv").string() << ", "
            << (dir / "run_manifest.txt").string() << "\n";
  return kExitOk;
}

int cmd_sweep(const ScenarioConfig& cfg) {
  const ScenarioResult r = run_pipeline(cfg);
  for (const auto& d : r.diagnostics)
    std::cerr << "cell diagnostic [" << d.stage << " @ y*=" << d.headway
              << "]: " << d.message << "\n";
  std::cout << "wrote figure CSVs to " << cfg.output_dir << " (config hash "
            << r.config_hash << ", " << r.cells.size() << " cells, "
            << r.diagnostics.size() << " failed)\n";
  // a sweep that produced nothing is a numeric failure
  return r.cells.empty() && !cfg.rate_models.empty() ? kExitNumeric : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Platoon stability and 802.11p EDCA access-delay analysis"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "config file (key = value lines)");
  app.add_option("--out", g.out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", g.seed, "simulation master seed");
  app.add_option("--workers", g.workers, "worker thread count (0 = auto)");
  app.add_option("--model", g.model, "fvd, movm or both")
      ->check(CLI::IsMember({"fvd", "movm", "both"}));

  auto* c_crit = app.add_subcommand("critical-delay",
                                    "critical delay over the headway grid");
  auto* c_gap = app.add_subcommand(
      "gap", "gap-acceptance probability and packet rates over the grid");
  auto* c_analyze = app.add_subcommand(
      "analyze", "analytic fixed point, delay distribution and fit");
  double headway = 5.0;
  bool dump_dist = false;
  c_analyze->add_option("--headway", headway, "equilibrium headway (m)");
  c_analyze->add_flag("--dump-dist", dump_dist,
                      "write per-AC distribution CSVs to the output dir");
  auto* c_sim = app.add_subcommand("simulate", "discrete-event simulation run");
  double sim_headway = 5.0;
  int n_reps = 1;
  c_sim->add_option("--headway", sim_headway, "equilibrium headway (m)");
  c_sim->add_option("--replications", n_reps, "independent replications");
  auto* c_sweep = app.add_subcommand(
      "sweep", "full pipeline over the headway grid, one CSV per figure");
  auto* c_validate =
      app.add_subcommand("validate", "parse and validate the config file");

  CLI11_PARSE(app, argc, argv);
  g.seed_set = seed_opt->count() > 0;

  ScenarioConfig cfg;
  const int rc = load_config(g, cfg);
  if (c_validate->parsed()) {
    if (rc == kExitOk) std::cout << "config ok (hash " << cfg.hash() << ")\n";
    return rc;
  }
  if (rc != kExitOk) return rc;

  try {
    if (c_crit->parsed()) return cmd_critical_delay(cfg);
    if (c_gap->parsed()) return cmd_gap(cfg);
    if (c_analyze->parsed()) return cmd_analyze(cfg, headway, dump_dist);
    if (c_sim->parsed()) return cmd_simulate(cfg, sim_headway, n_reps);
    if (c_sweep->parsed()) return cmd_sweep(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
