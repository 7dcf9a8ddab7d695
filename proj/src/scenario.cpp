#include "platoonmac/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace platoonmac {

std::vector<double> ScenarioConfig::headway_grid() const {
  std::vector<double> g;
  if (!(sweep_step > 0)) return g;
  for (double y = sweep_start; y <= sweep_stop + 1e-9 * sweep_step;
       y += sweep_step)
    g.push_back(y);
  return g;
}

std::string ScenarioConfig::serialize() const {
  std::ostringstream o;
  o.precision(17);
  o << "platoon.a = " << platoon.a << "\n";
  o << "platoon.l = " << platoon.l << "\n";
  o << "platoon.y_m = " << platoon.ovf.y_m << "\n";
  o << "platoon.y_tilde = " << platoon.ovf.y_tilde << "\n";
  o << "platoon.lead_speed = " << platoon.lead_speed << "\n";
  o << "platoon.n_vehicles = " << platoon.n_vehicles << "\n";
  o << "traffic.alpha = " << traffic.gap.alpha << "\n";
  o << "traffic.beta0 = " << traffic.gap.beta0 << "\n";
  o << "traffic.k = " << traffic.rate.k << "\n";
  o << "traffic.lambda1 = " << traffic.lambda1 << "\n";
  o << "traffic.rate_models = ";
  for (std::size_t i = 0; i < rate_models.size(); ++i)
    o << (i ? "," : "") << to_string(rate_models[i]);
  o << "\n";
  o << "edca.cw_min0 = " << edca.cw_min[0] << "\n";
  o << "edca.cw_max0 = " << edca.cw_max[0] << "\n";
  o << "edca.cw_min1 = " << edca.cw_min[1] << "\n";
  o << "edca.cw_max1 = " << edca.cw_max[1] << "\n";
  o << "edca.aifsn0 = " << edca.aifsn[0] << "\n";
  o << "edca.aifsn1 = " << edca.aifsn[1] << "\n";
  o << "edca.retry_limit = " << edca.retry_limit << "\n";
  o << "edca.sifs_us = " << edca.sifs * 1e6 << "\n";
  o << "edca.slot_us = " << edca.slot * 1e6 << "\n";
  o << "edca.phy_header_bits = " << edca.phy_header_bits << "\n";
  o << "edca.mac_header_bits = " << edca.mac_header_bits << "\n";
  o << "edca.basic_rate = " << edca.basic_rate << "\n";
  o << "edca.data_rate = " << edca.data_rate << "\n";
  o << "edca.mean_payload_bytes = " << edca.mean_payload_bytes << "\n";
  o << "edca.prop_delay_us = " << edca.prop_delay * 1e6 << "\n";
  o << "edca.tx_range = " << edca.tx_range << "\n";
  o << "edca.cs_range = " << edca.cs_range << "\n";
  o << "sweep.start = " << sweep_start << "\n";
  o << "sweep.stop = " << sweep_stop << "\n";
  o << "sweep.step = " << sweep_step << "\n";
  o << "report.delay_budget_fraction = " << delay_budget_fraction << "\n";
  o << "report.model = "
    << (model == ModelSelect::Fvd ? "fvd"
                                  : model == ModelSelect::Movm ? "movm" : "both")
    << "\n";
  o << "report.workers = " << workers << "\n";
  o << "des.enabled = " << (des_enabled ? 1 : 0) << "\n";
  o << "des.duration_s = " << des_duration_s << "\n";
  o << "des.warmup_s = " << des_warmup_s << "\n";
  o << "des.replications = " << des_replications << "\n";
  o << "des.seed = " << seed << "\n";
  return o.str();
}

std::string ScenarioConfig::hash() const {
  const std::string s = serialize();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct Parser {
  ScenarioConfig cfg;
  std::vector<ConfigError>& errors;

  void err(const std::string& field, const std::string& msg) {
    errors.push_back({field, msg});
  }
  bool as_double(const std::string& field, const std::string& v, double& out) {
    try {
      std::size_t pos = 0;
      out = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return true;
    } catch (...) {
      err(field, "not a number: '" + v + "'");
      return false;
    }
  }
  bool as_int(const std::string& field, const std::string& v, int& out) {
    try {
      std::size_t pos = 0;
      out = std::stoi(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return true;
    } catch (...) {
      err(field, "not an integer: '" + v + "'");
      return false;
    }
  }

  void apply(const std::string& key, const std::string& v) {
    double d;
    int i;
    if (key == "platoon.a") { if (as_double(key, v, d)) cfg.platoon.a = d; }
    else if (key == "platoon.l") { if (as_double(key, v, d)) cfg.platoon.l = d; }
    else if (key == "platoon.y_m") { if (as_double(key, v, d)) cfg.platoon.ovf.y_m = d; }
    else if (key == "platoon.y_tilde") { if (as_double(key, v, d)) cfg.platoon.ovf.y_tilde = d; }
    else if (key == "platoon.lead_speed") { if (as_double(key, v, d)) cfg.platoon.lead_speed = d; }
    else if (key == "platoon.n_vehicles") { if (as_int(key, v, i)) cfg.platoon.n_vehicles = i; }
    else if (key == "traffic.alpha") { if (as_double(key, v, d)) cfg.traffic.gap.alpha = d; }
    else if (key == "traffic.beta0") { if (as_double(key, v, d)) cfg.traffic.gap.beta0 = d; }
    else if (key == "traffic.k") { if (as_double(key, v, d)) cfg.traffic.rate.k = d; }
    else if (key == "traffic.lambda1") { if (as_double(key, v, d)) cfg.traffic.lambda1 = d; }
    else if (key == "traffic.rate_models") {
      cfg.rate_models.clear();
      std::stringstream ss(v);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        try {
          cfg.rate_models.push_back(rate_kind_from_string(tok));
        } catch (const std::exception& e) {
          err(key, e.what());
        }
      }
    }
    else if (key == "edca.cw_min0") { if (as_int(key, v, i)) cfg.edca.cw_min[0] = i; }
    else if (key == "edca.cw_max0") { if (as_int(key, v, i)) cfg.edca.cw_max[0] = i; }
    else if (key == "edca.cw_min1") { if (as_int(key, v, i)) cfg.edca.cw_min[1] = i; }
    else if (key == "edca.cw_max1") { if (as_int(key, v, i)) cfg.edca.cw_max[1] = i; }
    else if (key == "edca.aifsn0") { if (as_int(key, v, i)) cfg.edca.aifsn[0] = i; }
    else if (key == "edca.aifsn1") { if (as_int(key, v, i)) cfg.edca.aifsn[1] = i; }
    else if (key == "edca.retry_limit") { if (as_int(key, v, i)) cfg.edca.retry_limit = i; }
    else if (key == "edca.sifs_us") { if (as_double(key, v, d)) cfg.edca.sifs = d * 1e-6; }
    else if (key == "edca.slot_us") { if (as_double(key, v, d)) cfg.edca.slot = d * 1e-6; }
    else if (key == "edca.phy_header_bits") { if (as_double(key, v, d)) cfg.edca.phy_header_bits = d; }
    else if (key == "edca.mac_header_bits") { if (as_double(key, v, d)) cfg.edca.mac_header_bits = d; }
    else if (key == "edca.basic_rate") { if (as_double(key, v, d)) cfg.edca.basic_rate = d; }
    else if (key == "edca.data_rate") { if (as_double(key, v, d)) cfg.edca.data_rate = d; }
    else if (key == "edca.mean_payload_bytes") { if (as_double(key, v, d)) cfg.edca.mean_payload_bytes = d; }
    else if (key == "edca.prop_delay_us") { if (as_double(key, v, d)) cfg.edca.prop_delay = d * 1e-6; }
    else if (key == "edca.tx_range") { if (as_double(key, v, d)) cfg.edca.tx_range = d; }
    else if (key == "edca.cs_range") { if (as_double(key, v, d)) cfg.edca.cs_range = d; }
    else if (key == "sweep.start") { if (as_double(key, v, d)) cfg.sweep_start = d; }
    else if (key == "sweep.stop") { if (as_double(key, v, d)) cfg.sweep_stop = d; }
    else if (key == "sweep.step") { if (as_double(key, v, d)) cfg.sweep_step = d; }
    else if (key == "report.delay_budget_fraction") { if (as_double(key, v, d)) cfg.delay_budget_fraction = d; }
    else if (key == "report.model") {
      if (v == "fvd") cfg.model = ModelSelect::Fvd;
      else if (v == "movm") cfg.model = ModelSelect::Movm;
      else if (v == "both") cfg.model = ModelSelect::Both;
      else err(key, "expected fvd, movm or both, got '" + v + "'");
    }
    else if (key == "report.output_dir") { cfg.output_dir = v; }
    else if (key == "report.workers") { if (as_int(key, v, i)) cfg.workers = i; }
    else if (key == "des.enabled") {
      if (v == "1" || v == "true") cfg.des_enabled = true;
      else if (v == "0" || v == "false") cfg.des_enabled = false;
      else err(key, "expected a boolean, got '" + v + "'");
    }
    else if (key == "des.duration_s") { if (as_double(key, v, d)) cfg.des_duration_s = d; }
    else if (key == "des.warmup_s") { if (as_double(key, v, d)) cfg.des_warmup_s = d; }
    else if (key == "des.replications") { if (as_int(key, v, i)) cfg.des_replications = i; }
    else if (key == "des.seed") {
      try {
        cfg.seed = std::stoull(v);
      } catch (...) {
        err(key, "not an unsigned integer: '" + v + "'");
      }
    }
    else err(key, "unknown key");
  }
};

}  // namespace

ConfigParseResult validate_config(const std::string& text) {
  ConfigParseResult out;
  Parser p{ScenarioConfig{}, out.errors};

  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      out.errors.push_back({"line " + std::to_string(lineno),
                            "expected 'key = value': '" + line + "'"});
      continue;
    }
    p.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }

  // invariant checks, aggregated with field paths
  auto check = [&](const char* field, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      out.errors.push_back({field, e.what()});
    }
  };
  ScenarioConfig& c = p.cfg;
  check("platoon", [&] { c.platoon.validate(); });
  check("edca", [&] { c.edca.validate(); });
  check("traffic.k", [&] { c.traffic.rate.validate(); });
  check("traffic.lambda1", [&] {
    if (!(c.traffic.lambda1 > 0))
      throw std::invalid_argument("lambda1 must be > 0");
    if (c.traffic.lambda1 * c.edca.slot > 1.0)
      throw std::invalid_argument("lambda1 * slot exceeds 1 (p_a1 not a probability)");
  });
  check("sweep", [&] {
    if (c.headway_grid().empty())
      throw std::invalid_argument("empty headway grid");
    if (!(c.sweep_start > 0) || c.sweep_stop >= 2.0 * c.edca.cs_range)
      throw std::invalid_argument("grid must lie inside (0, 2 cs_range)");
  });
  check("report.delay_budget_fraction", [&] {
    if (!(c.delay_budget_fraction > 0) || c.delay_budget_fraction > 1.0)
      throw std::invalid_argument("fraction must be in (0, 1]");
  });
  check("des", [&] {
    if (c.des_enabled) {
      if (!(c.des_duration_s > 0) || c.des_warmup_s < 0 ||
          c.des_warmup_s >= c.des_duration_s)
        throw std::invalid_argument("need 0 <= warmup < duration");
      if (c.des_replications < 1)
        throw std::invalid_argument("replications must be >= 1");
    }
  });
  if (c.rate_models.empty() && out.errors.empty()) {
    // legal: only the critical-delay stage runs
  }
  if (out.errors.empty()) out.config = std::move(p.cfg);
  return out;
}

namespace {

PlatoonModel model_for(const ScenarioConfig& cfg, bool fvd, double y_star) {
  PlatoonModel m = cfg.platoon;
  m.l = fvd ? (cfg.platoon.l > 0 ? cfg.platoon.l : 2.0) : 0.0;
  m.ovf.v0 = solve_v0_for_equilibrium(y_star, m.lead_speed, m.ovf.y_m,
                                      m.ovf.y_tilde);
  return m;
}

CellResult compute_cell(const ScenarioConfig& cfg, double y, RateKind kind,
                        const double budget_fvd, const double budget_movm) {
  CellResult c;
  c.headway = y;
  c.rate = kind;
  c.gap_p = gap_probability(y, cfg.platoon.lead_speed, cfg.traffic.gap);
  RateModel rm = cfg.traffic.rate;
  rm.kind = kind;
  c.lambda0 = lambda0(c.gap_p, rm);
  c.n_cs = contender_count(y, cfg.edca.cs_range, cfg.platoon.n_vehicles > 1
                                                     ? cfg.platoon.n_vehicles
                                                     : 0);
  c.fp = solve_fixed_point(c.lambda0, cfg.traffic.lambda1, c.n_cs, cfg.edca);
  for (int ac = 0; ac < 2; ++ac) {
    c.moments[ac] = access_delay_moments(
        cfg.edca, ac, ac == 0 ? c.fp.pb0 : c.fp.pb1, c.fp.omega0);
    c.dist[ac] = delay_pgf(c.fp, cfg.edca, ac);
    c.fit[ac] = cdf_fit(c.dist[ac], slot_timing(cfg.edca).ttr_us);
    if (budget_fvd > 0) {
      c.reliability_fvd[ac] = reliability_fitted(c.fit[ac], budget_fvd);
      c.reliability_fvd_exact[ac] = reliability_exact(c.dist[ac], budget_fvd);
    }
    if (budget_movm > 0) {
      c.reliability_movm[ac] = reliability_fitted(c.fit[ac], budget_movm);
      c.reliability_movm_exact[ac] =
          reliability_exact(c.dist[ac], budget_movm);
    }
  }
  return c;
}

void atomic_write(const std::filesystem::path& path, const std::string& body) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << body;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

ScenarioResult run_pipeline_in_memory(const ScenarioConfig& cfg) {
  ScenarioResult r;
  r.config_hash = cfg.hash();
  const std::vector<double> grid = cfg.headway_grid();

  const bool want_fvd = cfg.model != ModelSelect::Movm;
  const bool want_movm = cfg.model != ModelSelect::Fvd;

  struct Task {
    double y;
    std::size_t rate_idx;  // SIZE_MAX marks the dynamics-only task
  };
  std::vector<Task> tasks;
  std::vector<double> budget_fvd(grid.size(), 0), budget_movm(grid.size(), 0);

  // dynamics first: budgets feed every cell of the same headway
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double y = grid[gi];
    for (int fvd = 0; fvd < 2; ++fvd) {
      if (fvd && !want_fvd) continue;
      if (!fvd && !want_movm) continue;
      try {
        const PlatoonModel m = model_for(cfg, fvd != 0, y);
        const Equilibrium eq = equilibrium(m, y);
        DynamicsResult d;
        d.headway = y;
        d.fvd = fvd != 0;
        d.tau_cr = critical_delay(m, eq);
        d.budget_s = cfg.delay_budget_fraction * d.tau_cr;
        d.v_prime = eq.v_prime;
        d.d_tilde = eq.d_tilde;
        r.dynamics.push_back(d);
        (fvd ? budget_fvd : budget_movm)[gi] = d.budget_s;
      } catch (const std::exception& e) {
        r.diagnostics.push_back({y, fvd ? "dynamics/fvd" : "dynamics/movm",
                                 e.what()});
      }
    }
    for (std::size_t ri = 0; ri < cfg.rate_models.size(); ++ri)
      tasks.push_back({y, ri});
  }

  std::vector<CellResult> cells(tasks.size());
  std::vector<char> ok(tasks.size(), 0);
  std::mutex diag_mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      const std::size_t gi = static_cast<std::size_t>(
          std::llround((t.y - cfg.sweep_start) / cfg.sweep_step));
      try {
        cells[i] = compute_cell(cfg, t.y, cfg.rate_models[t.rate_idx],
                                budget_fvd[gi], budget_movm[gi]);
        ok[i] = 1;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(diag_mu);
        r.diagnostics.push_back(
            {t.y, std::string("edca/") + to_string(cfg.rate_models[t.rate_idx]),
             e.what()});
      }
    }
  };
  unsigned nw = cfg.workers > 0 ? cfg.workers
                                : std::max(1u, std::thread::hardware_concurrency());
  nw = std::min<unsigned>(nw, std::max<std::size_t>(tasks.size(), 1));
  std::vector<std::thread> pool;
  for (unsigned i = 0; i + 1 < nw; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (ok[i]) r.cells.push_back(std::move(cells[i]));
  std::sort(r.cells.begin(), r.cells.end(),
            [](const CellResult& a, const CellResult& b) {
              if (a.headway != b.headway) return a.headway < b.headway;
              return static_cast<int>(a.rate) < static_cast<int>(b.rate);
            });
  std::sort(r.dynamics.begin(), r.dynamics.end(),
            [](const DynamicsResult& a, const DynamicsResult& b) {
              if (a.headway != b.headway) return a.headway < b.headway;
              return a.fvd < b.fvd;
            });
  return r;
}

void write_reports(const ScenarioResult& r, const ScenarioConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  const std::string& h = r.config_hash;

  auto fmt = [](double v) {
    std::ostringstream o;
    o.precision(10);
    o << v;
    return o.str();
  };

  {
    std::ostringstream o;
    o << "headway_m,model,tau_cr_s,budget_ms,v_prime,d_tilde,config_hash\n";
    for (const auto& d : r.dynamics)
      o << d.headway << ',' << (d.fvd ? "fvd" : "movm") << ','
        << fmt(d.tau_cr) << ',' << fmt(d.budget_s * 1e3) << ','
        << fmt(d.v_prime) << ',' << fmt(d.d_tilde) << ',' << h << '\n';
    atomic_write(dir / "fig2_critical_delay.csv", o.str());
  }
  {
    std::ostringstream mean_csv, std_csv;
    mean_csv << "headway_m,rate_model,ac,mean_delay_ms,config_hash\n";
    std_csv << "headway_m,rate_model,ac,std_delay_ms,config_hash\n";
    for (const auto& c : r.cells)
      for (int ac = 0; ac < 2; ++ac) {
        mean_csv << c.headway << ',' << to_string(c.rate) << ',' << ac << ','
                 << fmt(c.moments[ac].mean_us * 1e-3) << ',' << h << '\n';
        std_csv << c.headway << ',' << to_string(c.rate) << ',' << ac << ','
                << fmt(std::sqrt(c.moments[ac].variance_us2) * 1e-3) << ','
                << h << '\n';
      }
    atomic_write(dir / "fig3_mean_delay.csv", mean_csv.str());
    atomic_write(dir / "fig4_std.csv", std_csv.str());
  }
  {
    std::ostringstream o;
    o << "headway_m,rate_model,ac,delay_us,pmf,cdf,fit_shift_ms,fit_rate_per_ms,"
         "config_hash\n";
    for (const auto& c : r.cells)
      for (int ac = 0; ac < 2; ++ac) {
        double cum = 0;
        for (const auto& [x, pr] : c.dist[ac].atoms) {
          cum += pr;
          o << c.headway << ',' << to_string(c.rate) << ',' << ac << ',' << x
            << ',' << fmt(pr) << ',' << fmt(cum) << ','
            << fmt(c.fit[ac].shift_us * 1e-3) << ','
            << fmt(c.fit[ac].rate_per_ms) << ',' << h << '\n';
        }
      }
    atomic_write(dir / "fig5_cdf.csv", o.str());
  }
  auto reliability_csv = [&](bool fvd) {
    std::ostringstream o;
    o << "headway_m,rate_model,ac,budget_ms,reliability_fitted,"
         "reliability_exact,config_hash\n";
    for (const auto& c : r.cells) {
      double budget = 0;
      for (const auto& d : r.dynamics)
        if (d.fvd == fvd && std::abs(d.headway - c.headway) < 1e-9)
          budget = d.budget_s;
      if (budget <= 0) continue;
      for (int ac = 0; ac < 2; ++ac)
        o << c.headway << ',' << to_string(c.rate) << ',' << ac << ','
          << fmt(budget * 1e3) << ','
          << fmt(fvd ? c.reliability_fvd[ac] : c.reliability_movm[ac]) << ','
          << fmt(fvd ? c.reliability_fvd_exact[ac]
                     : c.reliability_movm_exact[ac])
          << ',' << h << '\n';
    }
    return o.str();
  };
  if (cfg.model != ModelSelect::Movm)
    atomic_write(dir / "fig7_reliability_fvd.csv", reliability_csv(true));
  if (cfg.model != ModelSelect::Fvd)
    atomic_write(dir / "fig8_reliability_movm.csv", reliability_csv(false));
  {
    std::ostringstream o;
    o << "rate_model,ac,slope_per_ms_per_m,intercept_per_ms,config_hash\n";
    for (RateKind kind : cfg.rate_models) {
      for (int ac = 0; ac < 2; ++ac) {
        std::vector<double> ys, rates;
        for (const auto& c : r.cells)
          if (c.rate == kind) {
            ys.push_back(c.headway);
            rates.push_back(c.fit[ac].rate_per_ms);
          }
        if (ys.size() < 3) continue;
        try {
          const LinearFit f = headway_rate_regression(ys, rates);
          o << to_string(kind) << ',' << ac << ',' << fmt(f.slope) << ','
            << fmt(f.intercept) << ',' << h << '\n';
        } catch (const std::exception&) {
          // rank-deficient column: omit the row
        }
      }
    }
    atomic_write(dir / "table5_regression.csv", o.str());
  }
}

ScenarioResult run_pipeline(const ScenarioConfig& cfg) {
  ScenarioResult r = run_pipeline_in_memory(cfg);
  write_reports(r, cfg);

  if (cfg.des_enabled) {
    std::ostringstream o;
    o << "headway_m,rate_model,ac,sim_mean_ms,analytic_mean_ms,delta_pct,"
         "sim_std_ms,analytic_std_ms,config_hash\n";
    for (const auto& c : r.cells) {
      if (c.rate != cfg.rate_models.front()) continue;
      SimConfig sc;
      sc.n_vehicles = c.n_cs;
      sc.headway = c.headway;
      sc.lambda0 = c.lambda0;
      sc.lambda1 = cfg.traffic.lambda1;
      sc.duration_s = cfg.des_duration_s;
      sc.warmup_s = cfg.des_warmup_s;
      sc.seed = cfg.seed;
      sc.edca = cfg.edca;
      try {
        // pool the samples of all replications
        std::vector<double> pooled[2];
        for (int rep = 0; rep < cfg.des_replications; ++rep) {
          SimConfig rc = sc;
          rc.seed = sc.seed + static_cast<std::uint64_t>(rep);
          const SimStats st = run_simulation(rc);
          for (int ac = 0; ac < 2; ++ac)
            pooled[ac].insert(pooled[ac].end(), st.ac[ac].access_us.begin(),
                              st.ac[ac].access_us.end());
        }
        for (int ac = 0; ac < 2; ++ac) {
          const double n = static_cast<double>(pooled[ac].size());
          double s = 0;
          for (double v : pooled[ac]) s += v;
          const double mean = n > 0 ? s / n : 0;
          double q = 0;
          for (double v : pooled[ac]) q += (v - mean) * (v - mean);
          const double sim_std = n > 1 ? std::sqrt(q / (n - 1)) : 0;
          const double amean = c.moments[ac].mean_us;
          o << c.headway << ',' << to_string(c.rate) << ',' << ac << ','
            << mean * 1e-3 << ',' << amean * 1e-3 << ','
            << (amean > 0 ? 100.0 * (mean - amean) / amean : 0) << ','
            << sim_std * 1e-3 << ','
            << std::sqrt(c.moments[ac].variance_us2) * 1e-3 << ','
            << r.config_hash << '\n';
        }
      } catch (const std::exception& e) {
        r.diagnostics.push_back({c.headway, "des", e.what()});
      }
    }
    std::filesystem::path dir = cfg.output_dir;
    atomic_write(dir / "des_comparison.csv", o.str());
  }
  return r;
}

}  // namespace platoonmac
