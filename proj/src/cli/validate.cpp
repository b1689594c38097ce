#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "app.hpp"
#include "batchps/asymptotics.hpp"
#include "batchps/series.hpp"
#include "batchps/simulator.hpp"
#include "batchps/summary.hpp"

namespace batchps::cli {
namespace {

struct Check {
  std::string name;
  double analytic;
  double comparison;
  double tolerance;  // absolute bound on |analytic - comparison|
  bool pass;
};

class Report {
 public:
  explicit Report(const std::map<std::string, double>& overrides) : overrides_(overrides) {}

  void add(const std::string& name, double analytic, double comparison, double tolerance) {
    if (auto it = overrides_.find(name); it != overrides_.end()) tolerance = it->second;
    used_.insert(name);
    const bool pass = std::isfinite(analytic) && std::isfinite(comparison) &&
                      std::fabs(analytic - comparison) <= tolerance;
    checks_.push_back({name, analytic, comparison, tolerance, pass});
  }

  // Statistical check: tolerance is `sigmas` standard errors; the override
  // for these replaces the multiplier.
  void add_sigma(const std::string& name, double analytic, double comparison, double se, double sigmas = 3.0) {
    if (auto it = overrides_.find(name); it != overrides_.end()) sigmas = it->second;
    used_.insert(name);
    const double tol = sigmas * se;
    const bool pass = std::fabs(analytic - comparison) <= tol;
    checks_.push_back({name, analytic, comparison, tol, pass});
  }

  void reject_unknown_overrides() const {
    for (const auto& [name, v] : overrides_) {
      if (!used_.contains(name)) throw ConfigError(fmt::format("unknown tolerance name '{}'", name));
    }
  }

  const std::vector<Check>& checks() const { return checks_; }

 private:
  const std::map<std::string, double>& overrides_;
  std::set<std::string> used_;
  std::vector<Check> checks_;
};

}  // namespace

int cmd_validate(const ExperimentConfig& cfg) {
  const auto p = (cfg.rho || cfg.rho_star || cfg.q) ? cfg.params() : validate_params(0.21, 0.3);
  const auto k = spectral_constants(p);
  Report rep(cfg.tolerances);

  // Normalizations.
  rep.add("busy_lt_at_0", 1.0, busy_lt(p, 0.0), 1e-12);
  rep.add("residual_busy_lt_at_0", 1.0, residual_busy_lt(p, 0.0), 1e-12);
  rep.add("interdeparture_lt_at_0", 1.0, interdeparture_lt(p, 0.0), 1e-12);
  rep.add("jobs_pgf_at_1", 1.0, jobs_pgf(p, 1.0), 1e-12);
  rep.add("residual_jobs_pgf_at_1", 1.0, residual_jobs_pgf(p, 1.0), 1e-12);
  rep.add("batch_pgf_at_1", 1.0, batch_pgf(p, 1.0), 1e-12);
  rep.add("n0_pgf_at_1", 1.0, n0_pgf(p, 1.0), 1e-12);
  rep.add("phi_pgf_at_1", 1.0, phi_pgf(p, 1.0), 1e-12);
  rep.add("phi_equals_eta_times_batch", phi_pgf(p, 0.5), n0_pgf(p, 0.5) * batch_pgf(p, 0.5), 1e-13);

  // Spectral constants.
  rep.add("zeta_product", (1.0 + p.rho()) * (1.0 + p.rho()) / (p.q() * p.q()), k.zeta_plus * k.zeta_minus,
          1e-10 * k.zeta_plus * k.zeta_minus);
  const double t_q = cfg.inject_fault ? k.t_q * (1.0 + 1e-6) : k.t_q;
  rep.add("t_q_vs_transform", t_q, residual_busy_lt(p, k.sigma_plus), 1e-10);
  rep.add("u_star_vs_transform", k.u_star, interdeparture_lt(p, k.sigma_plus), 1e-10);
  rep.add("u_star_below_zeta_minus", 1.0, (k.u_star > 1.0 && k.u_star < k.zeta_minus) ? 1.0 : 0.0, 0.0);
  rep.add("r_q_below_pole", 1.0, k.r_q * (p.rho() + p.q()) < 1.0 ? 1.0 : 0.0, 0.0);
  rep.add("k_q_closed_vs_deconditioned", k.k_q, k_q_deconditioned(p), 1e-8 * k.k_q);
  rep.add("tail_prefactor_ratio", residual_vs_full_ratio(p),
          residual_busy_tail(p).prefactor / busy_tail(p).prefactor, 1e-10 * residual_vs_full_ratio(p));

  // Busy-period density by quadrature.
  boost::math::quadrature::exp_sinh<double> quad;
  const double mass = quad.integrate([&](double t) { return t > 0.0 ? busy_density(p, t) : 1.0 - p.q(); });
  const double mean = quad.integrate([&](double t) { return t > 0.0 ? t * busy_density(p, t) : 0.0; });
  rep.add("busy_density_mass", 1.0, mass, 1e-8);
  rep.add("busy_density_mean", busy_mean(p), mean, 1e-6);

  // Series engine.
  const std::size_t m_max = adaptive_m_max(p);
  const auto series = b_series(p, 200);
  rep.add("b_identity", 0.0, series.identity_residual, 1e-10);
  const auto by_sum = mtilde_pmf_tail_sum(p, 200, {1.0});
  const auto comp = mtilde_pmf_composition(p, 200, {1.0});
  double diff = 0.0;
  for (std::size_t i = 0; i < 200; ++i) diff = std::max(diff, std::fabs(by_sum.mass[i] - comp.mass[i]));
  rep.add("mtilde_two_routes", 0.0, diff, 1e-10);
  const auto m = m_pmf(p, 4 * m_max, {1.0});
  rep.add("m_mean", 1.0 / ((1.0 - p.q()) * (1.0 - p.rho_star())), m.mean(), 1e-6);
  rep.add("m_first_mass", (1.0 - p.q()) / (1.0 + p.rho()), m.mass[0], 1e-15);
  const auto jc = j_conditional_pmf(5, 40);
  rep.add("j_conditional_mean", 5.0 * 41.0 / 6.0, jc.mean(), 1e-12);
  const auto j = j_pmf(p, adaptive_j_max(p));
  rep.add("j_normalization", 1.0, 1.0 - j.tail_mass, 1e-8);

  // Simulation.
  const std::uint64_t reps = cfg.replications_or(100'000);
  const auto busy = simulate_busy_periods(p, reps, cfg.seed);
  MeanAccumulator t_acc;
  CountHistogram m_hist;
  for (const auto& bp : busy) {
    t_acc.add(bp.t);
    m_hist.add(bp.m);
  }
  rep.add_sigma("sim_busy_mean", busy_mean(p), t_acc.mean(), t_acc.std_error());
  rep.add_sigma("sim_m_first_mass", m.mass[0], m_hist.pmf(1), m_hist.pmf_std_error(1));
  SimConfig sc{.params = p};
  sc.replications = reps;
  sc.seed = cfg.seed;
  SummaryAccumulator acc(false);
  simulate_tagged(sc, [&](std::span<const TaggedBatchRecord> b) { acc.add(b); });
  const auto& s = acc.summary();
  rep.add("sim_record_invariants", 0.0, static_cast<double>(s.invariant_violations + s.aborted), 0.0);
  const auto mt = mtilde_pmf_composition(p, 4 * m_max, {1.0});
  rep.add_sigma("sim_mtilde_mean", mt.mean(), s.m_tilde_mean.mean(), s.m_tilde_mean.std_error());
  rep.add_sigma("sim_j_first_mass", j.mass[0], s.j_sampled.pmf(1), s.j_sampled.pmf_std_error(1));

  rep.reject_unknown_overrides();

  nlohmann::json out;
  std::size_t failures = 0;
  for (const auto& c : rep.checks()) {
    out["checks"].push_back({{"name", c.name},
                             {"analytic", c.analytic},
                             {"comparison", c.comparison},
                             {"tolerance", c.tolerance},
                             {"pass", c.pass}});
    if (!c.pass) {
      ++failures;
      out["failures"].push_back(c.name);
    }
    fmt::print("{:<32} {}\n", c.name, c.pass ? "pass" : "FAIL");
  }
  if (!out.contains("failures")) out["failures"] = nlohmann::json::array();
  out["params"] = {{"rho", p.rho()}, {"q", p.q()}, {"rho_star", p.rho_star()}};
  out["seed"] = cfg.seed;
  out["replications"] = reps;
  out["overall"] = failures == 0 ? "pass" : "fail";
  std::ofstream(cfg.out / "validation.json") << out.dump(2) << '\n';
  fmt::print("overall: {} ({} of {} checks failed)\n", failures == 0 ? "pass" : "fail", failures,
             rep.checks().size());
  return failures == 0 ? kOk : kValidationFailed;
}

}  // namespace batchps::cli
