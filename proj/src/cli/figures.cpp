#include "figures.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "app.hpp"
#include "csv.hpp"
#include "batchps/asymptotics.hpp"

namespace batchps::cli {

FigureData compute_figure_data(const ModelParams& p, std::uint64_t replications, std::uint64_t seed,
                               const std::string& hq_source) {
  SimConfig sc{.params = p};
  sc.replications = replications;
  sc.seed = seed;
  SummaryAccumulator acc(true);
  const auto stats = simulate_tagged(sc, [&](std::span<const TaggedBatchRecord> b) { acc.add(b); });
  if (static_cast<double>(stats.aborted) > 1e-4 * static_cast<double>(stats.records)) {
    throw SimulationGuard(fmt::format("{} of {} replications hit the event cap", stats.aborted, stats.records));
  }
  FigureData d{p, acc.take(), 0, {}, {}, hq_source};
  d.j_hi = std::max<std::size_t>(30, d.sim.j_sampled.quantile(0.999));
  d.analytic_j = j_pmf(p, d.j_hi);
  if (hq_source == "simulated") {
    d.hq = h_q(p, empirical_pmf(d.sim.j_sampled, "J (simulated)"), {1.0, false});
  } else {
    d.hq = h_q_analytic(p);
  }
  return d;
}

void write_j_figure(const std::filesystem::path& path, const FigureData& d) {
  const auto law = j_tail(d.params);
  CsvWriter csv(path, "j,sim_j,sim_i_b,analytic_j,approx_j");
  for (std::size_t j = 1; j <= d.j_hi; ++j) {
    csv.row(static_cast<std::uint64_t>(j), d.sim.j_sampled.pmf(j), d.sim.i_b.pmf(j), d.analytic_j.at(j),
            law(static_cast<double>(j)));
  }
}

void write_omega_figure(const std::filesystem::path& path, const FigureData& d) {
  const EmpiricalCcdf omega(d.sim.omega_values);
  const EmpiricalCcdf omega_hat(d.sim.omega_hat_values);
  const auto law = omega_tail(d.params, d.hq.value);
  const double x_max = omega.quantile(1.0 - 1e-5);
  CsvWriter csv(path, "x,ccdf_omega,ccdf_omega_hat,approx_omega");
  for (int i = 1; i <= 200; ++i) {
    const double x = x_max * i / 200.0;
    csv.row(x, omega(x), omega_hat(x), law(x));
  }
}

int cmd_figures(const ExperimentConfig& cfg) {
  const std::uint64_t reps = cfg.replications_or(cfg.profile == "full" ? 10'000'000 : 1'000'000);
  struct Pair {
    double rho_star, q;
    const char* j_fig;
    const char* omega_fig;
  };
  nlohmann::json summary;
  summary["replications"] = reps;
  summary["seed"] = cfg.seed;
  summary["hq_source"] = cfg.hq_source;
  for (const Pair& pr : {Pair{0.3, 0.3, "fig3.csv", "fig5.csv"}, Pair{0.7, 0.7, "fig4.csv", "fig6.csv"}}) {
    const auto p = params_from_load(pr.rho_star, pr.q);
    const auto d = compute_figure_data(p, reps, cfg.seed, cfg.hq_source);
    write_j_figure(cfg.out / pr.j_fig, d);
    write_omega_figure(cfg.out / pr.omega_fig, d);
    summary["pairs"].push_back({{"rho_star", pr.rho_star},
                                {"q", pr.q},
                                {"h_q", d.hq.value},
                                {"h_q_remainder_bound", d.hq.remainder_bound},
                                {"h_q_last_index", d.hq.last_index},
                                {"omega_tail_prefactor", omega_tail(p, d.hq.value).prefactor},
                                {"files", {pr.j_fig, pr.omega_fig}}});
    fmt::print("{} / {}: rho*={} q={} H_q={:.6g} (+- {:.2g}, {})\n", pr.j_fig, pr.omega_fig, pr.rho_star, pr.q,
               d.hq.value, d.hq.remainder_bound, cfg.hq_source);
  }
  std::ofstream(cfg.out / "figures_summary.json") << summary.dump(2) << '\n';
  return kOk;
}

}  // namespace batchps::cli
