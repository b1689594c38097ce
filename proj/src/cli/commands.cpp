#include <algorithm>
#include <cmath>
#include <iostream>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "app.hpp"
#include "csv.hpp"
#include "batchps/asymptotics.hpp"
#include "batchps/series.hpp"

namespace batchps::cli {
namespace {

void write_pmf(const std::filesystem::path& path, const DiscretePmf& pmf, const TailAsymptote* law) {
  CsvWriter csv(path, "index,value,asymptote,ratio");
  for (std::size_t i = 0; i < pmf.mass.size(); ++i) {
    const std::size_t k = pmf.offset + i;
    const double v = pmf.mass[i];
    const double a = law ? (*law)(static_cast<double>(k)) : std::nan("");
    csv.row(static_cast<std::uint64_t>(k), v, a, law ? v / a : std::nan(""));
  }
}

}  // namespace

int cmd_constants(const ExperimentConfig& cfg) {
  const auto p = cfg.params();
  const auto k = spectral_constants(p);
  const std::vector<std::pair<const char*, double>> rows = {
      {"rho", p.rho()},
      {"q", p.q()},
      {"rho_star", p.rho_star()},
      {"sigma_plus", k.sigma_plus},
      {"sigma_minus", k.sigma_minus},
      {"zeta_minus", k.zeta_minus},
      {"zeta_plus", k.zeta_plus},
      {"t_q", k.t_q},
      {"s_q", k.s_q},
      {"l_q", k.l_q},
      {"u_star", k.u_star},
      {"r_q", k.r_q},
      {"kappa_q", k.kappa_q},
      {"k_q", k.k_q},
      {"mean_busy_period", busy_mean(p)},
      {"busy_tail_prefactor", busy_tail(p).prefactor},
      {"m_tail_prefactor", m_tail(p).prefactor},
      {"residual_busy_tail_prefactor", residual_busy_tail(p).prefactor},
      {"mtilde_tail_prefactor", mtilde_tail(p).prefactor},
      {"j_tail_prefactor", j_tail(p).prefactor},
      {"residual_vs_full_ratio", residual_vs_full_ratio(p)},
  };
  for (const auto& [name, v] : rows) fmt::print("{:<30} {}\n", name, num(v));
  if (cfg.out_given) {
    CsvWriter csv(cfg.out / "constants.csv", "name,value");
    for (const auto& [name, v] : rows) csv.row(std::string(name), v);
  }
  return kOk;
}

int cmd_pmf(const ExperimentConfig& cfg) {
  const auto p = cfg.params();
  const std::size_t m_max = cfg.m_max.value_or(adaptive_m_max(p));
  const std::size_t j_max = cfg.j_max.value_or(adaptive_j_max(p));
  const TruncationPolicy policy{cfg.tolerances.contains("max_tail") ? cfg.tolerances.at("max_tail") : 1e-10};

  // M has a lighter envelope than M~, so the same order suffices.
  const auto m = m_pmf(p, m_max, policy);
  const auto by_sum = mtilde_pmf_tail_sum(p, m_max, policy);
  const auto comp = mtilde_pmf_composition(p, m_max, policy);
  JPmfOptions jo;
  jo.policy = TruncationPolicy{cfg.tolerances.contains("j_max_loss") ? cfg.tolerances.at("j_max_loss") : 1e-8};
  const auto j = j_pmf(p, j_max, jo);
  const auto cond = j_conditional_pmf(cfg.cond_b, cfg.cond_m);

  const auto lm = m_tail(p);
  const auto lt = mtilde_tail(p);
  const auto lj = j_tail(p);
  write_pmf(cfg.out / "m.csv", m, &lm);
  write_pmf(cfg.out / "mtilde_tail_sum.csv", by_sum, &lt);
  write_pmf(cfg.out / "mtilde_composition.csv", comp, &lt);
  write_pmf(cfg.out / "j.csv", j, &lj);
  write_pmf(cfg.out / fmt::format("j_given_b{}_m{}.csv", cfg.cond_b, cfg.cond_m), cond, nullptr);

  double diff = 0.0;
  for (std::size_t i = 0; i < by_sum.mass.size(); ++i) diff = std::max(diff, std::fabs(by_sum.mass[i] - comp.mass[i]));
  fmt::print("m_max {}  j_max {}\n", m_max, j_max);
  fmt::print("tail mass: M {:.3e}  M~ {:.3e}  J {:.3e}\n", m.tail_mass, by_sum.tail_mass, j.tail_mass);
  fmt::print("M~ routes: max |tail sum - composition| = {:.3e}\n", diff);
  fmt::print("wrote {}\n", cfg.out.string());
  return kOk;
}

}  // namespace batchps::cli
