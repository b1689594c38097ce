#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "app.hpp"
#include "csv.hpp"
#include "batchps/model.hpp"
#include "batchps/simulator.hpp"
#include "batchps/summary.hpp"

namespace batchps::cli {
namespace {

void write_hist(const std::filesystem::path& path, const CountHistogram& h) {
  CsvWriter csv(path, "index,value,std_error,count");
  for (std::uint64_t k = 0; k <= h.max_value(); ++k) {
    if (h.count(k) == 0) continue;
    csv.row(k, h.pmf(k), h.pmf_std_error(k), h.count(k));
  }
}

void write_ccdf(const std::filesystem::path& path, const EmpiricalCcdf& c) {
  CsvWriter csv(path, "x,ccdf,std_error");
  const double x_max = c.quantile(1.0 - 1e-5);
  for (int i = 1; i <= 200; ++i) {
    const double x = x_max * i / 200.0;
    csv.row(x, c(x), c.std_error(x));
  }
}

nlohmann::json mean_json(const MeanAccumulator& m) {
  return {{"mean", m.mean()}, {"std_error", m.std_error()}, {"count", m.count()}};
}

// FNV-1a over the file bytes.
std::uint64_t checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : ss.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

int cmd_simulate(const ExperimentConfig& cfg) {
  const auto p = cfg.params();
  SimConfig sc{.params = p};
  sc.replications = cfg.replications_or(1'000'000);
  sc.mode = cfg.mode == "stream" ? SimMode::Stream : SimMode::Regenerative;
  sc.warmup = cfg.warmup;
  sc.stride = cfg.stride;
  sc.seed = cfg.seed;
  sc.event_cap = cfg.event_cap;

  SummaryAccumulator acc(true);
  std::vector<TaggedBatchRecord> head;
  const auto stats = simulate_tagged(sc, [&](std::span<const TaggedBatchRecord> block) {
    for (std::size_t i = 0; i < block.size() && head.size() < 10; ++i) head.push_back(block[i]);
    acc.add(block);
  });
  const auto s = acc.take();
  if (static_cast<double>(stats.aborted) > 1e-4 * static_cast<double>(stats.records)) {
    throw SimulationGuard(fmt::format("{} of {} replications hit the event cap", stats.aborted, stats.records));
  }

  const auto head_path = cfg.out / "records_head.csv";
  {
    CsvWriter csv(head_path, "replication,n0,b,t_tilde,m_tilde,omega,first_departure,i_b,j_sampled,omega_hat");
    for (const auto& r : head) {
      csv.row(r.replication, r.n0, r.b, r.t_tilde, r.m_tilde, r.omega, r.first_departure, r.i_b, r.j_sampled,
              r.omega_hat);
    }
  }
  write_hist(cfg.out / "sim_pmf_n0.csv", s.n0);
  write_hist(cfg.out / "sim_pmf_mtilde.csv", s.m_tilde);
  write_hist(cfg.out / "sim_pmf_j.csv", s.j_sampled);
  write_hist(cfg.out / "sim_pmf_ib.csv", s.i_b);
  const EmpiricalCcdf omega(s.omega_values);
  const EmpiricalCcdf omega_hat(s.omega_hat_values);
  write_ccdf(cfg.out / "sim_ccdf_omega.csv", omega);
  write_ccdf(cfg.out / "sim_ccdf_omega_hat.csv", omega_hat);

  const auto busy = simulate_busy_periods(p, std::min<std::uint64_t>(sc.replications, 1'000'000), cfg.seed,
                                          cfg.event_cap);
  MeanAccumulator busy_mean_acc;
  for (const auto& bp : busy) busy_mean_acc.add(bp.t);

  nlohmann::json j;
  j["params"] = {{"rho", p.rho()}, {"q", p.q()}, {"rho_star", p.rho_star()}};
  j["seed"] = cfg.seed;
  j["mode"] = cfg.mode;
  j["replications"] = stats.records;
  j["aborted"] = stats.aborted;
  j["invariant_violations"] = s.invariant_violations;
  j["means"] = {{"t_tilde", mean_json(s.t_tilde)},   {"omega", mean_json(s.omega)},
                {"omega_hat", mean_json(s.omega_hat)}, {"m_tilde", mean_json(s.m_tilde_mean)},
                {"first_departure", mean_json(s.first_departure)}};
  j["busy_period"] = {{"simulated", mean_json(busy_mean_acc)}, {"analytic_mean", busy_mean(p)}};
  auto slope = [&](const EmpiricalCcdf& c) -> nlohmann::json {
    try {
      const auto f = fit_tail_slope(c);
      return {{"slope", f.slope}, {"std_error", f.slope_std_error}, {"x_lo", f.x_lo}, {"x_hi", f.x_hi},
              {"points", f.points}};
    } catch (const InsufficientTailData& e) {
      return {{"error", e.what()}};
    }
  };
  j["tail_slope"] = {{"omega", slope(omega)}, {"omega_hat", slope(omega_hat)},
                     {"sigma_plus", spectral_constants(p).sigma_plus}};
  j["records_head_fnv1a"] = fmt::format("{:016x}", checksum(head_path));
  std::ofstream(cfg.out / "summary.json") << j.dump(2) << '\n';

  fmt::print("{} records ({} aborted, {} invariant violations)\n", stats.records, stats.aborted,
             s.invariant_violations);
  fmt::print("mean busy period {:.5f} +- {:.5f} (analytic {:.5f})\n", busy_mean_acc.mean(),
             busy_mean_acc.std_error(), busy_mean(p));
  fmt::print("records_head checksum {}\n", j["records_head_fnv1a"].get<std::string>());
  return kOk;
}

}  // namespace batchps::cli
