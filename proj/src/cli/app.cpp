#include "app.hpp"

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

namespace batchps::cli {

ModelParams ExperimentConfig::params() const {
  if (rho.has_value() == rho_star.has_value()) {
    throw ConfigError("give exactly one of --rho and --rho-star");
  }
  if (!q) throw ConfigError("--q is required");
  return rho ? validate_params(*rho, *q) : params_from_load(*rho_star, *q);
}

std::pair<std::string, double> parse_tolerance(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(fmt::format("tolerance '{}' is not NAME=VALUE", spec));
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(spec.substr(eq + 1), &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != spec.size() - eq - 1 || !(v > 0.0)) {
    throw ConfigError(fmt::format("tolerance '{}' needs a positive number", spec));
  }
  return {spec.substr(0, eq), v};
}

void load_config_file(const std::filesystem::path& file, ExperimentConfig& cfg) {
  std::ifstream in(file);
  if (!in) throw ConfigError(fmt::format("cannot read config {}", file.string()));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    auto take = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    auto take_opt = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<typename std::remove_reference_t<decltype(field)>::value_type>();
    };
    take_opt("rho", cfg.rho);
    take_opt("rho_star", cfg.rho_star);
    take_opt("q", cfg.q);
    take("seed", cfg.seed);
    take_opt("replications", cfg.replications);
    if (j.contains("out")) {
      cfg.out = j.at("out").get<std::string>();
      cfg.out_given = true;
    }
    take_opt("m_max", cfg.m_max);
    take_opt("j_max", cfg.j_max);
    take("b", cfg.cond_b);
    take("m", cfg.cond_m);
    take("mode", cfg.mode);
    take("warmup", cfg.warmup);
    take("stride", cfg.stride);
    take("event_cap", cfg.event_cap);
    take("hq_source", cfg.hq_source);
    take("profile", cfg.profile);
    if (j.contains("tolerances")) {
      for (const auto& [name, value] : j.at("tolerances").items()) cfg.tolerances[name] = value.get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("config {}: {}", file.string(), e.what()));
  }
}

namespace {

struct Flags {
  std::optional<double> rho, rho_star, q;
  std::optional<std::uint64_t> seed, replications, warmup, stride, b, m, event_cap;
  std::optional<std::size_t> m_max, j_max;
  std::optional<std::string> out, config, mode, hq_source, profile;
  std::vector<std::string> tolerances;
  bool inject_fault = false;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--rho", f.rho, "batch arrival rate");
  app->add_option("--rho-star", f.rho_star, "job load rho/(1-q)");
  app->add_option("--q", f.q, "geometric batch parameter");
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--replications", f.replications, "tagged batches to simulate");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--config", f.config, "JSON config file; flags override it");
  app->add_option("--tolerance", f.tolerances, "NAME=VALUE tolerance override");
}

ExperimentConfig resolve(const Flags& f) {
  ExperimentConfig cfg;
  if (f.config) load_config_file(*f.config, cfg);
  // A flag for either load parameter replaces both from the file.
  if (f.rho || f.rho_star) {
    cfg.rho = f.rho;
    cfg.rho_star = f.rho_star;
  }
  if (f.q) cfg.q = f.q;
  if (f.seed) cfg.seed = *f.seed;
  if (f.replications) cfg.replications = f.replications;
  if (f.out) {
    cfg.out = *f.out;
    cfg.out_given = true;
  }
  if (f.m_max) cfg.m_max = f.m_max;
  if (f.j_max) cfg.j_max = f.j_max;
  if (f.b) cfg.cond_b = *f.b;
  if (f.m) cfg.cond_m = *f.m;
  if (f.mode) cfg.mode = *f.mode;
  if (f.warmup) cfg.warmup = *f.warmup;
  if (f.stride) cfg.stride = *f.stride;
  if (f.event_cap) cfg.event_cap = *f.event_cap;
  if (f.hq_source) cfg.hq_source = *f.hq_source;
  if (f.profile) cfg.profile = *f.profile;
  cfg.inject_fault = f.inject_fault;
  for (const auto& t : f.tolerances) cfg.tolerances.insert_or_assign(parse_tolerance(t).first, parse_tolerance(t).second);
  if (cfg.replications && *cfg.replications == 0) throw ConfigError("--replications must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) throw ConfigError(fmt::format("cannot create output directory {}: {}", cfg.out.string(), ec.message()));
  return cfg;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"M^[X]/M/1 processor-sharing toolkit with geometric batches", "batchps"};
  app.require_subcommand(1);
  Flags f;

  auto* constants = app.add_subcommand("constants", "spectral constants and tail-law parameters");
  add_common(constants, f);
  auto* pmf = app.add_subcommand("pmf", "exact truncated PMFs as CSV");
  add_common(pmf, f);
  pmf->add_option("--m-max", f.m_max, "truncation for M and M~");
  pmf->add_option("--j-max", f.j_max, "truncation for J");
  pmf->add_option("--b", f.b, "batch size for the conditional J law");
  pmf->add_option("--m", f.m, "served jobs for the conditional J law");
  auto* simulate = app.add_subcommand("simulate", "tagged-batch simulation");
  add_common(simulate, f);
  simulate->add_option("--mode", f.mode, "regenerative or stream")->check(CLI::IsMember({"regenerative", "stream"}));
  simulate->add_option("--warmup", f.warmup, "stream mode: batches discarded per chain");
  simulate->add_option("--stride", f.stride, "stream mode: tag every n-th batch");
  simulate->add_option("--event-cap", f.event_cap, "events allowed per replication before it is aborted");
  auto* figures = app.add_subcommand("figures", "data for the J pmf and sojourn-tail figures");
  add_common(figures, f);
  figures->add_option("--hq-source", f.hq_source, "analytic or simulated")
      ->check(CLI::IsMember({"analytic", "simulated"}));
  figures->add_option("--profile", f.profile, "fast (1e6) or full (1e7) replications")
      ->check(CLI::IsMember({"fast", "full"}));
  auto* validate = app.add_subcommand("validate", "invariant suite with a JSON report");
  add_common(validate, f);
  validate->add_flag("--inject-fault", f.inject_fault, "perturb one constant to exercise the failure path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const ExperimentConfig cfg = resolve(f);
    if (constants->parsed()) return cmd_constants(cfg);
    if (pmf->parsed()) return cmd_pmf(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (figures->parsed()) return cmd_figures(cfg);
    return cmd_validate(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const TruncationTooSmall& e) {
    std::cerr << "truncation failure: " << e.what() << " (remainder " << e.remainder();
    if (!e.dominant().empty()) std::cerr << ", dominated by the " << e.dominant() << " sum";
    std::cerr << ")\n";
    return kTruncationFailure;
  } catch (const SimulationGuard& e) {
    std::cerr << "simulation guard: " << e.what() << '\n';
    return kSimulationGuard;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailed;
  }
}

}  // namespace batchps::cli
