#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "batchps/series.hpp"
#include "batchps/summary.hpp"

namespace batchps::cli {

/// One simulation and the matching analytic curves for a parameter pair.
struct FigureData {
  ModelParams params;
  EmpiricalSummary sim;
  std::size_t j_hi = 0;  // last j written to the J figure
  DiscretePmf analytic_j;
  HqEstimate hq;
  std::string hq_source;
};

FigureData compute_figure_data(const ModelParams& p, std::uint64_t replications, std::uint64_t seed,
                               const std::string& hq_source);

/// Header j,sim_j,sim_i_b,analytic_j,approx_j.
void write_j_figure(const std::filesystem::path& path, const FigureData& d);

/// Header x,ccdf_omega,ccdf_omega_hat,approx_omega.
void write_omega_figure(const std::filesystem::path& path, const FigureData& d);

}  // namespace batchps::cli
