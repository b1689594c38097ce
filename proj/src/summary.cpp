#include "batchps/summary.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "batchps/errors.hpp"

namespace batchps {

double MeanAccumulator::std_error() const noexcept {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

double CountHistogram::pmf(std::uint64_t k) const noexcept {
  return total_ ? static_cast<double>(count(k)) / static_cast<double>(total_) : 0.0;
}

double CountHistogram::pmf_std_error(std::uint64_t k) const noexcept {
  if (!total_) return 0.0;
  const double p = pmf(k);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(total_));
}

std::uint64_t CountHistogram::mode() const noexcept {
  return static_cast<std::uint64_t>(std::max_element(counts_.begin(), counts_.end()) - counts_.begin());
}

std::uint64_t CountHistogram::quantile(double level) const noexcept {
  const double target = level * static_cast<double>(total_);
  std::uint64_t acc = 0;
  for (std::uint64_t k = 0; k < counts_.size(); ++k) {
    acc += counts_[k];
    if (static_cast<double>(acc) >= target) return k;
  }
  return max_value();
}

DiscretePmf empirical_pmf(const CountHistogram& h, std::string label) {
  DiscretePmf pmf{std::move(label), 0, {}, 0.0};
  pmf.mass.reserve(h.max_value() + 1);
  for (std::uint64_t k = 0; k <= h.max_value(); ++k) pmf.mass.push_back(h.pmf(k));
  return pmf;
}

EmpiricalCcdf::EmpiricalCcdf(std::vector<double> values) : sorted_(std::move(values)) {
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCcdf::operator()(double x) const noexcept {
  if (sorted_.empty()) return 0.0;
  const auto above = sorted_.end() - std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(above) / static_cast<double>(sorted_.size());
}

double EmpiricalCcdf::std_error(double x) const noexcept {
  const double p = (*this)(x);
  return sorted_.empty() ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(sorted_.size()));
}

double EmpiricalCcdf::quantile(double level) const noexcept {
  if (sorted_.empty()) return 0.0;
  const auto i = static_cast<std::size_t>(std::ceil(level * static_cast<double>(sorted_.size())));
  return sorted_[std::min(sorted_.size() - 1, i == 0 ? 0 : i - 1)];
}

TailFit fit_tail_slope(const EmpiricalCcdf& ccdf, double ccdf_lo, double ccdf_hi) {
  const auto& v = ccdf.sorted();
  const double n = static_cast<double>(v.size());
  // Point i (0-based, ascending) has empirical ccdf (n - 1 - i) / n.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t k = 0;
  TailFit fit;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double c = (n - 1.0 - static_cast<double>(i)) / n;
    if (c > ccdf_lo || c < ccdf_hi || c <= 0.0) continue;
    const double y = std::log(c);
    pts.emplace_back(v[i], y);
    sx += v[i];
    sy += y;
    ++k;
  }
  if (k < 100) {
    throw InsufficientTailData(fmt::format("fit_tail_slope: {} points in the ccdf window [{:g}, {:g}]", k,
                                           ccdf_hi, ccdf_lo));
  }
  const double mx = sx / static_cast<double>(k);
  const double my = sy / static_cast<double>(k);
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) throw InsufficientTailData("fit_tail_slope: no spread in the fit window");
  fit.slope = sxy / sxx;
  double rss = 0;
  for (const auto& [x, y] : pts) {
    const double r = y - my - fit.slope * (x - mx);
    rss += r * r;
  }
  fit.slope_std_error = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
  fit.x_lo = pts.front().first;
  fit.x_hi = pts.back().first;
  fit.points = k;
  return fit;
}

void SummaryAccumulator::add(std::span<const TaggedBatchRecord> block) {
  for (const auto& r : block) {
    ++s_.records;
    if (r.aborted) {
      ++s_.aborted;
      continue;
    }
    if (!record_consistent(r)) ++s_.invariant_violations;
    s_.n0.add(r.n0);
    s_.b.add(r.b);
    s_.m_tilde.add(r.m_tilde);
    s_.i_b.add(r.i_b);
    s_.j_sampled.add(r.j_sampled);
    s_.t_tilde.add(r.t_tilde);
    s_.omega.add(r.omega);
    s_.omega_hat.add(r.omega_hat);
    s_.m_tilde_mean.add(static_cast<double>(r.m_tilde));
    s_.first_departure.add(r.first_departure);
    if (keep_) {
      s_.omega_values.push_back(r.omega);
      s_.omega_hat_values.push_back(r.omega_hat);
    }
  }
}

}  // namespace batchps
