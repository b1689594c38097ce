#include "batchps/series.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <span>

#include <fmt/format.h>

#include "batchps/asymptotics.hpp"
#include "batchps/errors.hpp"
#include "batchps/kernels.hpp"
#include "batchps/summation.hpp"

namespace batchps {
namespace {

void check_tail(const DiscretePmf& pmf, TruncationPolicy policy) {
  if (pmf.tail_mass > policy.max_tail) {
    throw TruncationTooSmall(fmt::format("{}: unaccounted mass {:.3e} above bound {:.3e}", pmf.label,
                                         pmf.tail_mass, policy.max_tail),
                             pmf.tail_mass);
  }
}

DiscretePmf finish(std::string label, std::size_t offset, std::vector<double> mass) {
  DiscretePmf pmf{std::move(label), offset, std::move(mass), 0.0};
  pmf.tail_mass = 1.0 - compensated_sum(pmf.mass);
  return pmf;
}

// Y = X / (1 - lambda X), lambda = rho + q. Both eta(X) and phi(X) are affine in Y.
std::vector<double> geometric_compose(const std::vector<double>& x, double lambda) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t m = 1; m < x.size(); ++m) {
    double acc = 0.0;
    for (std::size_t i = 1; i < m; ++i) acc += x[i] * y[m - i];
    y[m] = x[m] + lambda * acc;
  }
  return y;
}

// Adds batch size b's share of P(J = j): weight * (b/j) * sum_{m >= j} h(m) C(m-b, ...)
// where C(j-1,b-1)/C(m,b) = (b/j) prod_{i=j+1}^{m} (i-b)/i is built by the
// backward recursion s(j) = h(j) + s(j+1) (j+1-b)/(j+1).
void accumulate_batch(std::vector<CompensatedSum>& acc, std::span<const double> h, std::size_t b,
                      double weight, std::size_t j_max) {
  const std::size_t n = h.size() - 1;
  double s = 0.0;
  for (std::size_t m = n; m >= b; --m) {
    s = h[m] + s * static_cast<double>(m + 1 - b) / static_cast<double>(m + 1);
    if (m <= j_max) acc[m] += weight * static_cast<double>(b) / static_cast<double>(m) * s;
    if (m == b) break;
  }
}

// P(J <= j | b, m) = C(j, b) / C(m, b).
double j_cdf_given(std::size_t j, std::size_t b, std::size_t m) {
  if (j >= m) return 1.0;
  if (b > j) return 0.0;
  double r = 1.0;
  for (std::size_t i = 0; i < b; ++i) r *= static_cast<double>(j - i) / static_cast<double>(m - i);
  return r;
}

double geometric_tail_sum(const TailAsymptote& law, std::size_t from) {
  // sum_{i > from} law(i) <= law(from + 1) / (1 - ratio) since the power factor decreases.
  return law(static_cast<double>(from + 1)) / (1.0 - law.rate);
}

}  // namespace

double DiscretePmf::mean() const {
  CompensatedSum acc;
  for (std::size_t i = 0; i < mass.size(); ++i) acc += static_cast<double>(offset + i) * mass[i];
  return acc.value();
}

std::vector<double> busy_jobs_coefficients(const ModelParams& p, std::size_t n) {
  std::vector<double> m(n + 1, 0.0);
  const double rho = p.rho();
  const double q = p.q();
  const double inv = 1.0 / (1.0 + rho);
  if (n >= 1) m[1] = (1.0 - q) * inv;
  for (std::size_t k = 2; k <= n; ++k) {
    // sum_{i=1}^{k-1} m_i m_{k-i}, folded at the middle.
    double acc = 0.0;
    const std::size_t half = k / 2;
    for (std::size_t i = 1; i < (k + 1) / 2; ++i) acc += m[i] * m[k - i];
    acc *= 2.0;
    if (k % 2 == 0) acc += m[half] * m[half];
    m[k] = (rho * acc + q * m[k - 1]) * inv;
  }
  return m;
}

std::vector<double> kernel_coefficients(const ModelParams& p, std::size_t n) {
  const auto m = busy_jobs_coefficients(p, n == 0 ? 0 : n - 1);
  const double rho = p.rho();
  const double inv = 1.0 / (1.0 + rho);
  std::vector<double> g(n, 0.0);
  if (n >= 1) g[0] = inv;
  for (std::size_t k = 1; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= k; ++i) acc += m[i] * g[k - i];
    g[k] = rho * acc * inv;
  }
  std::vector<double> x(n + 1, 0.0);
  std::copy(g.begin(), g.end(), x.begin() + 1);
  return x;
}

DiscretePmf m_pmf(const ModelParams& p, std::size_t m_max, TruncationPolicy policy) {
  if (m_max < 1) throw DomainError("m_pmf: m_max must be >= 1");
  auto m = busy_jobs_coefficients(p, m_max);
  auto pmf = finish("M", 1, std::vector<double>(m.begin() + 1, m.end()));
  check_tail(pmf, policy);
  return pmf;
}

DiscretePmf n0_pmf(const ModelParams& p, std::size_t n_max) {
  std::vector<double> mass(n_max + 1);
  const double empty = (1.0 - p.rho() - p.q()) / (1.0 - p.q());
  const double lambda = p.rho() + p.q();
  mass[0] = empty;
  double w = empty * p.rho();
  for (std::size_t n = 1; n <= n_max; ++n) {
    mass[n] = w;
    w *= lambda;
  }
  return finish("N0", 0, std::move(mass));
}

CoefficientTable conditional_mtilde_table(const ModelParams& p, std::size_t k_max, std::size_t m_max,
                                          TruncationPolicy policy) {
  if (k_max < 1 || m_max < 1) throw DomainError("conditional_mtilde_table: truncations must be >= 1");
  CoefficientTable table(k_max, m_max);
  const auto x = kernel_coefficients(p, m_max);
  std::vector<double> row = x;
  std::vector<double> next(m_max + 1);
  double worst = 0.0;
  std::size_t worst_k = 1;
  for (std::size_t k = 1; k <= k_max; ++k) {
    if (k > 1) {
      kernels::convolve_truncated(row, x, next);
      row.swap(next);
    }
    std::copy(row.begin(), row.end(), &table(k, 0));
    table.remainder(k) = 1.0 - compensated_sum(row);
    if (table.remainder(k) > worst) {
      worst = table.remainder(k);
      worst_k = k;
    }
  }
  if (worst > policy.max_tail) {
    throw TruncationTooSmall(fmt::format("conditional_mtilde_table: row {} leaves mass {:.3e} beyond m = {}",
                                         worst_k, worst, m_max),
                             worst, "m");
  }
  return table;
}

std::vector<double> sqrt_coefficients(std::size_t n) {
  std::vector<double> a(n + 1);
  a[0] = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    a[k] = a[k - 1] * (2.0 * kk - 3.0) / (2.0 * kk);
  }
  return a;
}

BSeries b_series(const ModelParams& p, std::size_t min_terms) {
  const auto k = spectral_constants(p);
  const double zm = k.zeta_minus;
  const double x = zm / k.zeta_plus;

  // A_l = a_l x^l, cut once x^l is below 1e-30.
  const std::size_t l_cut =
      static_cast<std::size_t>(std::ceil(std::log(1e-30) / std::log(x))) + 1;
  auto a = sqrt_coefficients(l_cut);
  std::vector<double> scaled(l_cut + 1);
  for (std::size_t l = 0; l <= l_cut; ++l) scaled[l] = a[l] * std::pow(x, static_cast<double>(l));

  BSeries out;
  out.b.push_back(1.0);
  SignSplitSum total;
  total += 1.0;
  CompensatedSum beyond;  // sum_{l > min_terms} b_l so far
  const double log_z = std::log(zm);
  const double shrink = 1.0 - 1.0 / zm;
  for (std::size_t n = 1;; ++n) {
    if (n >= a.size()) {
      a.push_back(a.back() * (2.0 * static_cast<double>(n) - 3.0) / (2.0 * static_cast<double>(n)));
    }
    SignSplitSum beta;
    const std::size_t top = std::min(n, l_cut);
    for (std::size_t l = 0; l <= top; ++l) beta += scaled[l] * a[n - l];
    const double bn = beta.value() * std::exp(-static_cast<double>(n) * log_z);
    out.b.push_back(bn);
    total += bn;
    if (n > min_terms) beyond += bn;
    // |beta| <= sum |A_l| <= 2.
    const double bound = 2.0 * std::exp(-static_cast<double>(n + 1) * log_z) / shrink;
    if (n > min_terms) {
      const double scale = std::fabs(beyond.value());
      if (bound <= 1e-13 * scale || bound < 1e-300 || (scale == 0.0 && bound < 1e-17)) {
        out.remainder_bound = bound;
        break;
      }
    }
  }
  out.identity_residual = (1.0 + p.rho()) * total.value() - (1.0 - p.rho() - p.q());
  return out;
}

DiscretePmf mtilde_pmf_tail_sum(const ModelParams& p, std::size_t m_max, TruncationPolicy policy) {
  if (m_max < 1) throw DomainError("mtilde_pmf_tail_sum: m_max must be >= 1");
  const auto series = b_series(p, m_max);
  if (std::fabs(series.identity_residual) > 1e-8) {
    throw PrecisionLoss(fmt::format("mtilde_pmf_tail_sum: identity (1+rho) sum b_k = 1-rho-q off by {:.3e}",
                                    series.identity_residual));
  }
  const double lambda = p.rho() + p.q();
  const double scale = -(1.0 - lambda) * (1.0 + p.rho()) / (2.0 * p.rho() * lambda);
  std::vector<double> suffix(series.b.size());
  kernels::suffix_sums(series.b, suffix);
  std::vector<double> mass(m_max);
  for (std::size_t m = 1; m <= m_max; ++m) mass[m - 1] = scale * suffix[m + 1];
  auto pmf = finish("Mtilde", 1, std::move(mass));
  check_tail(pmf, policy);
  return pmf;
}

DiscretePmf mtilde_pmf_composition(const ModelParams& p, std::size_t m_max, TruncationPolicy policy) {
  if (m_max < 1) throw DomainError("mtilde_pmf_composition: m_max must be >= 1");
  const double lambda = p.rho() + p.q();
  const auto y = geometric_compose(kernel_coefficients(p, m_max), lambda);
  std::vector<double> mass(m_max);
  for (std::size_t m = 1; m <= m_max; ++m) mass[m - 1] = (1.0 - lambda) * y[m];
  auto pmf = finish("Mtilde", 1, std::move(mass));
  check_tail(pmf, policy);
  return pmf;
}

DiscretePmf j_conditional_pmf(std::uint64_t b, std::uint64_t m) {
  if (b < 1 || b > m) throw DomainError(fmt::format("j_conditional_pmf: need 1 <= b <= m, got b={} m={}", b, m));
  // P(J = m) = b/m; P(J = j-1) / P(J = j) = (j - b) / (j - 1).
  std::vector<double> mass(m - b + 1);
  double v = static_cast<double>(b) / static_cast<double>(m);
  for (std::uint64_t j = m;; --j) {
    mass[j - b] = v;
    if (j == b) break;
    v *= static_cast<double>(j - b) / static_cast<double>(j - 1);
  }
  return finish(fmt::format("J|b={},m={}", b, m), b, std::move(mass));
}

DiscretePmf j_pmf(const ModelParams& p, std::size_t j_max, JPmfOptions options) {
  if (j_max < 1) throw DomainError("j_pmf: j_max must be >= 1");
  const auto k = spectral_constants(p);
  const std::size_t extra =
      static_cast<std::size_t>(std::ceil(std::log(1.0 / options.m_cutoff) / std::log(k.zeta_minus)));
  const std::size_t n = j_max + extra;
  const double lambda = p.rho() + p.q();
  const auto x = kernel_coefficients(p, n);
  const auto y = geometric_compose(x, lambda);

  // h_0 = eta(X) = (1 - rho*) (1 + rho Y).
  std::vector<double> h(n + 1);
  const double empty = (1.0 - p.rho() - p.q()) / (1.0 - p.q());
  for (std::size_t m = 0; m <= n; ++m) h[m] = empty * p.rho() * y[m];
  h[0] += empty;
  std::vector<double> next(n + 1);

  std::vector<CompensatedSum> acc(j_max + 1);
  double pb = 1.0 - p.q();
  double m_remainder = 0.0;
  std::size_t b = 1;
  for (; b <= j_max && pb >= options.batch_cutoff; ++b, pb *= p.q()) {
    kernels::convolve_truncated(h, x, next);
    h.swap(next);
    accumulate_batch(acc, h, b, pb, j_max);
    const double lost = std::max(0.0, 1.0 - compensated_sum(h));
    m_remainder += pb * lost * j_cdf_given(j_max, b, n + 1);
  }
  const double batch_remainder = b <= j_max ? std::pow(p.q(), static_cast<double>(b - 1)) : 0.0;

  std::vector<double> mass(j_max);
  for (std::size_t j = 1; j <= j_max; ++j) mass[j - 1] = acc[j].value();
  auto pmf = finish("J", 1, std::move(mass));

  const double numerical = m_remainder + batch_remainder;
  if (numerical > options.policy.max_tail) {
    const bool m_dominates = m_remainder >= batch_remainder;
    throw TruncationTooSmall(
        fmt::format("j_pmf: truncation loses {:.3e} (batch sizes {:.3e}, residual job counts {:.3e}, "
                    "j beyond {} holds {:.3e})",
                    numerical, batch_remainder, m_remainder, j_max, pmf.tail_mass),
        numerical, m_dominates ? "m" : "b");
  }
  return pmf;
}

DiscretePmf j_pmf_from_table(const ModelParams& p, const CoefficientTable& table, std::size_t j_max) {
  const std::size_t m_max = table.m_max();
  j_max = std::min(j_max, m_max);
  const auto n0 = n0_pmf(p, table.k_max());
  std::vector<CompensatedSum> acc(j_max + 1);
  std::vector<double> h(m_max + 1);
  double pb = 1.0 - p.q();
  for (std::size_t b = 1; b <= std::min(j_max, table.k_max()); ++b, pb *= p.q()) {
    std::fill(h.begin(), h.end(), 0.0);
    for (std::size_t n = 0; n + b <= table.k_max(); ++n) {
      const double w = n0.mass[n];
      const double* row = table.row(n + b);
      for (std::size_t m = 0; m <= m_max; ++m) h[m] += w * row[m];
    }
    accumulate_batch(acc, h, b, pb, j_max);
  }
  std::vector<double> mass(j_max);
  for (std::size_t j = 1; j <= j_max; ++j) mass[j - 1] = acc[j].value();
  return finish("J", 1, std::move(mass));
}

std::size_t adaptive_m_max(const ModelParams& p, double tol) {
  const auto law = mtilde_tail(p);
  std::size_t m = 1;
  while (geometric_tail_sum(law, m) > tol) ++m;
  return m;
}

std::size_t adaptive_j_max(const ModelParams& p, double tol) {
  const auto law = j_tail(p);
  std::size_t j = 1;
  while (geometric_tail_sum(law, j) > tol) ++j;
  return j;
}

double k_q_deconditioned(const ModelParams& p) {
  const auto k = spectral_constants(p);
  const double r = k.r_q;
  const double q = p.q();
  const double lambda = p.rho() + q;
  const auto n0 = [&](std::size_t n) {
    const double empty = (1.0 - p.rho() - p.q()) / (1.0 - p.q());
    return n == 0 ? empty : empty * p.rho() * std::pow(lambda, static_cast<double>(n - 1));
  };
  CompensatedSum acc;
  for (std::size_t b = 1;; ++b) {
    const double pb = (1.0 - q) * std::pow(q, static_cast<double>(b - 1));
    CompensatedSum inner;
    for (std::size_t n = 0;; ++n) {
      const double t = static_cast<double>(n + b) * std::pow(r, static_cast<double>(n + b)) * n0(n);
      inner += t;
      if (n > 10 && t < 1e-22 * inner.value()) break;
    }
    const double term = static_cast<double>(b) * pb * inner.value();
    acc += term;
    if (b > 10 && term < 1e-22 * acc.value()) break;
  }
  return k.kappa_q * k.zeta_minus / (k.zeta_minus - 1.0) * acc.value();
}

HqEstimate h_q(const ModelParams& p, const DiscretePmf& j_law, HqOptions options) {
  const auto k = spectral_constants(p);
  const double u = k.u_star;
  const double log_u = std::log(u);
  HqEstimate est;
  CompensatedSum exact;
  std::size_t last = 0;
  for (std::size_t i = 0; i < j_law.mass.size(); ++i) {
    const std::size_t j = j_law.offset + i;
    const double v = j_law.mass[i];
    if (v <= 0.0) continue;
    exact += static_cast<double>(j) * v * std::exp(static_cast<double>(j - 1) * log_u);
    last = j;
  }
  est.exact_part = exact.value();
  est.last_index = last;
  est.value = est.exact_part;
  if (!options.tail_continuation || last == 0) return est;

  const auto law = j_tail(p);
  est.ratio_at_last = j_law.at(last) / law(static_cast<double>(last));
  // sum_{j > last} j law(j) u^(j-1) = (K/u) sum j^(-3/2) x^j, x = u / zeta.
  const double x = u / k.zeta_minus;
  double j = static_cast<double>(last + 1);
  double term = std::exp(-1.5 * std::log(j) + j * std::log(x));
  CompensatedSum tail;
  while (true) {
    tail += term;
    if (term / (1.0 - x) < 1e-17 * tail.value()) break;
    const double ratio = j / (j + 1.0);
    term *= x * ratio * std::sqrt(ratio);
    j += 1.0;
  }
  est.tail_part = law.prefactor / u * tail.value();
  est.value = est.exact_part + est.tail_part * (1.0 + est.ratio_at_last) / 2.0;
  est.remainder_bound = est.tail_part * std::fabs(1.0 - est.ratio_at_last) / 2.0;
  if (est.remainder_bound > options.max_relative_remainder * est.value) {
    throw TruncationTooSmall(fmt::format("h_q: tail beyond j = {} uncertain by {:.3e} of {:.6g}", last,
                                         est.remainder_bound, est.value),
                             est.remainder_bound, "j");
  }
  return est;
}

HqEstimate h_q_analytic(const ModelParams& p, double max_relative_remainder) {
  std::size_t j_max = std::max<std::size_t>(adaptive_j_max(p), 64);
  for (;; j_max *= 2) {
    try {
      return h_q(p, j_pmf(p, j_max), {max_relative_remainder, true});
    } catch (const TruncationTooSmall&) {
      if (j_max > (1u << 16)) throw;
    }
  }
}

}  // namespace batchps
