#include "batchps/simulator.hpp"

#include <algorithm>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <fmt/format.h>

#include "batchps/errors.hpp"
#include "batchps/rng.hpp"

namespace batchps {
namespace {

enum Domain : std::uint64_t { kRegenerative = 1, kStream = 2, kBusy = 3 };

constexpr std::size_t kBlock = 1 << 16;

// Floyd's sampling of b distinct ranks from {1..m}; only the largest is kept.
std::uint64_t max_of_distinct_ranks(RandomStream& rng, std::uint64_t b, std::uint64_t m,
                                    std::vector<std::uint64_t>& small) {
  std::uint64_t best = 0;
  if (b <= 64) {
    small.clear();
    for (std::uint64_t j = m - b + 1; j <= m; ++j) {
      const std::uint64_t t = 1 + rng.below(j);
      const std::uint64_t pick = std::find(small.begin(), small.end(), t) == small.end() ? t : j;
      small.push_back(pick);
      best = std::max(best, pick);
    }
    return best;
  }
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(2 * b);
  for (std::uint64_t j = m - b + 1; j <= m; ++j) {
    const std::uint64_t t = 1 + rng.below(j);
    const std::uint64_t pick = chosen.insert(t).second ? t : (chosen.insert(j), j);
    best = std::max(best, pick);
  }
  return best;
}

struct Scratch {
  std::vector<double> departures;
  std::vector<std::uint64_t> ranks;
};

std::uint64_t draw_n0(RandomStream& rng, const ModelParams& p) {
  if (rng.uniform() < 1.0 - p.rho_star()) return 0;
  return rng.geometric(p.rho() + p.q());
}

TaggedBatchRecord run_regenerative(const SimConfig& cfg, std::uint64_t rep, Scratch& scratch) {
  const ModelParams& p = cfg.params;
  RandomStream rng(cfg.seed, rep, kRegenerative);
  TaggedBatchRecord r;
  r.replication = rep;
  r.n0 = draw_n0(rng, p);
  r.b = rng.geometric(p.q());

  const double rate = 1.0 + p.rho();
  const double p_arrival = p.rho() / rate;
  std::uint64_t tagged = r.b;
  std::uint64_t others = r.n0;
  double t = 0.0;
  std::uint64_t events = 0;
  scratch.departures.clear();
  while (tagged + others > 0) {
    if (++events > cfg.event_cap) {
      r.aborted = true;
      return r;
    }
    t += rng.exponential(rate);
    if (rng.uniform() < p_arrival) {
      others += rng.geometric(p.q());
      continue;
    }
    scratch.departures.push_back(t);
    if (tagged > 0 && rng.below(tagged + others) < tagged) {
      if (tagged == r.b) r.first_departure = t;
      if (cfg.record_job_sojourns) r.job_sojourns.push_back(t);
      if (--tagged == 0) {
        r.omega = t;
        r.i_b = scratch.departures.size();
      }
    } else {
      --others;
    }
  }
  r.t_tilde = t;
  r.m_tilde = scratch.departures.size();
  r.j_sampled = max_of_distinct_ranks(rng, r.b, r.m_tilde, scratch.ranks);
  r.omega_hat = scratch.departures[r.j_sampled - 1];
  return r;
}

struct Track {
  double arrival;
  std::uint64_t n0;
  std::uint64_t b;
  std::uint64_t remaining;
  std::uint64_t offset;  // departures in this busy period before arrival
  double first_departure = 0;
  double omega = 0;
  std::uint64_t i_b = 0;
  std::vector<double> sojourns;
};

constexpr std::uint32_t kUntracked = 0xffffffffu;

// One independent long chain producing `quota` tagged records.
std::vector<TaggedBatchRecord> run_stream_chunk(const SimConfig& cfg, std::uint32_t chunk,
                                                std::uint64_t quota, std::uint64_t base) {
  const ModelParams& p = cfg.params;
  RandomStream rng(cfg.seed, chunk, kStream);
  std::vector<TaggedBatchRecord> out;
  out.reserve(quota);
  std::vector<std::uint32_t> jobs;  // owner slot of each job present
  std::vector<Track> tracks;        // tagged batches of the current busy period
  std::vector<double> departures;   // departure epochs of the current busy period
  std::vector<std::uint64_t> ranks;
  const double rate = 1.0 + p.rho();
  const double p_arrival = p.rho() / rate;
  double t = 0.0;
  std::uint64_t batches = 0;
  std::uint64_t tagged_so_far = 0;
  std::uint64_t events = 0;

  auto close_busy_period = [&](bool aborted) {
    for (auto& tr : tracks) {
      TaggedBatchRecord r;
      r.replication = base + out.size();
      r.n0 = tr.n0;
      r.b = tr.b;
      r.aborted = aborted;
      if (!aborted) {
        r.t_tilde = t - tr.arrival;
        r.m_tilde = departures.size() - tr.offset;
        r.omega = tr.omega;
        r.first_departure = tr.first_departure;
        r.i_b = tr.i_b;
        r.job_sojourns = std::move(tr.sojourns);
        r.j_sampled = max_of_distinct_ranks(rng, r.b, r.m_tilde, ranks);
        r.omega_hat = departures[tr.offset + r.j_sampled - 1] - tr.arrival;
      }
      out.push_back(std::move(r));
    }
    tracks.clear();
    departures.clear();
    jobs.clear();
    events = 0;
  };

  while (out.size() < quota) {
    if (jobs.empty()) {
      t += rng.exponential(p.rho());
    } else {
      if (++events > cfg.event_cap) {
        close_busy_period(true);
        continue;
      }
      t += rng.exponential(rate);
      if (rng.uniform() >= p_arrival) {
        const std::uint64_t k = rng.below(jobs.size());
        const std::uint32_t owner = jobs[k];
        jobs[k] = jobs.back();
        jobs.pop_back();
        departures.push_back(t);
        if (owner != kUntracked) {
          Track& tr = tracks[owner];
          if (tr.remaining == tr.b) tr.first_departure = t - tr.arrival;
          if (cfg.record_job_sojourns) tr.sojourns.push_back(t - tr.arrival);
          if (--tr.remaining == 0) {
            tr.omega = t - tr.arrival;
            tr.i_b = departures.size() - tr.offset;
          }
        }
        if (jobs.empty()) close_busy_period(false);
        continue;
      }
    }
    // Batch arrival.
    ++batches;
    const std::uint64_t b = rng.geometric(p.q());
    std::uint32_t owner = kUntracked;
    if (batches > cfg.warmup && (batches - cfg.warmup - 1) % cfg.stride == 0 && tagged_so_far < quota) {
      ++tagged_so_far;
      owner = static_cast<std::uint32_t>(tracks.size());
      tracks.push_back(Track{t, jobs.size(), b, b, departures.size(), 0.0, 0.0, 0, {}});
    }
    jobs.insert(jobs.end(), b, owner);
  }
  return out;
}

std::uint64_t chunk_quota(const SimConfig& cfg, std::uint32_t c) {
  const std::uint64_t n = cfg.stream_chunks;
  return cfg.replications / n + (c < cfg.replications % n ? 1 : 0);
}

std::uint64_t chunk_base(const SimConfig& cfg, std::uint32_t c) {
  std::uint64_t base = 0;
  for (std::uint32_t i = 0; i < c; ++i) base += chunk_quota(cfg, i);
  return base;
}

void check_config(const SimConfig& cfg) {
  if (cfg.replications < 1) throw DomainError("simulate_tagged: replications must be >= 1");
  if (cfg.stride < 1) throw DomainError("simulate_tagged: stride must be >= 1");
  if (cfg.stream_chunks < 1) throw DomainError("simulate_tagged: stream_chunks must be >= 1");
}

}  // namespace

bool record_consistent(const TaggedBatchRecord& r) {
  if (r.aborted) return true;
  return r.b >= 1 && r.b <= r.i_b && r.i_b <= r.m_tilde && r.b <= r.j_sampled && r.j_sampled <= r.m_tilde &&
         r.m_tilde >= r.n0 + r.b && r.first_departure > 0.0 && r.first_departure <= r.omega &&
         r.omega <= r.t_tilde && r.omega_hat <= r.t_tilde;
}

SimulationStats simulate_tagged(const SimConfig& cfg, const RecordSink& sink) {
  check_config(cfg);
  SimulationStats stats;
  if (cfg.mode == SimMode::Regenerative) {
    std::vector<TaggedBatchRecord> block;
    for (std::uint64_t start = 0; start < cfg.replications; start += kBlock) {
      const std::uint64_t n = std::min<std::uint64_t>(kBlock, cfg.replications - start);
      block.assign(n, {});
#pragma omp parallel
      {
        Scratch scratch;
#pragma omp for schedule(dynamic, 256)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
          block[i] = run_regenerative(cfg, start + i, scratch);
        }
      }
      for (const auto& r : block) stats.aborted += r.aborted ? 1 : 0;
      stats.records += n;
      sink(block);
    }
    return stats;
  }

  int width = 1;
#ifdef _OPENMP
#pragma omp parallel
#pragma omp single
  width = omp_get_num_threads();
#endif
  std::vector<std::vector<TaggedBatchRecord>> wave;
  for (std::uint32_t first = 0; first < cfg.stream_chunks; first += width) {
    const std::uint32_t last = std::min<std::uint32_t>(cfg.stream_chunks, first + width);
    wave.assign(last - first, {});
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t c = first; c < static_cast<std::int64_t>(last); ++c) {
      const auto chunk = static_cast<std::uint32_t>(c);
      wave[chunk - first] = run_stream_chunk(cfg, chunk, chunk_quota(cfg, chunk), chunk_base(cfg, chunk));
    }
    for (const auto& recs : wave) {
      for (const auto& r : recs) stats.aborted += r.aborted ? 1 : 0;
      stats.records += recs.size();
      sink(recs);
    }
  }
  return stats;
}

std::vector<TaggedBatchRecord> simulate_tagged(const SimConfig& cfg) {
  std::vector<TaggedBatchRecord> all;
  all.reserve(cfg.replications);
  simulate_tagged(cfg, [&](std::span<const TaggedBatchRecord> block) {
    all.insert(all.end(), block.begin(), block.end());
  });
  return all;
}

std::vector<BusyPeriodSample> simulate_busy_periods(const ModelParams& p, std::uint64_t n, std::uint64_t seed,
                                                    std::uint64_t event_cap) {
  std::vector<BusyPeriodSample> out(n);
  const double rate = 1.0 + p.rho();
  const double p_arrival = p.rho() / rate;
  bool guard = false;
#pragma omp parallel for schedule(dynamic, 1024)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    RandomStream rng(seed, static_cast<std::uint64_t>(i), kBusy);
    std::uint64_t jobs = rng.geometric(p.q());
    std::uint64_t served = 0;
    std::uint64_t events = 0;
    double t = 0.0;
    while (jobs > 0) {
      if (++events > event_cap) {
#pragma omp atomic write
        guard = true;
        break;
      }
      t += rng.exponential(rate);
      if (rng.uniform() < p_arrival) {
        jobs += rng.geometric(p.q());
      } else {
        --jobs;
        ++served;
      }
    }
    out[i] = {t, served};
  }
  if (guard) throw SimulationGuard(fmt::format("simulate_busy_periods: a busy period exceeded {} events", event_cap));
  return out;
}

namespace reference {

std::vector<TaggedBatchRecord> simulate_tagged(const SimConfig& cfg) {
  check_config(cfg);
  std::vector<TaggedBatchRecord> all;
  if (cfg.mode == SimMode::Regenerative) {
    Scratch scratch;
    for (std::uint64_t r = 0; r < cfg.replications; ++r) all.push_back(run_regenerative(cfg, r, scratch));
    return all;
  }
  for (std::uint32_t c = 0; c < cfg.stream_chunks; ++c) {
    auto recs = run_stream_chunk(cfg, c, chunk_quota(cfg, c), chunk_base(cfg, c));
    all.insert(all.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
  }
  return all;
}

}  // namespace reference

}  // namespace batchps
