#pragma once

// Exact simulation of the M^[X]/M/1-PS queue with a tagged batch. Under PS with
// unit-mean exponential jobs the next departure happens at rate 1 and is a
// uniformly chosen job, so only job counts are tracked.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "batchps/model.hpp"

namespace batchps {

enum class SimMode { Regenerative, Stream };

struct SimConfig {
  ModelParams params;
  std::uint64_t replications = 1;
  SimMode mode = SimMode::Regenerative;
  /// Stream mode: batches discarded at the start of each chunk.
  std::uint64_t warmup = 1000;
  /// Stream mode: tag every stride-th batch after warm-up.
  std::uint64_t stride = 1;
  /// Stream mode: number of independent chains; fixed so output does not
  /// depend on the thread count.
  std::uint32_t stream_chunks = 16;
  std::uint64_t seed = 1;
  bool record_job_sojourns = false;
  std::uint64_t event_cap = 1'000'000'000;
};

struct TaggedBatchRecord {
  std::uint64_t replication = 0;
  std::uint64_t n0 = 0;
  std::uint64_t b = 0;
  double t_tilde = 0;
  std::uint64_t m_tilde = 0;
  double omega = 0;            // last tagged departure
  double first_departure = 0;  // first tagged departure
  std::uint64_t i_b = 0;       // rank of the last tagged departure
  std::uint64_t j_sampled = 0; // max of b distinct uniform ranks in {1..m_tilde}
  double omega_hat = 0;        // departure time at rank j_sampled
  std::vector<double> job_sojourns;
  bool aborted = false;
};

using RecordSink = std::function<void(std::span<const TaggedBatchRecord>)>;

struct SimulationStats {
  std::uint64_t records = 0;
  std::uint64_t aborted = 0;
};

/// Streams records to `sink` in replication order, in blocks.
SimulationStats simulate_tagged(const SimConfig& cfg, const RecordSink& sink);

/// Convenience: all records in memory.
std::vector<TaggedBatchRecord> simulate_tagged(const SimConfig& cfg);

struct BusyPeriodSample {
  double t;
  std::uint64_t m;
};

/// Busy periods started by a single batch in an empty system. Throws
/// SimulationGuard if one exceeds event_cap events.
std::vector<BusyPeriodSample> simulate_busy_periods(const ModelParams& p, std::uint64_t n,
                                                    std::uint64_t seed,
                                                    std::uint64_t event_cap = 1'000'000'000);

/// Structural checks on one record: b <= i_b <= m_tilde, b <= j_sampled <= m_tilde,
/// first_departure <= omega <= t_tilde, omega_hat <= t_tilde.
bool record_consistent(const TaggedBatchRecord& r);

namespace reference {

/// Single-threaded, record-at-a-time version of simulate_tagged.
std::vector<TaggedBatchRecord> simulate_tagged(const SimConfig& cfg);

}  // namespace reference

}  // namespace batchps
