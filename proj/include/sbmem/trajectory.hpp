#pragma once

#include <cstdint>
#include <vector>

#include "sbmem/model.hpp"

namespace sbmem {

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::vector<double> sample_times;
  MatrixXd overlaps;            // rows: sample times, cols: patterns
  std::vector<Spins> snapshots;  // optional, one per sample time
  Spins final_state;
  std::uint64_t flip_count = 0;

  Index num_samples() const { return static_cast<Index>(sample_times.size()); }
};

// Re-expresses a record in the gauge where pattern 1 is all +1 and the sites
// are grouped by the sign of pattern 2. Overlaps are gauge-invariant and are
// carried over unchanged.
template <typename Scalar>
TrajectoryRecord gauge_align(const PatternSet<Scalar>& p, const TrajectoryRecord& record) {
  if (record.final_state.size() != p.num_spins() ||
      (record.overlaps.size() > 0 && record.overlaps.cols() != p.num_patterns())) {
    throw ValidationError("gauge_align: record dimensions do not match the pattern set");
  }
  for (const auto& s : record.snapshots) {
    if (s.size() != p.num_spins()) throw ValidationError("gauge_align: snapshot size mismatch");
  }
  const Gauge<Scalar> gauge = gauge_for(p);
  TrajectoryRecord out = record;
  out.final_state = gauge.apply(record.final_state);
  for (auto& s : out.snapshots) s = gauge.apply(s);
  return out;
}

}  // namespace sbmem
