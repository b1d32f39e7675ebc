#ifndef TSMCD_SEGMENTATION_HPP
#define TSMCD_SEGMENTATION_HPP

#include <algorithm>
#include <string>
#include <vector>

#include "tsmcd/survival_data.hpp"

namespace tsmcd {

/// Event-balanced partition of the sample along the thresholding variable.
/// The trailing q segments hold exactly m events each (by event z-order); the
/// first segment absorbs the remaining n* - q*m events. Censored observations
/// join the segment whose z-interval contains them, the last interval being
/// open to +inf.
struct segmentation {
  int m = 0;
  int q = 0;                                 ///< trailing segments; q+1 in total
  std::vector<double> boundaries;            ///< upper z edge of segments 0..q-1
  std::vector<std::vector<int>> index_sets;  ///< q+1 disjoint, z-ordered index sets
  std::vector<int> event_counts;
};

inline segmentation build_segments(const survival_dataset& data, int m) {
  if (m < 1) fail(errc::invalid_argument, "build_segments: m must be >= 1");
  const int nstar = data.n_events();
  if (nstar < 2 * m)
    fail(errc::insufficient_events, "build_segments: need at least 2m = " +
                                        std::to_string(2 * m) + " events, have " +
                                        std::to_string(nstar));
  int q = nstar / m - 1;
  if (nstar - q * m == 0) --q;  // unreachable guard: keep the first segment nonempty
  if (q < 1) fail(errc::insufficient_events, "build_segments: cannot form a trailing segment");

  // events sorted by (z, row); ties in z resolve by original index
  std::vector<int> events;
  events.reserve(static_cast<std::size_t>(nstar));
  for (int i = 0; i < data.n(); ++i)
    if (data.delta[i] == 1) events.push_back(i);
  std::sort(events.begin(), events.end(), [&](int a, int b) {
    if (data.z[a] != data.z[b]) return data.z[a] < data.z[b];
    return a < b;
  });

  segmentation seg;
  seg.m = m;
  seg.q = q;
  const int first_count = nstar - q * m;
  seg.boundaries.resize(static_cast<std::size_t>(q));
  // boundaries[j] = z of the event with rank first_count + j*m, the upper
  // edge of segment j
  for (int j = 0; j < q; ++j)
    seg.boundaries[static_cast<std::size_t>(j)] =
        data.z[events[static_cast<std::size_t>(first_count + j * m - 1)]];

  seg.index_sets.assign(static_cast<std::size_t>(q + 1), {});
  seg.event_counts.assign(static_cast<std::size_t>(q + 1), 0);
  for (int r = 0; r < nstar; ++r) {
    const int s = r < first_count ? 0 : 1 + (r - first_count) / m;
    seg.index_sets[static_cast<std::size_t>(s)].push_back(events[static_cast<std::size_t>(r)]);
    ++seg.event_counts[static_cast<std::size_t>(s)];
  }
  for (int i = 0; i < data.n(); ++i) {
    if (data.delta[i] == 1) continue;
    const auto it = std::lower_bound(seg.boundaries.begin(), seg.boundaries.end(), data.z[i]);
    const int s = static_cast<int>(it - seg.boundaries.begin());
    seg.index_sets[static_cast<std::size_t>(s)].push_back(i);
  }
  for (auto& set : seg.index_sets) std::sort(set.begin(), set.end());
  return seg;
}

}  // namespace tsmcd

#endif
