#pragma once

// Coarsening order on partitions and staggered schedules.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sweeplab/model.hpp"

namespace sweeplab {

/// True iff every block of `fine` lies inside some block of `coarse`.
/// Throws std::invalid_argument when the ground sets differ.
bool is_coarser(const Partition& coarse, const Partition& fine);

/// Per-voter conjunction of is_coarser. Throws when voter sets differ.
bool is_coarser_staggered(const Schedule& coarse, const Schedule& fine);

/// Replaces blocks i and j by their union; result is canonical.
Partition merge_blocks(const Partition& p, std::size_t i, std::size_t j);

struct MergeStep {
  VoterId voter = 0;
  std::size_t first = 0;   // block indices in the pre-merge partition, first < second
  std::size_t second = 0;
  bool operator==(const MergeStep&) const = default;
};

/// Raised when a chain is requested between schedules that are not ordered.
/// The witness elections share a block for `voter` in the fine schedule but
/// not in the coarse one.
class NotCoarserError : public std::invalid_argument {
 public:
  NotCoarserError(VoterId voter, ElectionId a, ElectionId b);
  VoterId voter;
  ElectionId first_election;
  ElectionId second_election;
};

/// Elementary merges turning `fine` into `coarse`: voters ascending, and for
/// each voter the two lowest-indexed blocks lying in a common coarse block
/// are merged first.
std::vector<MergeStep> coarsening_chain(const Schedule& fine, const Schedule& coarse);

Schedule apply_chain(Schedule schedule, const std::vector<MergeStep>& steps);

inline constexpr std::size_t kMaxEnumeratedElections = 8;

/// All set partitions of {0..n-1} in canonical form, ordered by their
/// restricted growth strings (lexicographic). n must be <= 8.
std::vector<Partition> enumerate_partitions(std::size_t n);

/// Number of elections covered by the partition.
std::size_t ground_size(const Partition& p);

}  // namespace sweeplab
