#include "sweeplab/lattice.hpp"

#include <algorithm>
#include <string>

namespace sweeplab {

namespace {

// block index of each element
std::vector<std::size_t> block_of(const Partition& p, std::size_t n) {
  std::vector<std::size_t> owner(n, 0);
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    for (ElectionId e : p.blocks[b]) owner.at(e) = b;
  }
  return owner;
}

}  // namespace

std::size_t ground_size(const Partition& p) {
  std::size_t n = 0;
  for (const Block& b : p.blocks) n += b.size();
  return n;
}

bool is_coarser(const Partition& coarse, const Partition& fine) {
  const std::size_t n = ground_size(fine);
  if (ground_size(coarse) != n) {
    throw std::invalid_argument("is_coarser: partitions are over different election sets");
  }
  // Validates as a side effect.
  const Partition c = canonicalize_partition(coarse, n);
  const Partition f = canonicalize_partition(fine, n);
  const auto owner = block_of(c, n);
  for (const Block& b : f.blocks) {
    for (ElectionId e : b) {
      if (owner[e] != owner[b.front()]) return false;
    }
  }
  return true;
}

bool is_coarser_staggered(const Schedule& coarse, const Schedule& fine) {
  if (coarse.by_voter.size() != fine.by_voter.size()) {
    throw std::invalid_argument("is_coarser_staggered: schedules cover different voters");
  }
  for (const auto& [voter, partition] : fine.by_voter) {
    auto it = coarse.by_voter.find(voter);
    if (it == coarse.by_voter.end()) {
      throw std::invalid_argument("is_coarser_staggered: voter " + std::to_string(voter) +
                                  " missing from the coarse schedule");
    }
    if (!is_coarser(it->second, partition)) return false;
  }
  return true;
}

Partition merge_blocks(const Partition& p, std::size_t i, std::size_t j) {
  if (i == j || i >= p.blocks.size() || j >= p.blocks.size()) {
    throw std::invalid_argument("merge_blocks: invalid block indices " + std::to_string(i) +
                                ", " + std::to_string(j));
  }
  Partition out;
  Block merged = p.blocks[i];
  merged.insert(merged.end(), p.blocks[j].begin(), p.blocks[j].end());
  out.blocks.push_back(std::move(merged));
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    if (b != i && b != j) out.blocks.push_back(p.blocks[b]);
  }
  return canonicalize_partition(out, ground_size(out));
}

NotCoarserError::NotCoarserError(VoterId v, ElectionId a, ElectionId b)
    : std::invalid_argument("not coarser: voter " + std::to_string(v) + " has elections " +
                            std::to_string(a) + " and " + std::to_string(b) +
                            " simultaneous in the fine schedule but not in the coarse one"),
      voter(v),
      first_election(a),
      second_election(b) {}

std::vector<MergeStep> coarsening_chain(const Schedule& fine, const Schedule& coarse) {
  if (fine.by_voter.size() != coarse.by_voter.size()) {
    throw std::invalid_argument("coarsening_chain: schedules cover different voters");
  }
  std::vector<MergeStep> steps;
  for (const auto& [voter, fine_partition] : fine.by_voter) {
    auto it = coarse.by_voter.find(voter);
    if (it == coarse.by_voter.end()) {
      throw std::invalid_argument("coarsening_chain: voter " + std::to_string(voter) +
                                  " missing from the coarse schedule");
    }
    const std::size_t n = ground_size(fine_partition);
    const Partition target = canonicalize_partition(it->second, n);
    Partition current = canonicalize_partition(fine_partition, n);
    const auto owner = block_of(target, n);

    for (const Block& b : current.blocks) {
      for (ElectionId e : b) {
        if (owner[e] != owner[b.front()]) throw NotCoarserError(voter, b.front(), e);
      }
    }
    while (current.blocks.size() > target.blocks.size()) {
      bool merged = false;
      for (std::size_t i = 0; i < current.blocks.size() && !merged; ++i) {
        for (std::size_t j = i + 1; j < current.blocks.size() && !merged; ++j) {
          if (owner[current.blocks[i].front()] == owner[current.blocks[j].front()]) {
            steps.push_back({voter, i, j});
            current = merge_blocks(current, i, j);
            merged = true;
          }
        }
      }
    }
  }
  return steps;
}

Schedule apply_chain(Schedule schedule, const std::vector<MergeStep>& steps) {
  for (const MergeStep& step : steps) {
    auto it = schedule.by_voter.find(step.voter);
    if (it == schedule.by_voter.end()) {
      throw std::invalid_argument("apply_chain: unknown voter " + std::to_string(step.voter));
    }
    it->second = merge_blocks(it->second, step.first, step.second);
  }
  return schedule;
}

std::vector<Partition> enumerate_partitions(std::size_t n) {
  if (n > kMaxEnumeratedElections) {
    throw std::invalid_argument("enumerate_partitions: n = " + std::to_string(n) +
                                " exceeds the limit of " +
                                std::to_string(kMaxEnumeratedElections));
  }
  std::vector<Partition> out;
  if (n == 0) {
    out.push_back({});
    return out;
  }
  // Restricted growth strings: rgs[0] = 0, rgs[i] <= 1 + max(rgs[0..i-1]).
  std::vector<std::size_t> rgs(n, 0);
  while (true) {
    Partition p;
    for (std::size_t e = 0; e < n; ++e) {
      if (rgs[e] == p.blocks.size()) p.blocks.emplace_back();
      p.blocks[rgs[e]].push_back(static_cast<ElectionId>(e));
    }
    out.push_back(std::move(p));

    std::size_t i = n - 1;
    for (; i > 0; --i) {
      std::size_t prefix_max = *std::max_element(rgs.begin(), rgs.begin() + i);
      if (rgs[i] <= prefix_max) {
        ++rgs[i];
        std::fill(rgs.begin() + i + 1, rgs.end(), 0);
        break;
      }
    }
    if (i == 0) break;
  }
  return out;
}

}  // namespace sweeplab
