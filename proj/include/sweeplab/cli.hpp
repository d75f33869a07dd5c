#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sweeplab/model.hpp"

namespace sweeplab {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int validation = 2;
inline constexpr int violation = 3;
}  // namespace exit_code

/// Two parties with `per_side` supporters each, p = 1/2 for everyone, and two
/// FPTP elections ("national", "state"). Schedules: "simultaneous" polls
/// both on one date, "separate" on two.
Scenario onoe_scenario(std::uint64_t per_side);
Schedule onoe_simultaneous(std::uint64_t per_side);
Schedule onoe_separate(std::uint64_t per_side);

/// Runs one CLI invocation; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sweeplab
