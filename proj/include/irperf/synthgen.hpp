//===- synthgen.hpp - Random MiniC program generator ------------*- C++ -*-===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "irperf/frontend.hpp"
#include "irperf/rng.hpp"

namespace irperf {

/// Distribution profile for program generation. Deterministic per
/// (profile, index): each program draws from its own SplitMix64 sub-stream.
struct GenProfile {
  std::map<Opcode, double> op_weights;
  std::vector<std::pair<int, double>> bitwidth_choices;  // (width, weight)
  int min_instructions = 5;
  int max_instructions = 60;
  int min_loops = 1;
  int max_loops = 3;
  double branch_probability = 0.3;
  uint64_t seed = 0;
};

/// Default corpus profile.
GenProfile defaultProfile();

/// Held-out distribution-shift profile (division-heavy, longer blocks) used
/// for generalization evaluation.
GenProfile generalizationProfile();

/// Throws Error if weights/bounds are unusable.
void validateProfile(const GenProfile &profile);

/// n single-block programs (DFG class).
std::vector<MiniProgram> genStraightline(const GenProfile &profile, int n);

/// n multi-block programs, each with at least one loop (CDFG class).
std::vector<MiniProgram> genLooping(const GenProfile &profile, int n);

}  // namespace irperf
