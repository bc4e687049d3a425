//===- rng.hpp - Splittable deterministic PRNG ------------------*- C++ -*-===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// SplitMix64 stream with explicit splitting. All draws are implemented here
// rather than through <random> distributions so corpora and training runs are
// bit-identical across standard libraries.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <vector>

#include "irperf/graph.hpp"

namespace irperf {

class Rng {
public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Derives an independent stream; the parent advances by one draw.
  Rng split() { return Rng(next() ^ 0xa5a5a5a5deadbeefULL); }

  /// Uniform in [0, bound) by rejection; bound > 0.
  uint64_t below(uint64_t bound) {
    if (bound == 0) throw Error("Rng::below: zero bound");
    uint64_t threshold = -bound % bound;
    for (;;) {
      uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform integer in [lo, hi] inclusive.
  int64_t range(int64_t lo, int64_t hi) {
    if (lo > hi) throw Error("Rng::range: empty range");
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo) + 1));
  }

  /// Uniform in [0, 1).
  double real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return real() < p; }

  /// Index drawn proportionally to non-negative weights (at least one > 0).
  size_t weighted(const std::vector<double> &weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) throw Error("Rng::weighted: all weights zero");
    double x = real() * total;
    for (size_t i = 0; i < weights.size(); ++i) {
      x -= weights[i];
      if (x < 0.0) return i;
    }
    return weights.size() - 1;
  }

private:
  uint64_t state_;
};

}  // namespace irperf
