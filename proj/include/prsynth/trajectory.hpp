#pragma once

#include "prsynth/math.hpp"

#include <vector>

namespace prsynth {

/// Time-sampled platform motion. xdd[k] is the acceleration held over the
/// interval from sample k to k + 1 (zero at the last sample).
struct Trajectory {
  double dt = 0.01;  // s
  std::vector<VecX> x;
  std::vector<VecX> xd;
  std::vector<VecX> xdd;

  std::size_t size() const { return x.size(); }
  double time(std::size_t k) const { return dt * static_cast<double>(k); }
};

}  // namespace prsynth
