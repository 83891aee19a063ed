#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "ppi/errors.hpp"

namespace ppi {

/// Nonnegative share vector summing to 1: the unit of comparison for
/// retrospective, consistent and inconsistent priority profiles.
struct AllocationProfile {
  std::vector<double> shares;

  int size() const { return static_cast<int>(shares.size()); }

  double sum() const {
    return std::accumulate(shares.begin(), shares.end(), 0.0);
  }

  void validate() const {
    if (shares.empty()) throw DegenerateVector("empty allocation profile");
    for (double s : shares)
      if (!std::isfinite(s) || s < 0.0)
        throw DegenerateVector("allocation shares must be finite and >= 0");
    if (std::abs(sum() - 1.0) > 1e-9)
      throw DegenerateVector("allocation shares must sum to 1");
  }
};

}  // namespace ppi
