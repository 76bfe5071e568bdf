#pragma once

// Seeded sampling of domain values for randomized checks.

#include <cstdint>
#include <random>
#include <vector>

#include "ringcirc/algebra.hpp"

namespace ringcirc {

using Rng = std::mt19937_64;

/// Integers (and rational numerators, adjoined coefficients) in
/// [-range, range]; rational denominators in [1, range]; residues uniform.
Value random_value(const Domain& d, Rng& rng, long range = 3);
std::vector<Value> random_values(const Domain& d, std::size_t count, Rng& rng, long range = 3);

}  // namespace ringcirc
