#pragma once

#include <cstddef>
#include <vector>

namespace nodalab {

/// Minimum-cost perfect assignment on an n x n cost matrix (row-major),
/// by the Hungarian method with potentials, O(n^3). Returns the column
/// assigned to each row. Among optimal assignments the result is a
/// deterministic function of the matrix.
std::vector<std::size_t> min_cost_assignment(const std::vector<double>& cost, std::size_t n);

}  // namespace nodalab
