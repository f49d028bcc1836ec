#pragma once

#include <Eigen/Core>

#include <vector>

namespace boxtrack {

/// Minimum-cost assignment on a rows x cols cost matrix (Kuhn-Munkres with
/// potentials, O(n^3)). Returns, for each row, the assigned column or -1 when
/// rows outnumber columns.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace boxtrack
