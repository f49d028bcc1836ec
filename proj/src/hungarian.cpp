#include "boxtrack/hungarian.hpp"

#include <algorithm>
#include <limits>

namespace boxtrack {

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
    const auto rows = static_cast<int>(cost.rows());
    const auto cols = static_cast<int>(cost.cols());
    std::vector<int> result(static_cast<std::size_t>(rows), -1);
    if (rows == 0 || cols == 0) return result;

    // Work on a square matrix padded with zero-cost dummies.
    const int n = std::max(rows, cols);
    auto c = [&](int i, int j) { return (i < rows && j < cols) ? cost(i, j) : 0.0; };
    constexpr double kInf = std::numeric_limits<double>::infinity();

    // 1-based potentials formulation; p[j] is the row matched to column j.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = kInf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    for (int j = 1; j <= n; ++j) {
        const int i = p[j] - 1;
        if (i < rows && j - 1 < cols) result[static_cast<std::size_t>(i)] = j - 1;
    }
    return result;
}

}  // namespace boxtrack
