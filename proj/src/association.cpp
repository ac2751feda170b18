#include "fusetrack/association.hpp"

#include "fusetrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fusetrack {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SquareSolution {
  std::vector<int> col_of_row;
  std::vector<double> u;  // row potentials
  std::vector<double> v;  // column potentials
};

// Shortest augmenting path Hungarian algorithm on a dense square matrix (O(n^3)).
SquareSolution solve_square(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
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
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
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

  SquareSolution sol;
  sol.col_of_row.assign(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) sol.col_of_row[p[j] - 1] = j - 1;
  }
  sol.u.assign(u.begin() + 1, u.end());
  sol.v.assign(v.begin() + 1, v.end());
  return sol;
}

// Walks the optimal face (edges with zero reduced cost) to the lexicographically
// smallest perfect matching. Row i is fixed to the smallest tight column that still
// admits a perfect matching on the remaining rows, found by an alternating-cycle search.
void lexicographic_refine(const Eigen::MatrixXd& a, SquareSolution& sol) {
  const int n = static_cast<int>(a.rows());
  if (n < 2) return;
  const double tol = 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()) * n;
  auto tight = [&](int i, int j) { return a(i, j) - sol.u[i] - sol.v[j] <= tol; };

  std::vector<int>& col_of_row = sol.col_of_row;
  std::vector<int> row_of_col(n);
  for (int i = 0; i < n; ++i) row_of_col[col_of_row[i]] = i;
  std::vector<char> fixed_row(n, 0);
  std::vector<int> parent_row(n);
  std::vector<char> seen_row(n);
  std::vector<int> queue;
  queue.reserve(n);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < col_of_row[i]; ++j) {
      if (!tight(i, j)) continue;
      const int holder = row_of_col[j];
      if (fixed_row[holder]) continue;
      // Alternating path holder -> ... -> a row that can take the column row i releases.
      const int target_col = col_of_row[i];
      std::fill(seen_row.begin(), seen_row.end(), 0);
      queue.assign(1, holder);
      seen_row[holder] = 1;
      seen_row[i] = 1;
      int found_row = -1;
      for (std::size_t q = 0; q < queue.size() && found_row < 0; ++q) {
        const int r = queue[q];
        for (int c = 0; c < n; ++c) {
          if (c == j || c == col_of_row[r] || !tight(r, c)) continue;
          if (c == target_col) {
            found_row = r;
            break;
          }
          const int next = row_of_col[c];
          if (seen_row[next] || fixed_row[next]) continue;
          seen_row[next] = 1;
          parent_row[next] = r;
          queue.push_back(next);
        }
      }
      if (found_row < 0) continue;
      int r = found_row;
      int new_col = target_col;
      while (true) {
        const int old_col = col_of_row[r];
        col_of_row[r] = new_col;
        row_of_col[new_col] = r;
        if (r == holder) break;
        new_col = old_col;
        r = parent_row[r];
      }
      col_of_row[i] = j;
      row_of_col[j] = i;
      break;
    }
    fixed_row[i] = 1;
  }
}

// Inverse of the lower triangle of `l` by forward substitution.
Mat4 lower_inverse(const Mat4& l) {
  Mat4 w = Mat4::Zero();
  for (int j = 0; j < 4; ++j) {
    w(j, j) = 1.0 / l(j, j);
    for (int i = j + 1; i < 4; ++i) {
      double acc = 0.0;
      for (int k = j; k < i; ++k) acc += l(i, k) * w(k, j);
      w(i, j) = -acc / l(i, i);
    }
  }
  return w;
}

}  // namespace

CostMatrix mahalanobis_cost(std::span<const StateEstimate> tracks,
                            std::span<const Vec4> observations, const Mat4& obs_cov,
                            CostCovariance mode) {
  const auto n_tracks = static_cast<Eigen::Index>(tracks.size());
  const auto n_obs = static_cast<Eigen::Index>(observations.size());
  CostMatrix costs(n_tracks, n_obs);
  // d2 = |L^-1 diff|^2 with cov = L L^T; L^-1 is lower triangular.
  std::vector<Mat4> whiten(tracks.size());
  for (Eigen::Index k = 0; k < n_tracks; ++k) {
    const StateEstimate& track = tracks[static_cast<std::size_t>(k)];
    const Mat4 cov = mode == CostCovariance::Track ? track.cov : Mat4(track.cov + obs_cov);
    const Eigen::LLT<Mat4> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw SingularInnovationError("mahalanobis_cost: covariance of track " +
                                    std::to_string(k) + " is not positive definite");
    }
    whiten[static_cast<std::size_t>(k)] = lower_inverse(llt.matrixLLT());
  }
  for (Eigen::Index i = 0; i < n_obs; ++i) {
    const Vec4& z = observations[static_cast<std::size_t>(i)];
    double* column = costs.col(i).data();
    for (Eigen::Index k = 0; k < n_tracks; ++k) {
      const Mat4& w = whiten[static_cast<std::size_t>(k)];
      const Vec4 d = tracks[static_cast<std::size_t>(k)].mean - z;
      const double y0 = w(0, 0) * d(0);
      const double y1 = w(1, 0) * d(0) + w(1, 1) * d(1);
      const double y2 = w(2, 0) * d(0) + w(2, 1) * d(1) + w(2, 2) * d(2);
      const double y3 = w(3, 0) * d(0) + w(3, 1) * d(1) + w(3, 2) * d(2) + w(3, 3) * d(3);
      column[k] = y0 * y0 + y1 * y1 + y2 * y2 + y3 * y3;
    }
  }
  return costs;
}

Assignment hungarian_solve(const CostMatrix& costs, std::optional<double> forbid_above) {
  const int n_rows = static_cast<int>(costs.rows());
  const int n_cols = static_cast<int>(costs.cols());
  Assignment out;
  auto forbidden = [&](double c) {
    return !std::isfinite(c) || (forbid_above && c >= *forbid_above);
  };

  if (n_rows == 0 || n_cols == 0) {
    for (int k = 0; k < n_rows; ++k) out.unassigned_tracks.push_back(k);
    for (int i = 0; i < n_cols; ++i) out.unassigned_obs.push_back(i);
    return out;
  }

  // Every row strictly prefers a different column: the row minima are a lower bound that
  // is attained, and strictness makes that optimum unique.
  if (n_rows <= n_cols) {
    std::vector<int> best(n_rows);
    std::vector<char> taken(n_cols, 0);
    bool distinct = true;
    for (int k = 0; k < n_rows && distinct; ++k) {
      double lo = kInf, second = kInf;
      int arg = -1;
      for (int i = 0; i < n_cols; ++i) {
        const double c = costs(k, i);
        if (c < lo) {
          second = lo;
          lo = c;
          arg = i;
        } else if (c < second) {
          second = c;
        }
      }
      distinct = arg >= 0 && lo < second && !forbidden(lo) && !taken[arg];
      if (distinct) {
        best[k] = arg;
        taken[arg] = 1;
      }
    }
    if (distinct) {
      for (int k = 0; k < n_rows; ++k) out.pairs.emplace_back(k, best[k]);
      for (int i = 0; i < n_cols; ++i)
        if (!taken[i]) out.unassigned_obs.push_back(i);
      return out;
    }
  }

  const int n = std::max(n_rows, n_cols);
  double dummy = 0.0;
  if (forbid_above) {
    dummy = *forbid_above;
  } else {
    double max_real = 0.0;
    for (Eigen::Index k = 0; k < costs.rows(); ++k)
      for (Eigen::Index i = 0; i < costs.cols(); ++i)
        if (std::isfinite(costs(k, i))) max_real = std::max(max_real, std::abs(costs(k, i)));
    // Larger than any sum of real entries, so cardinality of real pairs is maximized first.
    dummy = (max_real + 1.0) * (n + 1);
  }

  Eigen::MatrixXd square = Eigen::MatrixXd::Constant(n, n, dummy);
  for (int k = 0; k < n_rows; ++k)
    for (int i = 0; i < n_cols; ++i)
      if (!forbidden(costs(k, i))) square(k, i) = costs(k, i);

  SquareSolution sol = solve_square(square);
  lexicographic_refine(square, sol);

  std::vector<char> obs_used(n_cols, 0);
  for (int k = 0; k < n_rows; ++k) {
    const int i = sol.col_of_row[k];
    if (i < n_cols && !forbidden(costs(k, i))) {
      out.pairs.emplace_back(k, i);
      obs_used[i] = 1;
    } else {
      out.unassigned_tracks.push_back(k);
    }
  }
  for (int i = 0; i < n_cols; ++i)
    if (!obs_used[i]) out.unassigned_obs.push_back(i);
  return out;
}

double assignment_cost(const CostMatrix& costs, const Assignment& assignment) {
  double total = 0.0;
  for (const auto& [k, i] : assignment.pairs) total += costs(k, i);
  return total;
}

}  // namespace fusetrack
