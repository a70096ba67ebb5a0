#include "probes/kmeans.hpp"

#include <limits>

#include "util/error.hpp"
#include "util/rng.hpp"

namespace memaudit {

namespace {

double sq_dist(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

Matrix plus_plus_init(const Matrix& points, int k, Rng& rng) {
  const Eigen::Index n = points.rows();
  Matrix centroids(k, points.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  auto first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
  centroids.row(0) = points.row(first);
  chosen[static_cast<std::size_t>(first)] = true;
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = sq_dist(points, i, centroids, 0);

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : d2) total += d;
    Eigen::Index pick = -1;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= d2[static_cast<std::size_t>(i)];
        if (target < 0.0 && d2[static_cast<std::size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {  // rounding at the tail
        for (Eigen::Index i = n - 1; i >= 0; --i) {
          if (d2[static_cast<std::size_t>(i)] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // All remaining points coincide with a centroid: take any unchosen one.
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) free.push_back(i);
      }
      pick = free[rng.below(free.size())];
    }
    chosen[static_cast<std::size_t>(pick)] = true;
    centroids.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], sq_dist(points, i, centroids, c));
    }
  }
  return centroids;
}

void recompute_centroids(const Matrix& points, const std::vector<int>& assignment, Matrix& centroids,
                         std::vector<Eigen::Index>& counts) {
  const Eigen::Index k = centroids.rows();
  Matrix sums = Matrix::Zero(k, points.cols());
  counts.assign(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    sums.row(assignment[i]) += points.row(static_cast<Eigen::Index>(i));
    ++counts[static_cast<std::size_t>(assignment[i])];
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) {
      centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
  }
}

}  // namespace

std::vector<int> assign_nearest(const Matrix& points, const Matrix& centroids) {
  std::vector<int> out(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double d = sq_dist(points, i, centroids, c);
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    out[static_cast<std::size_t>(i)] = arg;
  }
  return out;
}

ClusterAssignment kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iters) {
  const Eigen::Index n = points.rows();
  if (k < 1 || k > n) {
    throw Error(ErrorCode::Config, "k-means needs 1 <= k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
  if (max_iters < 1) throw Error(ErrorCode::Config, "k-means needs max_iters >= 1");
  if (!points.allFinite()) throw Error(ErrorCode::InvalidArgument, "k-means input has non-finite entries");

  Rng rng(seed);
  ClusterAssignment out;
  out.k = k;
  out.centroids = plus_plus_init(points, k, rng);
  std::vector<Eigen::Index> counts;

  for (int iter = 0; iter < max_iters; ++iter) {
    std::vector<int> next = assign_nearest(points, out.centroids);
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) inertia += sq_dist(points, i, out.centroids, next[static_cast<std::size_t>(i)]);
    out.inertia_history.push_back(inertia);
    out.inertia = inertia;
    out.iterations = iter + 1;
    const bool converged = next == out.assignment;
    out.assignment = std::move(next);
    if (converged) break;

    recompute_centroids(points, out.assignment, out.centroids, counts);
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      const auto largest = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (out.assignment[static_cast<std::size_t>(i)] != largest) continue;
        const double d = sq_dist(points, i, out.centroids, largest);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      out.assignment[static_cast<std::size_t>(far)] = c;
      recompute_centroids(points, out.assignment, out.centroids, counts);
    }
  }
  return out;
}

}  // namespace memaudit
