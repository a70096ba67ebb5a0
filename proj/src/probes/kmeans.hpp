#pragma once

#include <cstdint>
#include <vector>

#include "probes/activation_set.hpp"

namespace memaudit {

struct ClusterAssignment {
  int k = 0;
  std::vector<int> assignment;
  Matrix centroids;  // k x dim
  double inertia = 0.0;
  // Inertia after each assignment step; non-increasing.
  std::vector<double> inertia_history;
  int iterations = 0;
};

// Lloyd's algorithm from a seeded k-means++ start. Stops when an assignment
// step changes nothing or after max_iters steps. An emptied cluster takes the
// point of the largest cluster farthest from that cluster's centroid. Ties go
// to the lowest cluster index. Throws Error(Config) unless 1 <= k <= n.
ClusterAssignment kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iters = 300);

// Index of the nearest centroid for every row.
std::vector<int> assign_nearest(const Matrix& points, const Matrix& centroids);

}  // namespace memaudit
