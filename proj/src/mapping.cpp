#include "slio/mapping.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>

namespace slio {

namespace {

constexpr std::int64_t kKeyOffset = 1 << 20;  // cells span +/-2^20 per axis

std::array<std::int64_t, 3> cell_coords(const Eigen::Vector3d& p, double cell) {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell)),
          static_cast<std::int64_t>(std::floor(p.y() / cell)),
          static_cast<std::int64_t>(std::floor(p.z() / cell))};
}

std::int64_t pack(const std::array<std::int64_t, 3>& c) {
  return ((c[0] + kKeyOffset) << 42) | ((c[1] + kKeyOffset) << 21) | (c[2] + kKeyOffset);
}

struct Candidate {
  double dist2 = 0.0;
  std::uint32_t index = 0;
  // Ties in distance rank by insertion order.
  bool worse_than(const Candidate& o) const {
    return dist2 > o.dist2 || (dist2 == o.dist2 && index > o.index);
  }
};

}  // namespace

PointMap::PointMap(double cell_size) : cell_size_(cell_size) {
  if (cell_size <= 0.0) {
    throw std::invalid_argument("point map cell size must be positive");
  }
}

std::int64_t PointMap::cell_key(const Eigen::Vector3d& p, double cell) const {
  return pack(cell_coords(p, cell));
}

int PointMap::insert_scan(std::span<const Eigen::Vector3d> points_world, double voxel_size) {
  if (voxel_size <= 0.0) {
    throw std::invalid_argument("voxel size must be positive");
  }
  std::unique_lock lock(mutex_);
  int added = 0;
  for (const Eigen::Vector3d& p : points_world) {
    if (!p.allFinite()) {
      continue;
    }
    const std::int64_t voxel = cell_key(p, voxel_size);
    if (!occupied_voxels_.insert(voxel).second) {
      continue;
    }
    const auto index = static_cast<std::uint32_t>(points_.size());
    const auto coords = cell_coords(p, cell_size_);
    if (points_.empty()) {
      cell_min_ = coords;
      cell_max_ = coords;
    } else {
      for (int axis = 0; axis < 3; ++axis) {
        cell_min_[axis] = std::min(cell_min_[axis], coords[axis]);
        cell_max_[axis] = std::max(cell_max_[axis], coords[axis]);
      }
    }
    points_.push_back(p);
    grid_[pack(coords)].push_back(index);
    ++added;
  }
  return added;
}

std::vector<Neighbor> PointMap::knn(const Eigen::Vector3d& query, int k,
                                    double max_distance) const {
  std::shared_lock lock(mutex_);
  std::vector<Neighbor> result;
  if (k <= 0 || points_.empty()) {
    return result;
  }

  const auto qc = cell_coords(query, cell_size_);

  // Max-heap of the best k candidates seen so far.
  std::vector<Candidate> heap;
  heap.reserve(static_cast<std::size_t>(k) + 1);
  const auto heap_cmp = [](const Candidate& a, const Candidate& b) {
    return b.worse_than(a);
  };

  const double max_dist2 =
      std::isfinite(max_distance) ? max_distance * max_distance
                                  : std::numeric_limits<double>::infinity();

  const auto visit_cell = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
    const auto it = grid_.find(pack({x, y, z}));
    if (it == grid_.end()) {
      return;
    }
    for (const std::uint32_t idx : it->second) {
      Candidate c{(points_[idx] - query).squaredNorm(), idx};
      if (c.dist2 > max_dist2) {
        continue;
      }
      if (static_cast<int>(heap.size()) < k) {
        heap.push_back(c);
        std::push_heap(heap.begin(), heap.end(), heap_cmp);
      } else if (heap.front().worse_than(c)) {
        std::pop_heap(heap.begin(), heap.end(), heap_cmp);
        heap.back() = c;
        std::push_heap(heap.begin(), heap.end(), heap_cmp);
      }
    }
  };

  // Expanding Chebyshev shells; any point in a cell at shell distance s is
  // at least (s - 1) * cell_size away, which bounds the search. Shells past
  // the occupied cell bounds cannot contain points.
  std::int64_t max_shell = 0;
  for (int axis = 0; axis < 3; ++axis) {
    max_shell = std::max({max_shell, std::abs(cell_min_[axis] - qc[axis]),
                          std::abs(cell_max_[axis] - qc[axis])});
  }

  for (std::int64_t s = 0; s <= max_shell; ++s) {
    const double shell_min = static_cast<double>(s - 1) * cell_size_;
    if (shell_min > max_distance) {
      break;
    }
    if (static_cast<int>(heap.size()) == k &&
        shell_min * shell_min > heap.front().dist2) {
      break;
    }
    if (s == 0) {
      visit_cell(qc[0], qc[1], qc[2]);
      continue;
    }
    for (std::int64_t dx = -s; dx <= s; ++dx) {
      for (std::int64_t dy = -s; dy <= s; ++dy) {
        visit_cell(qc[0] + dx, qc[1] + dy, qc[2] - s);
        visit_cell(qc[0] + dx, qc[1] + dy, qc[2] + s);
      }
    }
    for (std::int64_t dz = -s + 1; dz <= s - 1; ++dz) {
      for (std::int64_t dy = -s; dy <= s; ++dy) {
        visit_cell(qc[0] - s, qc[1] + dy, qc[2] + dz);
        visit_cell(qc[0] + s, qc[1] + dy, qc[2] + dz);
      }
      for (std::int64_t dx = -s + 1; dx <= s - 1; ++dx) {
        visit_cell(qc[0] + dx, qc[1] - s, qc[2] + dz);
        visit_cell(qc[0] + dx, qc[1] + s, qc[2] + dz);
      }
    }
  }

  std::sort(heap.begin(), heap.end(),
            [](const Candidate& a, const Candidate& b) { return b.worse_than(a); });
  result.reserve(heap.size());
  for (const Candidate& c : heap) {
    result.push_back(Neighbor{c.index, points_[c.index], std::sqrt(c.dist2)});
  }
  return result;
}

std::optional<PlaneFit> PointMap::query_plane(const Eigen::Vector3d& query_world,
                                              const PlaneQueryParams& params) const {
  const std::vector<Neighbor> neighbors = knn(query_world, params.knn, params.max_distance);
  if (static_cast<int>(neighbors.size()) < params.knn) {
    return std::nullopt;
  }

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const Neighbor& n : neighbors) {
    centroid += n.point;
  }
  centroid /= static_cast<double>(neighbors.size());

  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const Neighbor& n : neighbors) {
    const Eigen::Vector3d d = n.point - centroid;
    scatter += d * d.transpose();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  const double count = static_cast<double>(neighbors.size());
  const double rms = std::sqrt(std::max(0.0, eig.eigenvalues()(0)) / count);
  if (rms >= params.plane_tol) {
    return std::nullopt;
  }
  const double spread = std::sqrt(std::max(0.0, eig.eigenvalues()(1)) / count);
  if (spread < params.min_spread) {
    return std::nullopt;
  }

  PlaneFit fit;
  fit.normal = eig.eigenvectors().col(0);
  if (fit.normal.dot(query_world - centroid) < 0.0) {
    fit.normal = -fit.normal;
  }
  fit.anchor = centroid;
  fit.rms_distance = rms;
  fit.neighbor_count = static_cast<int>(neighbors.size());
  return fit;
}

void PointMap::start_new_local_map(const Eigen::Vector3d& origin) {
  std::unique_lock lock(mutex_);
  local_origin_ = origin;
}

Eigen::Vector3d PointMap::local_map_origin() const {
  std::shared_lock lock(mutex_);
  return local_origin_;
}

std::size_t PointMap::size() const {
  std::shared_lock lock(mutex_);
  return points_.size();
}

std::vector<Eigen::Vector3d> PointMap::points_snapshot() const {
  std::shared_lock lock(mutex_);
  return points_;
}

void PointMap::export_xyz(std::ostream& out) const {
  std::shared_lock lock(mutex_);
  char line[128];
  for (const Eigen::Vector3d& p : points_) {
    std::snprintf(line, sizeof(line), "%.9g %.9g %.9g\n", p.x(), p.y(), p.z());
    out << line;
  }
}

}  // namespace slio
