#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace slio {

struct PlaneFit {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d anchor = Eigen::Vector3d::Zero();
  double rms_distance = 0.0;
  int neighbor_count = 0;
};

struct PlaneQueryParams {
  int knn = 5;
  double max_distance = 1.0;   // correspondence radius, meters
  double plane_tol = 0.05;     // max RMS point-plane distance, meters
  /// Minimum RMS neighbor spread along the second tangent direction.
  /// Nearly collinear neighborhoods fit a plane with an arbitrary normal
  /// and must be rejected.
  double min_spread = 0.1;
};

struct Neighbor {
  std::size_t index = 0;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  double distance = 0.0;
};

/// World-frame point map over a uniform voxel-hash index. Insertion applies
/// a persistent first-arrival voxel filter, so re-inserting a scan adds
/// nothing. Queries are exact k-NN over the stored points with distance ties
/// broken by insertion order. Thread contract: many concurrent readers XOR
/// one writer, enforced internally with a shared mutex.
class PointMap {
 public:
  explicit PointMap(double cell_size = 0.5);

  /// Voxel-downsamples at voxel_size (first point per voxel wins, across the
  /// whole map history) and inserts the survivors. Returns the number of
  /// points actually added.
  int insert_scan(std::span<const Eigen::Vector3d> points_world, double voxel_size);

  /// Exact k nearest stored points within max_distance of the query.
  std::vector<Neighbor> knn(const Eigen::Vector3d& query, int k,
                            double max_distance = std::numeric_limits<double>::infinity()) const;

  /// Least-squares plane through the k nearest neighbors of the query:
  /// anchor at the neighbor centroid, normal along the thinnest scatter
  /// direction signed toward the query. Empty when fewer than k neighbors
  /// are in range or the fit residual exceeds plane_tol.
  std::optional<PlaneFit> query_plane(const Eigen::Vector3d& query_world,
                                      const PlaneQueryParams& params = {}) const;

  void start_new_local_map(const Eigen::Vector3d& origin);
  Eigen::Vector3d local_map_origin() const;

  std::size_t size() const;
  bool empty() const { return size() == 0; }
  std::vector<Eigen::Vector3d> points_snapshot() const;

  /// One "x y z" line per stored point.
  void export_xyz(std::ostream& out) const;

 private:
  std::int64_t cell_key(const Eigen::Vector3d& p, double cell) const;

  mutable std::shared_mutex mutex_;
  double cell_size_;
  std::vector<Eigen::Vector3d> points_;
  std::unordered_map<std::int64_t, std::vector<std::uint32_t>> grid_;
  std::unordered_set<std::int64_t> occupied_voxels_;
  std::array<std::int64_t, 3> cell_min_{};
  std::array<std::int64_t, 3> cell_max_{};
  Eigen::Vector3d local_origin_ = Eigen::Vector3d::Zero();
};

}  // namespace slio
