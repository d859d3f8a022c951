#pragma once

#include <vector>

#include "pcnc/types.hpp"

namespace pcnc {

/// zones[l]: APs within the reference distance of AP l (ascending, includes l).
struct ZoneSet {
  std::vector<std::vector<int>> zones;
};

/// Disjoint phase-aligned AP clusters covering all APs. Within a cluster the APs are
/// stored in ascending index order; this is the stacking order of G_kc and W_kc.
struct ClusterSet {
  std::vector<std::vector<int>> clusters;
  std::vector<int> cluster_of;  // AP -> cluster index
  std::vector<int> seed_ap;     // AP whose zone (or group) spawned each cluster

  int size() const { return static_cast<int>(clusters.size()); }
  int num_aps() const { return static_cast<int>(cluster_of.size()); }

  /// Builds the lookup tables; throws std::invalid_argument unless `clusters`
  /// partitions {0..num_aps-1}.
  static ClusterSet from_clusters(std::vector<std::vector<int>> clusters, int num_aps,
                                  std::vector<int> seeds = {});
};

ZoneSet build_zones(const std::vector<Point>& ap_positions, double ref_distance, double side);

/// Greedy largest-zone selection; size ties go to the zone with the largest
/// sum_k ||G_k,zone||_F^2, exact ties to the lowest AP index.
ClusterSet cluster_aps(const ZoneSet& zones, const ChannelGrid& channels);

/// Nearest-neighbor groups of `target_size` APs within `ref_distance` of the group seed.
ClusterSet even_distance_clustering(const std::vector<Point>& ap_positions, double ref_distance,
                                    double side, int target_size);

ClusterSet fully_coherent(int num_aps);
ClusterSet fully_noncoherent(int num_aps);

/// [G_k,l1 ... G_k,l|C|] in cluster order.
CMatrix collective_channel(const ChannelGrid& channels, const std::vector<int>& cluster, int k);

/// Largest toroidal AP-AP distance inside any cluster (0 for singletons).
double max_cluster_diameter(const ClusterSet& clusters, const std::vector<Point>& ap_positions,
                            double side);

}  // namespace pcnc
