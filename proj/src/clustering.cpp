#include "pcnc/clustering.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>

#include "pcnc/geometry_channel.hpp"

namespace pcnc {

ClusterSet ClusterSet::from_clusters(std::vector<std::vector<int>> clusters, int num_aps,
                                     std::vector<int> seeds) {
  ClusterSet out;
  out.cluster_of.assign(num_aps, -1);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    auto& members = clusters[c];
    if (members.empty()) throw std::invalid_argument("ClusterSet: empty cluster");
    std::sort(members.begin(), members.end());
    for (int l : members) {
      if (l < 0 || l >= num_aps) throw std::invalid_argument("ClusterSet: AP index out of range");
      if (out.cluster_of[l] != -1) throw std::invalid_argument("ClusterSet: overlapping clusters");
      out.cluster_of[l] = static_cast<int>(c);
    }
  }
  for (int l = 0; l < num_aps; ++l)
    if (out.cluster_of[l] == -1) throw std::invalid_argument("ClusterSet: AP not covered");
  if (seeds.empty()) {
    for (const auto& members : clusters) seeds.push_back(members.front());
  }
  out.clusters = std::move(clusters);
  out.seed_ap = std::move(seeds);
  return out;
}

ZoneSet build_zones(const std::vector<Point>& ap_positions, double ref_distance, double side) {
  const int L = static_cast<int>(ap_positions.size());
  ZoneSet z;
  z.zones.resize(L);
  for (int l = 0; l < L; ++l)
    for (int m = 0; m < L; ++m)
      if (m == l || wrap_distance(ap_positions[l], ap_positions[m], side) <= ref_distance)
        z.zones[l].push_back(m);
  return z;
}

ClusterSet cluster_aps(const ZoneSet& zones, const ChannelGrid& channels) {
  const int L = static_cast<int>(zones.zones.size());
  // Per-AP channel energy summed over UEs; the zone score is additive over its APs.
  std::vector<double> energy(L, 0.0);
  for (std::size_t k = 0; k < channels.rows(); ++k)
    for (int l = 0; l < L && l < static_cast<int>(channels.cols()); ++l)
      energy[l] += channels(k, l).squaredNorm();

  std::vector<std::vector<int>> current = zones.zones;
  std::vector<std::vector<int>> clusters;
  std::vector<int> seeds;

  auto largest = [&] {
    std::size_t m = 0;
    for (const auto& z : current) m = std::max(m, z.size());
    return m;
  };

  for (std::size_t lmax = largest(); lmax > 1; lmax = largest()) {
    int best = -1;
    double best_score = -1.0;
    for (int l = 0; l < L; ++l) {
      if (current[l].size() != lmax) continue;
      double score = 0.0;
      for (int m : current[l]) score += energy[m];
      if (score > best_score) {  // strict: lowest index wins exact ties
        best_score = score;
        best = l;
      }
    }
    std::vector<int> chosen = current[best];
    clusters.push_back(chosen);
    seeds.push_back(best);
    for (auto& z : current) {
      std::erase_if(z, [&](int m) {
        return std::find(chosen.begin(), chosen.end(), m) != chosen.end();
      });
    }
  }

  // Leftover zones are singletons; several zones may hold the same AP.
  std::vector<bool> used(L, false);
  for (const auto& c : clusters)
    for (int m : c) used[m] = true;
  for (int l = 0; l < L; ++l) {
    assert(current[l].size() <= 1);
    for (int m : current[l]) {
      if (used[m]) continue;
      used[m] = true;
      clusters.push_back({m});
      seeds.push_back(m);
    }
  }
  return ClusterSet::from_clusters(std::move(clusters), L, std::move(seeds));
}

ClusterSet even_distance_clustering(const std::vector<Point>& ap_positions, double ref_distance,
                                    double side, int target_size) {
  if (target_size < 1) throw std::invalid_argument("even_distance_clustering: target_size < 1");
  const int L = static_cast<int>(ap_positions.size());
  std::vector<bool> assigned(L, false);
  std::vector<std::vector<int>> clusters;
  std::vector<int> seeds;
  for (int s = 0; s < L; ++s) {
    if (assigned[s]) continue;
    assigned[s] = true;
    std::vector<std::pair<double, int>> cand;
    for (int m = 0; m < L; ++m) {
      if (assigned[m]) continue;
      const double d = wrap_distance(ap_positions[s], ap_positions[m], side);
      if (d <= ref_distance) cand.emplace_back(d, m);
    }
    std::sort(cand.begin(), cand.end());
    std::vector<int> group{s};
    for (const auto& [d, m] : cand) {
      if (static_cast<int>(group.size()) >= target_size) break;
      group.push_back(m);
      assigned[m] = true;
    }
    clusters.push_back(std::move(group));
    seeds.push_back(s);
  }
  return ClusterSet::from_clusters(std::move(clusters), L, std::move(seeds));
}

ClusterSet fully_coherent(int num_aps) {
  std::vector<int> all(num_aps);
  std::iota(all.begin(), all.end(), 0);
  return ClusterSet::from_clusters({all}, num_aps, {0});
}

ClusterSet fully_noncoherent(int num_aps) {
  std::vector<std::vector<int>> c;
  for (int l = 0; l < num_aps; ++l) c.push_back({l});
  return ClusterSet::from_clusters(std::move(c), num_aps);
}

CMatrix collective_channel(const ChannelGrid& channels, const std::vector<int>& cluster, int k) {
  const auto& first = channels(k, cluster.front());
  const Eigen::Index N = first.rows();
  const Eigen::Index M = first.cols();
  CMatrix g(N, M * static_cast<Eigen::Index>(cluster.size()));
  for (std::size_t j = 0; j < cluster.size(); ++j)
    g.middleCols(static_cast<Eigen::Index>(j) * M, M) = channels(k, cluster[j]);
  return g;
}

double max_cluster_diameter(const ClusterSet& clusters, const std::vector<Point>& ap_positions,
                            double side) {
  double best = 0.0;
  for (const auto& c : clusters.clusters)
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j)
        best = std::max(best, wrap_distance(ap_positions[c[i]], ap_positions[c[j]], side));
  return best;
}

}  // namespace pcnc
