#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cpforge/sampler.hpp"
#include "cpforge/standardization.hpp"

namespace cpforge {

struct KMeansResult {
  std::vector<int> assignments;
  Points centroids;
  double inertia = 0.0;
  int iterations = 0;
};

inline constexpr int kMaxLloydIterations = 100;

// Lloyd's algorithm. The first centre is a seeded uniform pick; each further
// centre is the point farthest from all chosen centres (ties -> lowest index).
// Stops when assignments stop changing or after 100 iterations. Throws
// Error{KTooLarge} if k > |X| and Error{InvalidArgument} if k < 2 or X holds
// NaN.
KMeansResult kmeans(const Points& x, int k, std::uint64_t seed);

// Total squared distance of every point to the centroid of its cluster.
double inertia(const Points& x, std::span<const int> assignments, const Points& centroids);

// Mean silhouette; points in singleton clusters contribute 0, and a point
// with a == b (including a == b == 0) contributes 0. Throws
// Error{SingleCluster} when fewer than two clusters are present.
double silhouette(const Points& x, std::span<const int> assignments);

struct ClusterResult {
  int k = 0;
  std::vector<int> assignments;  // indexed by position in X
  Points centroids;              // standardized space
  std::vector<int> medoid_ids;   // one per cluster
  double silhouette = 0.0;
  std::uint64_t seed = 0;

  std::vector<int> sizes() const;
};

// Highest score wins; exact ties keep the smaller k.
int choose_best_k(std::span<const std::pair<int, double>> scores);

// Runs kmeans for every k in [k_min, k_max] (k capped at |X| - 1 so the
// silhouette stays defined) and keeps the best silhouette.
ClusterResult select_k(const Points& x, int k_min, int k_max, std::uint64_t seed,
                       std::span<const int> ids = {});

// Medoid per cluster: member minimizing the summed Euclidean distance to the
// other members; ties -> lowest id. `ids[i]` is the dataset id of X row i
// (defaults to i).
std::vector<int> representatives(const ClusterResult& result, const Points& x,
                                 std::span<const int> ids = {});

Points feature_points(const Dataset& dataset);

// Standardizes dataset features and runs select_k over [k_min, k_max].
ClusterResult cluster_dataset(const Dataset& dataset, int k_min, int k_max, std::uint64_t seed);

// Cluster report: {"k","silhouette","medoid_ids","sizes","seed"}.
std::string cluster_report_json(const ClusterResult& result);

struct ClusterReport {
  int k = 0;
  double silhouette = 0.0;
  std::vector<int> medoid_ids;
  std::vector<int> sizes;
  std::uint64_t seed = 0;
};

ClusterReport parse_cluster_report(const std::string& text);
void write_cluster_report(const ClusterResult& result, const std::string& path);
ClusterReport read_cluster_report(const std::string& path);

}  // namespace cpforge
