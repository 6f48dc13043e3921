#include "cpforge/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpforge/error.hpp"
#include "cpforge/io_util.hpp"
#include "json.hpp"

namespace cpforge {

namespace {

using json = nlohmann::json;

int nearest_centroid(std::span<const double> p, const Points& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    const double d = squared_distance(p, centroids.row(j));
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(j);
    }
  }
  return best;
}

std::vector<int> assign_all(const Points& x, const Points& centroids) {
  std::vector<int> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = nearest_centroid(x.row(i), centroids);
  return out;
}

Points compute_centroids(const Points& x, std::span<const int> assignments, int k) {
  Points c(static_cast<std::size_t>(k), x.dim());
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto row = c.row(static_cast<std::size_t>(assignments[i]));
    const auto p = x.row(i);
    for (std::size_t j = 0; j < x.dim(); ++j) row[j] += p[j];
    ++counts[static_cast<std::size_t>(assignments[i])];
  }
  for (int j = 0; j < k; ++j) {
    if (counts[j] == 0) continue;
    for (auto& v : c.row(static_cast<std::size_t>(j))) v /= counts[j];
  }
  return c;
}

// Each empty cluster takes the point farthest from its current centroid
// among clusters that can spare one.
void repair_empty(const Points& x, std::vector<int>& assignments, Points& centroids, int k) {
  for (int j = 0; j < k; ++j) {
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int a : assignments) ++counts[static_cast<std::size_t>(a)];
    if (counts[static_cast<std::size_t>(j)] > 0) continue;
    int steal = -1;
    double far = -1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const int a = assignments[i];
      if (counts[static_cast<std::size_t>(a)] < 2) continue;
      const double d = squared_distance(x.row(i), centroids.row(static_cast<std::size_t>(a)));
      if (d > far) {
        far = d;
        steal = static_cast<int>(i);
      }
    }
    if (steal < 0) continue;
    assignments[static_cast<std::size_t>(steal)] = j;
    auto dst = centroids.row(static_cast<std::size_t>(j));
    const auto src = x.row(static_cast<std::size_t>(steal));
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

}  // namespace

KMeansResult kmeans(const Points& x, int k, std::uint64_t seed) {
  const std::size_t n = x.size();
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k must be >= 2");
  if (static_cast<std::size_t>(k) > n)
    throw Error(ErrorCode::KTooLarge,
                "k=" + std::to_string(k) + " exceeds point count " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i)
    for (double v : x.row(i))
      if (std::isnan(v)) throw Error(ErrorCode::InvalidArgument, "input contains NaN");

  Points centroids(static_cast<std::size_t>(k), x.dim());
  {
    Rng rng(seed);
    std::vector<bool> chosen(n, false);
    std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
    std::size_t pick = static_cast<std::size_t>(rng.below(n));
    for (int j = 0; j < k; ++j) {
      chosen[pick] = true;
      const auto src = x.row(pick);
      std::copy(src.begin(), src.end(), centroids.row(static_cast<std::size_t>(j)).begin());
      if (j + 1 == k) break;
      double far = -1.0;
      std::size_t next = 0;
      for (std::size_t i = 0; i < n; ++i) {
        min_d[i] = std::min(min_d[i], squared_distance(x.row(i), src));
        if (!chosen[i] && min_d[i] > far) {
          far = min_d[i];
          next = i;
        }
      }
      pick = next;
    }
  }

  KMeansResult result;
  result.assignments = assign_all(x, centroids);
  repair_empty(x, result.assignments, centroids, k);
  for (int it = 1; it <= kMaxLloydIterations; ++it) {
    result.iterations = it;
    centroids = compute_centroids(x, result.assignments, k);
    std::vector<int> next = assign_all(x, centroids);
    repair_empty(x, next, centroids, k);
    const bool stable = next == result.assignments;
    result.assignments = std::move(next);
    if (stable) break;
  }
  result.centroids = compute_centroids(x, result.assignments, k);
  result.inertia = inertia(x, result.assignments, result.centroids);
  return result;
}

double inertia(const Points& x, std::span<const int> assignments, const Points& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    total += squared_distance(x.row(i), centroids.row(static_cast<std::size_t>(assignments[i])));
  return total;
}

double silhouette(const Points& x, std::span<const int> assignments) {
  const std::size_t n = x.size();
  int k = 0;
  for (int a : assignments) k = std::max(k, a + 1);
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int a : assignments) ++counts[static_cast<std::size_t>(a)];
  const auto populated = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; });
  if (populated < 2) throw Error(ErrorCode::SingleCluster, "silhouette needs at least two clusters");

  std::vector<double> sums(static_cast<std::size_t>(k));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(assignments[i]);
    if (counts[own] < 2) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    const auto p = x.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[static_cast<std::size_t>(assignments[j])] += distance(p, x.row(j));
    }
    const double a = sums[own] / (counts[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sums.size(); ++c)
      if (c != own && counts[c] > 0) b = std::min(b, sums[c] / counts[c]);
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

std::vector<int> ClusterResult::sizes() const {
  std::vector<int> s(static_cast<std::size_t>(k), 0);
  for (int a : assignments) ++s[static_cast<std::size_t>(a)];
  return s;
}

int choose_best_k(std::span<const std::pair<int, double>> scores) {
  if (scores.empty()) throw Error(ErrorCode::InvalidArgument, "no candidate k");
  auto best = scores.front();
  for (const auto& s : scores)
    if (s.second > best.second || (s.second == best.second && s.first < best.first)) best = s;
  return best.first;
}

ClusterResult select_k(const Points& x, int k_min, int k_max, std::uint64_t seed,
                       std::span<const int> ids) {
  if (k_min < 2 || k_min > k_max) throw Error(ErrorCode::InvalidArgument, "bad k range");
  const int cap = static_cast<int>(x.size()) - 1;
  if (k_min > cap)
    throw Error(ErrorCode::KTooLarge, "k_min=" + std::to_string(k_min) + " needs more than " +
                                          std::to_string(x.size()) + " points");
  k_max = std::min(k_max, cap);

  std::vector<std::pair<int, double>> scores;
  std::vector<KMeansResult> runs;
  for (int k = k_min; k <= k_max; ++k) {
    runs.push_back(kmeans(x, k, seed));
    scores.emplace_back(k, silhouette(x, runs.back().assignments));
  }
  const int best = choose_best_k(scores);
  auto& run = runs[static_cast<std::size_t>(best - k_min)];

  ClusterResult result;
  result.k = best;
  result.assignments = std::move(run.assignments);
  result.centroids = std::move(run.centroids);
  result.silhouette = scores[static_cast<std::size_t>(best - k_min)].second;
  result.seed = seed;
  result.medoid_ids = representatives(result, x, ids);
  return result;
}

std::vector<int> representatives(const ClusterResult& result, const Points& x,
                                 std::span<const int> ids) {
  auto id_of = [&](std::size_t i) { return ids.empty() ? static_cast<int>(i) : ids[i]; };
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(result.k));
  for (std::size_t i = 0; i < result.assignments.size(); ++i)
    members[static_cast<std::size_t>(result.assignments[i])].push_back(i);

  std::vector<int> medoids;
  for (const auto& group : members) {
    if (group.empty()) throw Error(ErrorCode::InvalidArgument, "empty cluster in result");
    int best_id = -1;
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t a : group) {
      double sum = 0.0;
      for (std::size_t b : group) sum += distance(x.row(a), x.row(b));
      const int id = id_of(a);
      if (sum < best_sum || (sum == best_sum && id < best_id)) {
        best_sum = sum;
        best_id = id;
      }
    }
    medoids.push_back(best_id);
  }
  return medoids;
}

Points feature_points(const Dataset& dataset) {
  Points x;
  for (const auto& rec : dataset) {
    const auto v = rec.features.to_vector();
    x.push_back(v);
  }
  return x;
}

ClusterResult cluster_dataset(const Dataset& dataset, int k_min, int k_max, std::uint64_t seed) {
  const Points raw = feature_points(dataset);
  const Points z = Standardization::fit(raw).apply(raw);
  std::vector<int> ids;
  ids.reserve(dataset.size());
  for (const auto& rec : dataset) ids.push_back(rec.id);
  return select_k(z, k_min, k_max, seed, ids);
}

std::string cluster_report_json(const ClusterResult& result) {
  json j;
  j["k"] = result.k;
  j["silhouette"] = result.silhouette;
  j["medoid_ids"] = result.medoid_ids;
  j["sizes"] = result.sizes();
  j["seed"] = result.seed;
  return j.dump() + "\n";
}

ClusterReport parse_cluster_report(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("cluster report: ") + e.what());
  }
  for (const char* key : {"k", "silhouette", "medoid_ids", "sizes", "seed"})
    if (!j.contains(key)) throw Error(ErrorCode::MissingField, std::string("cluster report: ") + key);
  try {
    ClusterReport r;
    r.k = j.at("k").get<int>();
    r.silhouette = j.at("silhouette").get<double>();
    r.medoid_ids = j.at("medoid_ids").get<std::vector<int>>();
    r.sizes = j.at("sizes").get<std::vector<int>>();
    r.seed = j.at("seed").get<std::uint64_t>();
    if (static_cast<int>(r.medoid_ids.size()) != r.k || static_cast<int>(r.sizes.size()) != r.k)
      throw Error(ErrorCode::ParseError, "cluster report: medoid/size count differs from k");
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("cluster report: ") + e.what());
  }
}

void write_cluster_report(const ClusterResult& result, const std::string& path) {
  write_file(path, cluster_report_json(result));
}

ClusterReport read_cluster_report(const std::string& path) {
  return parse_cluster_report(read_file(path));
}

}  // namespace cpforge
