#pragma once

// Stability region: union of per-cluster convex hulls of stable points,
// kept in vertex form.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fcuc/milp/model.hpp"

namespace fcuc::region {

using Point = std::array<double, 4>;

struct KmeansResult {
  std::vector<int> assignment;
  std::vector<Point> centroids;
  std::vector<double> objective;  // within-cluster squared distance after each assignment step
  int iterations = 0;
};

// Lloyd's iteration from a k-means++ start. Empty clusters are reseeded with
// the point farthest from its centroid.
[[nodiscard]] KmeansResult kmeans(const std::vector<Point>& points, int k, std::uint64_t seed,
                                  int max_iter = 300, double tol = 1e-9);

struct Cluster {
  Point centroid{};
  std::vector<Point> generators;
  std::size_t source_points = 0;  // before vertex thinning
};

struct StabilityRegion {
  std::vector<Cluster> clusters;
  std::uint64_t seed = 0;
  std::string dataset_hash;
  Point normalization{};  // model units per normalised unit

  [[nodiscard]] std::size_t num_generators() const;
};

struct RegionOptions {
  int k = 4;
  std::uint64_t seed = 1;
  bool thin = true;
  std::size_t thin_above = 200;  // thin clusters larger than this
  double tol = 1e-7;
};

[[nodiscard]] StabilityRegion build_region(const std::vector<Point>& stable_points, const RegionOptions& opts = {});

// Indices of the points that are not within tol of the hull of the others.
// Exact duplicates keep their first occurrence.
[[nodiscard]] std::vector<std::size_t> hull_vertices(const std::vector<Point>& pts, double tol = 1e-7);

// L1 distance from x to the convex hull of gens, by LP.
[[nodiscard]] double hull_distance(const std::vector<Point>& gens, const Point& x);

struct Membership {
  bool inside = false;
  int cluster = -1;
};
[[nodiscard]] Membership membership(const StabilityRegion& region, const Point& x, double tol = 1e-7);

struct RegionHandles {
  std::vector<milp::Var> select;                // one binary per cluster
  std::vector<std::vector<milp::Var>> weights;  // convex multipliers per cluster
  std::vector<milp::Row> rows;
};

// Restricts x (normalised units) to the region. Throws milp::ModelError when
// an x variable is missing from the model.
RegionHandles emit_region_constraints(const StabilityRegion& region, milp::MilpModel& model,
                                      const std::array<milp::Var, 4>& x, const std::string& prefix = "reg");

[[nodiscard]] std::string to_json(const StabilityRegion& region);
[[nodiscard]] StabilityRegion from_json(const std::string& text);
void save_region(const StabilityRegion& region, const std::string& path);
[[nodiscard]] StabilityRegion load_region(const std::string& path);

}  // namespace fcuc::region
