#include "fcuc/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "fcuc/milp/simplex.hpp"
#include "fcuc/util.hpp"

namespace fcuc::region {

using nlohmann::json;

namespace {

double dist2(const Point& a, const Point& b) {
  double s = 0.0;
  for (int f = 0; f < 4; ++f) s += (a[f] - b[f]) * (a[f] - b[f]);
  return s;
}

int nearest(const std::vector<Point>& centroids, const Point& x, double* d2 = nullptr) {
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = dist2(centroids[c], x);
    if (d < bd) {
      bd = d;
      best = static_cast<int>(c);
    }
  }
  if (d2) *d2 = bd;
  return best;
}

}  // namespace

KmeansResult kmeans(const std::vector<Point>& points, int k, std::uint64_t seed, int max_iter, double tol) {
  if (k < 1) throw std::invalid_argument("kmeans: k must be at least 1");
  if (points.size() < static_cast<std::size_t>(k)) throw std::invalid_argument("kmeans: fewer points than clusters");
  const std::size_t n = points.size();
  KmeansResult r;
  auto rng = Rng::substream(seed, 0x6b6d);

  // k-means++ seeding.
  r.centroids.push_back(points[rng.below(n)]);
  std::vector<double> d2(n);
  while (r.centroids.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest(r.centroids, points[i], &d2[i]);
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform01() * total;
      for (pick = 0; pick + 1 < n; ++pick) {
        target -= d2[pick];
        if (target < 0.0 && d2[pick] > 0.0) break;
      }
    } else {
      pick = rng.below(n);
    }
    r.centroids.push_back(points[pick]);
  }

  r.assignment.assign(n, -1);
  for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      r.assignment[i] = nearest(r.centroids, points[i], &d2[i]);
      obj += d2[i];
    }
    // Reseed empty clusters from the worst-served point.
    std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
    for (int a : r.assignment) ++count[static_cast<std::size_t>(a)];
    for (int c = 0; c < k; ++c) {
      if (count[static_cast<std::size_t>(c)] > 0) continue;
      std::size_t far = 0;
      for (std::size_t i = 1; i < n; ++i)
        if (d2[i] > d2[far] && count[static_cast<std::size_t>(r.assignment[i])] > 1) far = i;
      --count[static_cast<std::size_t>(r.assignment[far])];
      obj -= d2[far];
      r.assignment[far] = c;
      d2[far] = 0.0;
      count[static_cast<std::size_t>(c)] = 1;
    }
    r.objective.push_back(obj);

    std::vector<Point> next(static_cast<std::size_t>(k), Point{});
    for (std::size_t i = 0; i < n; ++i)
      for (int f = 0; f < 4; ++f) next[static_cast<std::size_t>(r.assignment[i])][f] += points[i][f];
    double move = 0.0;
    for (int c = 0; c < k; ++c) {
      auto& p = next[static_cast<std::size_t>(c)];
      for (int f = 0; f < 4; ++f) p[f] /= static_cast<double>(count[static_cast<std::size_t>(c)]);
      move = std::max(move, std::sqrt(dist2(p, r.centroids[static_cast<std::size_t>(c)])));
    }
    r.centroids = std::move(next);
    if (move <= tol) break;
  }
  r.iterations = std::min(r.iterations, max_iter);
  // Final assignment against the final centroids.
  for (std::size_t i = 0; i < n; ++i) {
    const int a = nearest(r.centroids, points[i]);
    r.assignment[i] = a;
  }
  return r;
}

double hull_distance(const std::vector<Point>& gens, const Point& x) {
  if (gens.empty()) return std::numeric_limits<double>::infinity();
  milp::MilpModel m("hull");
  std::vector<milp::Var> lam;
  lam.reserve(gens.size());
  milp::LinExpr sum;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    lam.push_back(m.add_continuous("l" + std::to_string(i)));
    sum.add(lam.back(), 1.0);
  }
  m.add_constraint(sum, milp::Sense::Equal, 1.0);
  for (int f = 0; f < 4; ++f) {
    milp::LinExpr e;
    for (std::size_t i = 0; i < gens.size(); ++i) e.add(lam[i], gens[i][f]);
    e.add(m.add_continuous("sp" + std::to_string(f), 0.0, milp::kInf, 1.0), 1.0);
    e.add(m.add_continuous("sn" + std::to_string(f), 0.0, milp::kInf, 1.0), -1.0);
    m.add_constraint(e, milp::Sense::Equal, x[f]);
  }
  const auto r = milp::lp_solve(m);
  if (r.status != milp::Status::Optimal) return std::numeric_limits<double>::infinity();
  return std::max(0.0, r.objective);
}

std::vector<std::size_t> hull_vertices(const std::vector<Point>& pts, double tol) {
  std::vector<std::size_t> uniq;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dup = false;
    for (auto j : uniq)
      if (pts[j] == pts[i]) {
        dup = true;
        break;
      }
    if (!dup) uniq.push_back(i);
  }
  std::vector<std::size_t> keep;
  std::vector<Point> others;
  for (std::size_t a = 0; a < uniq.size(); ++a) {
    others.clear();
    for (std::size_t b = 0; b < uniq.size(); ++b)
      if (b != a) others.push_back(pts[uniq[b]]);
    if (others.empty() || hull_distance(others, pts[uniq[a]]) > tol) keep.push_back(uniq[a]);
  }
  return keep;
}

std::size_t StabilityRegion::num_generators() const {
  std::size_t n = 0;
  for (const auto& c : clusters) n += c.generators.size();
  return n;
}

StabilityRegion build_region(const std::vector<Point>& stable_points, const RegionOptions& opts) {
  if (stable_points.empty()) throw std::invalid_argument("build_region: no stable points");
  const auto km = kmeans(stable_points, opts.k, opts.seed);
  StabilityRegion reg;
  reg.seed = opts.seed;
  reg.clusters.resize(static_cast<std::size_t>(opts.k));
  for (std::size_t i = 0; i < stable_points.size(); ++i)
    reg.clusters[static_cast<std::size_t>(km.assignment[i])].generators.push_back(stable_points[i]);
  for (int c = 0; c < opts.k; ++c) {
    auto& cl = reg.clusters[static_cast<std::size_t>(c)];
    cl.centroid = km.centroids[static_cast<std::size_t>(c)];
    cl.source_points = cl.generators.size();
    if (opts.thin && cl.generators.size() > opts.thin_above) {
      std::vector<Point> v;
      for (auto i : hull_vertices(cl.generators, opts.tol)) v.push_back(cl.generators[i]);
      cl.generators = std::move(v);
    }
  }
  // Final assignment can leave a cluster empty in degenerate data.
  std::erase_if(reg.clusters, [](const Cluster& c) { return c.generators.empty(); });
  return reg;
}

Membership membership(const StabilityRegion& region, const Point& x, double tol) {
  if (region.clusters.empty()) throw std::invalid_argument("membership: empty region");
  for (std::size_t c = 0; c < region.clusters.size(); ++c) {
    const auto& g = region.clusters[c].generators;
    bool in_box = true;
    for (int f = 0; f < 4 && in_box; ++f) {
      double lo = g[0][f], hi = g[0][f];
      for (const auto& p : g) {
        lo = std::min(lo, p[f]);
        hi = std::max(hi, p[f]);
      }
      in_box = x[f] >= lo - tol && x[f] <= hi + tol;
    }
    if (in_box && hull_distance(g, x) <= tol) return {true, static_cast<int>(c)};
  }
  return {};
}

RegionHandles emit_region_constraints(const StabilityRegion& region, milp::MilpModel& model,
                                      const std::array<milp::Var, 4>& x, const std::string& prefix) {
  for (const auto& v : x)
    if (!v.valid() || static_cast<std::size_t>(v.index) >= model.num_vars())
      throw milp::ModelError("region constraints need the four inertia variables in the model");
  if (region.clusters.empty()) throw milp::ModelError("region constraints need a nonempty region");
  RegionHandles h;
  const bool single = region.clusters.size() == 1;
  milp::LinExpr pick;
  std::array<milp::LinExpr, 4> comb;
  for (std::size_t c = 0; c < region.clusters.size(); ++c) {
    const std::string cn = prefix + "_k" + std::to_string(c);
    auto u = model.add_binary(cn + "_u");
    if (single) model.set_bounds(u, 1.0, 1.0);
    h.select.push_back(u);
    pick.add(u, 1.0);
    milp::LinExpr sum;
    std::vector<milp::Var> lam;
    const auto& g = region.clusters[c].generators;
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto l = model.add_continuous(cn + "_l" + std::to_string(i), 0.0, 1.0);
      lam.push_back(l);
      sum.add(l, 1.0);
      for (int f = 0; f < 4; ++f) comb[f].add(l, g[i][f]);
    }
    sum.add(u, -1.0);
    h.rows.push_back(model.add_constraint(sum, milp::Sense::Equal, 0.0, cn + "_sum"));
    h.weights.push_back(std::move(lam));
  }
  h.rows.push_back(model.add_constraint(pick, milp::Sense::Equal, 1.0, prefix + "_one"));
  for (int f = 0; f < 4; ++f) {
    comb[f].add(x[f], -1.0);
    h.rows.push_back(model.add_constraint(comb[f], milp::Sense::Equal, 0.0, prefix + "_x" + std::to_string(f)));
  }
  return h;
}

std::string to_json(const StabilityRegion& region) {
  json j;
  j["format"] = "fcuc-region";
  j["version"] = 1;
  j["k"] = region.clusters.size();
  j["seed"] = region.seed;
  j["dataset_hash"] = region.dataset_hash;
  j["normalization"] = region.normalization;
  j["clusters"] = json::array();
  for (const auto& c : region.clusters)
    j["clusters"].push_back({{"centroid", c.centroid}, {"source_points", c.source_points}, {"generators", c.generators}});
  return j.dump(1) + "\n";
}

StabilityRegion from_json(const std::string& text) {
  const auto j = json::parse(text);
  if (j.value("format", "") != "fcuc-region") throw ArtifactMismatch("not a region file");
  StabilityRegion r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.dataset_hash = j.at("dataset_hash").get<std::string>();
  r.normalization = j.at("normalization").get<Point>();
  for (const auto& c : j.at("clusters")) {
    Cluster cl;
    cl.centroid = c.at("centroid").get<Point>();
    cl.source_points = c.at("source_points").get<std::size_t>();
    cl.generators = c.at("generators").get<std::vector<Point>>();
    r.clusters.push_back(std::move(cl));
  }
  if (r.clusters.size() != j.at("k").get<std::size_t>()) throw ArtifactMismatch("region cluster count mismatch");
  return r;
}

void save_region(const StabilityRegion& region, const std::string& path) { write_file(path, to_json(region)); }

StabilityRegion load_region(const std::string& path) { return from_json(read_file(path)); }

}  // namespace fcuc::region
