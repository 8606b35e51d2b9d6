#include "fcuc/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fcuc/util.hpp"

namespace fcuc::sampler {

using nlohmann::json;

void SampleBox::validate() const {
  for (int f = 0; f < 4; ++f) {
    if (!(lower[f] < upper[f])) throw std::invalid_argument("sample box: lower must be below upper in every feature");
  }
  if (!(lower[0] > 0.0)) throw std::invalid_argument("sample box: M bounds must be positive");
  if (!(T > 0.0)) throw std::invalid_argument("sample box: T must be positive");
  if (!(dP >= 0.0)) throw std::invalid_argument("sample box: dP must be non-negative");
}

std::vector<Feature> boundary_corners(const SampleBox& box) {
  box.validate();
  std::vector<Feature> out;
  out.reserve(16);
  for (unsigned mask = 0; mask < 16; ++mask) {
    Feature x{};
    for (int f = 0; f < 4; ++f) x[f] = (mask >> f) & 1u ? box.upper[f] : box.lower[f];
    out.push_back(x);
  }
  return out;
}

double min_pairwise_distance(const std::vector<Feature>& u) {
  double best = INFINITY;
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = i + 1; j < u.size(); ++j) {
      double s = 0.0;
      for (int f = 0; f < 4; ++f) {
        const double d = u[i][f] - u[j][f];
        s += d * d;
      }
      best = std::min(best, s);
    }
  return std::sqrt(best);
}

LhsDesign lhs(const SampleBox& box, std::size_t n, std::uint64_t seed, std::size_t candidates,
              std::vector<LhsDesign>* all) {
  box.validate();
  if (n == 0) throw std::invalid_argument("lhs: n must be at least 1");
  if (candidates == 0) throw std::invalid_argument("lhs: need at least one candidate");
  LhsDesign best;
  best.min_distance = -1.0;
  for (std::size_t k = 0; k < candidates; ++k) {
    auto rng = Rng::substream(seed, k);
    std::vector<Feature> unit(n);
    std::vector<std::size_t> perm(n);
    for (int f = 0; f < 4; ++f) {
      for (std::size_t i = 0; i < n; ++i) perm[i] = i;
      rng.shuffle(perm);
      for (std::size_t i = 0; i < n; ++i)
        unit[i][f] = (static_cast<double>(perm[i]) + rng.uniform01()) / static_cast<double>(n);
    }
    LhsDesign d;
    d.min_distance = n > 1 ? min_pairwise_distance(unit) : 0.0;
    d.points.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      for (int f = 0; f < 4; ++f) d.points[i][f] = box.lower[f] + (box.upper[f] - box.lower[f]) * unit[i][f];
    if (d.min_distance > best.min_distance) best = d;
    if (all) all->push_back(std::move(d));
  }
  return best;
}

std::optional<Labels> label(const Feature& x, const SampleBox& box, const sfr::StepwiseLimit& lim) {
  const sfr::InertiaAggregate p{x[0], x[1], x[2], x[3], box.T, box.dP};
  if (sfr::classify_stability(p) != sfr::Stability::StableUnderdamped) return std::nullopt;
  const auto d = sfr::derive(p);
  Labels l;
  const double fN = lim.f_nominal;
  l.y_nadir = fN - std::abs(sfr::nadir_deviation(p)) * fN;
  for (const auto& c : lim.checkpoints) l.y_step.push_back(fN - std::abs(sfr::delta_f(p, d, c.t)) * fN);
  return l;
}

std::size_t Dataset::stable_count() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.stable; }));
}

Feature Dataset::normalize(const Feature& x) const {
  Feature o{};
  for (int f = 0; f < 4; ++f) o[f] = x[f] / norm[f];
  return o;
}

Feature Dataset::denormalize(const Feature& xn) const {
  Feature o{};
  for (int f = 0; f < 4; ++f) o[f] = xn[f] * norm[f];
  return o;
}

Dataset build_dataset(const SampleBox& box, std::size_t n, const sfr::StepwiseLimit& lim, std::uint64_t seed,
                      const BuildOptions& opts) {
  box.validate();
  lim.validate();
  if (n < 16) throw std::invalid_argument("build_dataset: n must cover the 16 box corners");
  Dataset ds;
  ds.box = box;
  ds.limit = lim;
  ds.seed = seed;
  ds.lhs_candidates = opts.lhs_candidates;
  std::vector<Feature> pts = boundary_corners(box);
  if (n > 16) {
    auto design = lhs(box, n - 16, seed, opts.lhs_candidates);
    pts.insert(pts.end(), design.points.begin(), design.points.end());
  }
  for (int f = 0; f < 4; ++f) {
    double m = 0.0;
    for (const auto& x : pts) m = std::max(m, std::abs(x[f]));
    ds.norm[f] = m > 0.0 ? m : 1.0;
  }
  ds.rows.reserve(pts.size());
  for (const auto& x : pts) {
    FrequencySample s;
    s.x = x;
    s.xn = ds.normalize(x);
    s.stability = sfr::classify_stability({x[0], x[1], x[2], x[3], box.T, box.dP});
    if (auto l = label(x, box, lim)) {
      s.stable = true;
      s.y_nadir = l->y_nadir;
      s.y_step = std::move(l->y_step);
    }
    ds.rows.push_back(std::move(s));
  }
  if (ds.stable_count() < opts.min_stable)
    throw std::runtime_error("build_dataset: only " + std::to_string(ds.stable_count()) +
                             " stable samples, need at least " + std::to_string(opts.min_stable));
  return ds;
}

std::string to_csv(const Dataset& ds) {
  std::string out = "M,D,Rg,Fg,Mn,Dn,Rgn,Fgn,stable,y_nadir";
  for (std::size_t j = 0; j < ds.limit.checkpoints.size(); ++j) out += ",y_step_" + std::to_string(j + 1);
  out += '\n';
  for (const auto& r : ds.rows) {
    for (int f = 0; f < 4; ++f) out += fmt_double(r.x[f]) + ',';
    for (int f = 0; f < 4; ++f) out += fmt_double(r.xn[f]) + ',';
    out += r.stable ? "1," : "0,";
    if (r.stable) out += fmt_double(r.y_nadir);
    for (std::size_t j = 0; j < ds.limit.checkpoints.size(); ++j) {
      out += ',';
      if (r.stable) out += fmt_double(r.y_step[j]);
    }
    out += '\n';
  }
  return out;
}

namespace {

json limit_json(const sfr::StepwiseLimit& lim) {
  json cps = json::array();
  for (const auto& c : lim.checkpoints) cps.push_back({c.t, c.floor});
  return {{"f_nominal", lim.f_nominal}, {"f_min", lim.f_min}, {"qss_max", lim.qss_max},
          {"rocof_max", lim.rocof_max}, {"checkpoints", cps}};
}

sfr::StepwiseLimit limit_from(const json& j) {
  sfr::StepwiseLimit lim;
  lim.f_nominal = j.at("f_nominal").get<double>();
  lim.f_min = j.at("f_min").get<double>();
  lim.qss_max = j.at("qss_max").get<double>();
  lim.rocof_max = j.at("rocof_max").get<double>();
  for (const auto& c : j.at("checkpoints")) lim.checkpoints.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
  return lim;
}

}  // namespace

std::string sidecar_json(const Dataset& ds, const std::string& csv) {
  json j;
  j["format"] = "fcuc-dataset";
  j["version"] = 1;
  j["box"] = {{"lower", ds.box.lower}, {"upper", ds.box.upper}, {"T", ds.box.T}, {"dP", ds.box.dP}};
  j["seed"] = ds.seed;
  j["lhs_candidates"] = ds.lhs_candidates;
  j["limit"] = limit_json(ds.limit);
  j["normalization"] = ds.norm;
  j["rows"] = ds.rows.size();
  j["stable_rows"] = ds.stable_count();
  j["csv_sha256"] = sha256_hex(csv);
  return j.dump(2) + "\n";
}

void save_dataset(const Dataset& ds, const std::string& csv_path, const std::string& sidecar_path) {
  const auto csv = to_csv(ds);
  write_file(csv_path, csv);
  write_file(sidecar_path, sidecar_json(ds, csv));
}

std::string dataset_hash(const std::string& sidecar_path) {
  return json::parse(read_file(sidecar_path)).at("csv_sha256").get<std::string>();
}

Dataset load_dataset(const std::string& csv_path, const std::string& sidecar_path) {
  const auto csv = read_file(csv_path);
  const auto side = json::parse(read_file(sidecar_path));
  if (side.value("format", "") != "fcuc-dataset") throw ArtifactMismatch("dataset sidecar has the wrong format tag");
  if (sha256_hex(csv) != side.at("csv_sha256").get<std::string>())
    throw ArtifactMismatch("dataset CSV hash does not match its sidecar");
  Dataset ds;
  const auto& b = side.at("box");
  ds.box.lower = b.at("lower").get<Feature>();
  ds.box.upper = b.at("upper").get<Feature>();
  ds.box.T = b.at("T").get<double>();
  ds.box.dP = b.at("dP").get<double>();
  ds.seed = side.at("seed").get<std::uint64_t>();
  ds.lhs_candidates = side.at("lhs_candidates").get<std::size_t>();
  ds.limit = limit_from(side.at("limit"));
  ds.norm = side.at("normalization").get<Feature>();
  const std::size_t J = ds.limit.checkpoints.size();

  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  if (split(line, ',').size() != 10 + J) throw ArtifactMismatch("dataset CSV header does not match the checkpoints");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 10 + J) throw ArtifactMismatch("dataset CSV row has the wrong field count");
    FrequencySample s;
    for (int k = 0; k < 4; ++k) {
      s.x[k] = parse_double(f[static_cast<std::size_t>(k)]);
      s.xn[k] = parse_double(f[static_cast<std::size_t>(k) + 4]);
    }
    s.stable = f[8] == "1";
    s.stability = sfr::classify_stability({s.x[0], s.x[1], s.x[2], s.x[3], ds.box.T, ds.box.dP});
    if (s.stable) {
      s.y_nadir = parse_double(f[9]);
      for (std::size_t j = 0; j < J; ++j) s.y_step.push_back(parse_double(f[10 + j]));
    }
    ds.rows.push_back(std::move(s));
  }
  if (ds.rows.size() != side.at("rows").get<std::size_t>()) throw ArtifactMismatch("dataset row count mismatch");
  return ds;
}

Split split_stable(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ds.rows.size(); ++i)
    if (ds.rows[i].stable) idx.push_back(i);
  auto rng = Rng::substream(seed, 0x5b1d);
  rng.shuffle(idx);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
  Split s;
  s.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  return s;
}

}  // namespace fcuc::sampler
