#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "fcuc/milp/bnb.hpp"
#include "fcuc/sampler.hpp"
#include "fcuc/ucmodel.hpp"
#include "fcuc/util.hpp"
#include "oracles/uc_oracle.hpp"

using namespace fcuc;
using namespace fcuc::uc;
using nlohmann::json;

namespace {

const std::string kDesk = std::string(FCUC_SOURCE_DIR) + "/data/desk_case.json";

json one_bus(double demand, double p_min, double p_max) {
  return json{{"name", "tiny"},
              {"periods", 1},
              {"eps_load", 0.0},
              {"eps_der", 0.0},
              {"shed_cost", 1000.0},
              {"buses", {{{"name", "b"}, {"slack", true}, {"load", {demand}}}}},
              {"thermal",
               {{{"name", "g"},
                 {"bus", "b"},
                 {"type", "OCGT"},
                 {"p_min", p_min},
                 {"p_max", p_max},
                 {"fuel", {{p_min, 10.0 * p_min}, {p_max, 10.0 * p_max}}},
                 {"initial_on", true},
                 {"initial_p", p_min}}}}};
}

json two_units() {
  auto unit = [](const std::string& name, const std::string& type, double cost) {
    return json{{"name", name},       {"bus", "b"},          {"type", type},
                {"p_min", 0.0},       {"p_max", 100.0},      {"fuel", {{0.0, 0.0}, {100.0, cost}}},
                {"initial_on", false}, {"startup_cost", 10.0}};
  };
  return json{{"name", "pair"},
              {"periods", 1},
              {"eps_load", 0.0},
              {"eps_der", 0.0},
              {"buses", {{{"name", "b"}, {"slack", true}, {"load", {50.0}}}}},
              {"thermal", {unit("nuc", "Nuclear", 1000.0), unit("gas", "OCGT", 5000.0)}}};
}

// Constant output network on normalised inputs.
csnn::Network constant_net(double value, int outputs, const std::array<double, 4>& norm) {
  auto net = csnn::make_network({4, 2, outputs}, 0.0, 1);
  for (auto& L : net.layers) {
    std::fill(L.w.begin(), L.w.end(), 0.0);
    std::fill(L.b.begin(), L.b.end(), 0.0);
  }
  std::fill(net.layers.back().b.begin(), net.layers.back().b.end(), value);
  net.input_norm = norm;
  return net;
}

// Single hull over the whole normalised box.
region::StabilityRegion box_region(const std::array<double, 4>& norm) {
  region::StabilityRegion r;
  region::Cluster c;
  for (int m = 0; m < 16; ++m) c.generators.push_back({double(m & 1), double((m >> 1) & 1), double((m >> 2) & 1), double((m >> 3) & 1)});
  c.centroid = {0.5, 0.5, 0.5, 0.5};
  c.source_points = 16;
  r.clusters.push_back(c);
  r.normalization = norm;
  return r;
}

constexpr std::array<double, 4> kNorm{20.0, 5.0, 60.0, 20.0};

}  // namespace

TEST_CASE("single unit meets demand") {
  auto c = case_from_json(one_bus(50.0, 10.0, 100.0).dump());
  SolveOptions o;
  o.mode = Mode::Conventional;
  auto s = solve_case(c, o);
  REQUIRE(s.status == milp::Status::Optimal);
  CHECK(s.periods[0].on[0]);
  CHECK(s.periods[0].p[0] == doctest::Approx(50.0));
  CHECK(s.periods[0].shed[0] == doctest::Approx(0.0));
  CHECK(s.objective == doctest::Approx(500.0));
}

TEST_CASE("demand above capacity is shed") {
  auto c = case_from_json(one_bus(150.0, 10.0, 100.0).dump());
  SolveOptions o;
  o.mode = Mode::Conventional;
  auto s = solve_case(c, o);
  REQUIRE(s.status == milp::Status::Optimal);
  CHECK(s.periods[0].shed[0] == doctest::Approx(50.0));
  CHECK(s.cost.load == doctest::Approx(50.0 * 1000.0));
}

TEST_CASE("inertia aggregation") {
  auto j = one_bus(50.0, 10.0, 100.0);
  j["thermal"][0]["type"] = "Nuclear";
  auto c = case_from_json(j.dump());
  auto a = aggregate_values(c, {true}, {});
  CHECK(a[0] == doctest::Approx(9.0));
  CHECK(a[1] == doctest::Approx(0.6));
  CHECK(a[2] == doctest::Approx(0.98 / 0.04));
  CHECK(a[3] == doctest::Approx(0.98 * 0.25 / 0.04));

  auto pair = case_from_json(two_units().dump());
  CHECK(aggregate_values(pair, {true, true}, {})[0] == doctest::Approx(10.0));
  for (double v : aggregate_values(pair, {false, false}, {})) CHECK(v == 0.0);

  // The expressions agree with the evaluated form on every status vector.
  auto desk = load_case(kDesk);
  auto b = build_uc(desk);
  auto fh = add_frequency_constraints(b, desk, constant_net(50.0, 1, kNorm), nullptr, box_region(kNorm), {});
  for (int mask = 0; mask < 32; ++mask) {
    std::vector<double> x(b.model.num_vars(), 0.0);
    std::vector<bool> on(3), der(2);
    for (int g = 0; g < 3; ++g) {
      on[static_cast<std::size_t>(g)] = (mask >> g) & 1;
      x[static_cast<std::size_t>(b.h.on[static_cast<std::size_t>(g)][2].index)] = on[static_cast<std::size_t>(g)];
    }
    for (int d = 0; d < 2; ++d) {
      der[static_cast<std::size_t>(d)] = (mask >> (3 + d)) & 1;
      x[static_cast<std::size_t>(b.h.der_u[static_cast<std::size_t>(d)][2].index)] = der[static_cast<std::size_t>(d)];
    }
    const auto e = aggregate_inertia_expr(desk, b.h, 2);
    const auto v = aggregate_values(desk, on, der);
    CHECK(e.M.evaluate(x) == doctest::Approx(v[0]).epsilon(1e-12));
    CHECK(e.D.evaluate(x) == doctest::Approx(v[1]).epsilon(1e-12));
    CHECK(e.Rg.evaluate(x) == doctest::Approx(v[2]).epsilon(1e-12));
    CHECK(e.Fg.evaluate(x) == doctest::Approx(v[3]).epsilon(1e-12));
  }
}

TEST_CASE("RoCoF row forces enough inertia") {
  auto c = case_from_json(two_units().dump());
  SolveOptions o;
  o.mode = Mode::Conventional;
  auto conv = solve_case(c, o);
  REQUIRE(conv.status == milp::Status::Optimal);
  CHECK(conv.periods[0].aggregate[0] < 10.0);

  auto net = constant_net(50.0, 1, kNorm);
  auto reg = box_region(kNorm);
  o.mode = Mode::Fcuc;
  o.nadir_net = &net;
  o.region = &reg;
  o.freq.dP = 0.1;
  o.freq.limit.rocof_max = 0.5;  // 0.01 pu/s
  o.freq.limit.qss_max = 50.0;
  o.freq.headroom = false;
  auto f = solve_case(c, o);
  REQUIRE(f.status == milp::Status::Optimal);
  CHECK(f.periods[0].aggregate[0] >= 10.0 - 1e-9);
  CHECK(f.objective >= conv.objective);
}

TEST_CASE("no statuses on makes a disturbed system infeasible") {
  auto c = case_from_json(two_units().dump());
  auto net = constant_net(50.0, 1, kNorm);
  auto b = build_uc(c);
  FrequencyConfig cfg;
  cfg.headroom = false;
  (void)add_frequency_constraints(b, c, net, nullptr, box_region(kNorm), cfg);
  for (const auto& v : b.h.on) b.model.set_bounds(v[0], 0.0, 0.0);
  CHECK(milp::bnb_solve(b.model).status == milp::Status::Infeasible);
}

TEST_CASE("zero disturbance drops RoCoF and QSS rows but keeps the network floor") {
  auto c = load_case(kDesk);
  auto count_named = [](const milp::MilpModel& m, const std::string& prefix) {
    return std::count_if(m.constraints().begin(), m.constraints().end(),
                         [&](const milp::Constraint& r) { return r.name.rfind(prefix, 0) == 0; });
  };
  FrequencyConfig cfg;
  cfg.dP = 0.0;
  {
    auto b = build_uc(c);
    (void)add_frequency_constraints(b, c, constant_net(50.0, 1, kNorm), nullptr, box_region(kNorm), cfg);
    CHECK(count_named(b.model, "rocof") == 0);
    CHECK(count_named(b.model, "qss") == 0);
    CHECK(milp::bnb_solve(b.model).status == milp::Status::Optimal);
  }
  {
    auto b = build_uc(c);
    (void)add_frequency_constraints(b, c, constant_net(49.0, 1, kNorm), nullptr, box_region(kNorm), cfg);
    CHECK(milp::bnb_solve(b.model).status == milp::Status::Infeasible);
  }
  cfg.dP = 0.08;
  auto b = build_uc(c);
  (void)add_frequency_constraints(b, c, constant_net(50.0, 1, kNorm), nullptr, box_region(kNorm), cfg);
  CHECK(count_named(b.model, "rocof") == c.periods);
  CHECK(count_named(b.model, "qss") == c.periods);
}

TEST_CASE("desk schedules: residuals, aggregates, ordering") {
  auto c = load_case(kDesk);
  auto net = constant_net(50.0, 1, kNorm);
  auto reg = box_region(kNorm);
  SolveOptions o;
  o.mode = Mode::Conventional;
  auto conv = solve_case(c, o);
  o.mode = Mode::Fcuc;
  o.nadir_net = &net;
  o.region = &reg;
  auto fc = solve_case(c, o);
  REQUIRE(conv.status == milp::Status::Optimal);
  REQUIRE(fc.status == milp::Status::Optimal);
  CHECK(fc.objective >= conv.objective - 1e-6);
  for (const auto* s : {&conv, &fc}) {
    CHECK(s->max_row_residual <= 1e-6);
    CHECK(s->cost.total() == doctest::Approx(s->objective).epsilon(1e-9));
    auto v = verify(c, *s, o.freq, &reg);
    CHECK(v.max_balance_residual <= 1e-6);
    CHECK(v.max_bound_residual <= 1e-6);
    CHECK(v.max_headroom_residual <= 1e-6);
  }
  for (const auto& p : fc.periods) {
    REQUIRE(p.model_aggregate);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(p.aggregate[i] - (*p.model_aggregate)[i]) <= 1e-9);
    // RoCoF and QSS rows hold at the schedule.
    CHECK(p.aggregate[0] >= 0.08 * 50.0 / 1.0 - 1e-9);
    CHECK(p.aggregate[1] + p.aggregate[2] >= 0.08 * 50.0 / 0.2 - 1e-9);
  }
  // The conventional schedule leaves the valley periods short of response.
  auto v = verify(c, conv, o.freq);
  CHECK(v.failing_periods() >= 1);

  auto js = json::parse(schedule_json(c, fc));
  CHECK(js["periods"].size() == 6);
  CHECK(js["mode"] == "fcuc");
  auto csv = schedule_csv(c, fc);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  auto jv = json::parse(verification_json(verify(c, fc, o.freq, &reg)));
  CHECK(jv["periods"].size() == 6);
}

TEST_CASE("branch and bound matches commitment enumeration on short horizons") {
  auto j = json::parse(fcuc::read_file(kDesk));
  for (int horizon : {2, 3}) {
    auto jj = j;
    jj["periods"] = horizon;
    for (auto& b : jj["buses"]) b["load"] = std::vector<double>(b["load"].begin(), b["load"].begin() + horizon);
    for (auto& d : jj["der"]) d["forecast"] = std::vector<double>(d["forecast"].begin(), d["forecast"].begin() + horizon);
    auto c = case_from_json(jj.dump());
    SolveOptions o;
    o.mode = Mode::Conventional;
    auto s = solve_case(c, o);
    REQUIRE(s.status == milp::Status::Optimal);
    const auto plain = oracle::enumerate_commitments_plain(c);
    const auto fast = oracle::enumerate_commitments(c);
    CHECK(std::abs(plain.best - s.objective) <= 1e-6);
    CHECK(std::abs(fast.best - plain.best) <= 1e-9);
    CHECK(fast.exact_solves <= plain.exact_solves);
  }
}

TEST_CASE("tight ramps couple periods and the enumeration stays exact") {
  auto j = json::parse(fcuc::read_file(kDesk));
  j["periods"] = 3;
  for (auto& b : j["buses"]) b["load"] = std::vector<double>(b["load"].begin() + 1, b["load"].begin() + 4);
  for (auto& d : j["der"]) d["forecast"] = std::vector<double>(d["forecast"].begin() + 1, d["forecast"].begin() + 4);
  j["thermal"][0]["ramp_up"] = 20.0;
  j["thermal"][0]["ramp_down"] = 20.0;
  j["thermal"][0]["initial_p"] = 180.0;
  auto c = case_from_json(j.dump());
  SolveOptions o;
  o.mode = Mode::Conventional;
  auto s = solve_case(c, o);
  REQUIRE(s.status == milp::Status::Optimal);
  const auto plain = oracle::enumerate_commitments_plain(c);
  CHECK(std::abs(plain.best - s.objective) <= 1e-6);
  CHECK(std::abs(oracle::enumerate_commitments(c).best - plain.best) <= 1e-9);
}

TEST_CASE("case validation") {
  auto j = one_bus(50.0, 10.0, 100.0);
  auto bad = j;
  bad["thermal"][0]["fuel"] = {{10.0, 100.0}, {50.0, 900.0}, {100.0, 1000.0}};
  CHECK_THROWS_AS((void)case_from_json(bad.dump()), CaseError);
  bad = j;
  bad["buses"].push_back({{"name", "c"}, {"slack", true}, {"load", {1.0}}});
  CHECK_THROWS_AS((void)case_from_json(bad.dump()), CaseError);
  bad = j;
  bad["thermal"][0]["type"] = "Steam";
  CHECK_THROWS_AS((void)case_from_json(bad.dump()), CaseError);
  bad = j;
  bad["buses"][0]["load"] = {1.0, 2.0};
  CHECK_THROWS_AS((void)case_from_json(bad.dump()), CaseError);
  bad = j;
  bad["thermal"][0]["p_min"] = 200.0;
  CHECK_THROWS_AS((void)case_from_json(bad.dump()), CaseError);
  CHECK_THROWS_AS((void)case_from_json("{"), CaseError);
  CHECK_NOTHROW((void)case_from_json(j.dump()));
}

TEST_CASE("artifact disagreement is a configuration error") {
  auto c = load_case(kDesk);
  auto b = build_uc(c);
  auto net = constant_net(50.0, 1, kNorm);
  auto other = kNorm;
  other[2] = 61.0;
  CHECK_THROWS_AS((void)add_frequency_constraints(b, c, net, nullptr, box_region(other), {}), ConfigError);
  auto step = constant_net(50.0, 3, kNorm);
  CHECK_THROWS_AS((void)add_frequency_constraints(b, c, net, &step, box_region(kNorm), {}), ConfigError);
  auto hashed = net;
  hashed.dataset_hash = "a";
  auto reg = box_region(kNorm);
  reg.dataset_hash = "b";
  CHECK_THROWS_AS((void)add_frequency_constraints(b, c, hashed, nullptr, reg, {}), ConfigError);
}

TEST_CASE("desk FCUC with trained [4,8,8] networks solves to optimality within a minute") {
  sampler::SampleBox box;
  box.lower = {2.0, 0.0, 6.0, 1.5};
  box.upper = {11.0, 2.5, 30.0, 9.0};
  const auto lim = sfr::StepwiseLimit::defaults();
  const auto ds = sampler::build_dataset(box, 2000, lim, 1);
  std::vector<std::vector<double>> x, yn, ys;
  std::vector<region::Point> pts;
  for (const auto& r : ds.rows)
    if (r.stable) {
      x.push_back({r.xn.begin(), r.xn.end()});
      yn.push_back({r.y_nadir});
      ys.push_back(r.y_step);
      pts.push_back(r.xn);
    }
  csnn::TrainConfig tc;
  tc.hidden = {8, 8};
  auto nadir = csnn::train(x, yn, tc).net;
  auto step = csnn::train(x, ys, tc).net;
  nadir.input_norm = step.input_norm = ds.norm;
  for (const auto& cp : lim.checkpoints) step.checkpoints.push_back(cp.t);
  region::RegionOptions ro;
  ro.k = 1;
  auto reg = region::build_region(pts, ro);
  reg.normalization = ds.norm;

  SolveOptions o;
  o.mode = Mode::Fcuc;
  o.nadir_net = &nadir;
  o.step_net = &step;
  o.region = &reg;
  o.bnb.time_limit_seconds = 60.0;
  const auto s = solve_case(load_case(kDesk), o);
  CHECK(s.status == milp::Status::Optimal);
  CHECK(s.wall_seconds < 60.0);
  CHECK(s.max_row_residual <= 1e-6);
}
