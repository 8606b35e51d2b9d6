// Acceptance run over the shipped desk pipeline. One line per criterion;
// exit status 0 only if every criterion passes.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>

#include "fcuc/csnn.hpp"
#include "fcuc/encode.hpp"
#include "fcuc/milp/bnb.hpp"
#include "fcuc/milp/mps.hpp"
#include "fcuc/pipeline.hpp"
#include "fcuc/region.hpp"
#include "fcuc/sfr.hpp"
#include "fcuc/ucmodel.hpp"
#include "fcuc/util.hpp"
#include "oracles/nn_oracle.hpp"
#include "oracles/sfr_oracle.hpp"
#include "oracles/uc_oracle.hpp"

using namespace fcuc;
namespace pl = fcuc::pipeline;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Every model built for criteria 6 to 9 goes through an MPS round-trip.
struct MpsLedger {
  std::size_t models = 0;
  std::size_t mismatches = 0;
  std::size_t rows = 0;
  void record(const milp::MilpModel& m) {
    std::stringstream mps, names;
    milp::write_mps(m, mps, &names);
    const auto back = milp::read_mps(mps, &names);
    ++models;
    rows += m.num_constraints();
    if (!(back == m)) ++mismatches;
  }
};
MpsLedger g_mps;

struct Shared {
  pl::Config cfg;
  sampler::Dataset ds;
  pl::SplitData split;
  pl::TrainOutcome trained;
  region::StabilityRegion region;
  uc::UcCase desk;
};

// ---- 1

Outcome sfr_closed_form() {
  std::mt19937_64 rng(2024);
  const auto t0 = Clock::now();
  double worst_v = 0.0, worst_t = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto op = oracle::random_stable(rng);
    const sfr::InertiaAggregate p{op.M, op.D, op.Rg, op.Fg, op.T, op.dP};
    const auto d = sfr::derive(p);
    const double nad = sfr::nadir_deviation(p);
    // One full damped period holds the deepest trough.
    const auto g = oracle::grid_min_refined(op, 2.0 * oracle::first_trough_horizon(op), 1e-3, 1e-4);
    worst_v = std::max(worst_v, std::abs(nad - g.value));
    worst_t = std::max(worst_t, std::abs(d.t_m - g.t));
  }
  const double secs = since(t0);
  return {worst_v <= 1e-6 && worst_t <= 2e-4 && secs < 10.0,
          fmt::format("1000 samples, max |nadir - grid| {:.2e} pu, max |t_m - argmin| {:.2e} s, {:.2f} s", worst_v,
                      worst_t, secs)};
}

// ---- 2

std::vector<oracle::DenseLayer> dense_layers(const csnn::Network& net) {
  std::vector<oracle::DenseLayer> out;
  for (const auto& L : net.layers) {
    oracle::DenseLayer d;
    d.b = L.b;
    d.w.assign(static_cast<std::size_t>(L.out), std::vector<double>(static_cast<std::size_t>(L.in)));
    for (int i = 0; i < L.out; ++i)
      for (int j = 0; j < L.in; ++j) d.w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = L.weight(i, j);
    out.push_back(std::move(d));
  }
  return out;
}

Outcome loss_gradient() {
  Rng rng(17);
  auto net = csnn::make_network({4, 16, 16, 1}, 0.87, 17);
  std::vector<std::vector<double>> x(16, std::vector<double>(4)), y(16, std::vector<double>(1));
  for (auto& r : x)
    for (auto& v : r) v = rng.uniform01();
  for (auto& r : y) r[0] = rng.uniform(-0.5, 0.5);
  auto loss = [&] {
    std::vector<double> p, t;
    const auto layers = dense_layers(net);
    for (std::size_t i = 0; i < x.size(); ++i) {
      p.push_back(oracle::mlp(layers, x[i])[0]);
      t.push_back(y[i][0]);
    }
    return oracle::conservative(p, t);
  };
  const auto g = csnn::backward(net, x, y);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto l = rng.below(net.layers.size());
    auto& L = net.layers[l];
    const bool bias = rng.below(5) == 0;
    auto& vec = bias ? L.b : L.w;
    const auto q = rng.below(vec.size());
    const double analytic = bias ? g.b[l][q] : g.w[l][q];
    const double orig = vec[q], h = 1e-6;
    vec[q] = orig + h;
    const double up = loss();
    vec[q] = orig - h;
    const double dn = loss();
    vec[q] = orig;
    const double fd = (up - dn) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-3}));
  }
  return {worst <= 1e-4, fmt::format("[4,16,16,1] at s=0.87, 50 parameters, max relative error {:.2e}", worst)};
}

// ---- 3, 4

Outcome conservativeness(const Shared& s, const std::vector<pl::EvalRow>& rows) {
  const double neg = s.trained.nadir_metrics.test.negativeness;
  double ablation = -1.0;
  for (const auto& r : rows)
    if (r.method == "nadir_no_overshoot" && r.split == "test") ablation = r.m.negativeness;
  return {neg >= 0.99 && ablation >= 0.0 && ablation < 0.99,
          fmt::format("held-out negativeness {:.4f} ({} rows); without the overshoot term {:.4f}", neg,
                      s.split.x_test.size(), ablation)};
}

Outcome accuracy(const Shared& s) {
  const double mape = s.trained.nadir_metrics.test.mape;
  return {mape <= 0.01, fmt::format("held-out MAPE {:.4f}% (train {:.4f}%)", 100.0 * mape,
                                    100.0 * s.trained.nadir_metrics.train.mape)};
}

// ---- 5

Outcome sparsity(const Shared& s) {
  csnn::TrainConfig tc = s.cfg.nadir_train;
  tc.hidden = {100, 100};
  tc.sparse_output = true;
  tc.epochs = 150;
  const auto t0 = Clock::now();
  const auto res = csnn::train(s.split.x_train, s.split.nadir_train, tc);
  std::size_t total = 0, active = 0;
  bool per_layer = true;
  std::vector<std::size_t> expected;
  for (const auto& L : res.net.layers) {
    expected.push_back(L.active());
    if (!L.is_sparse()) continue;
    total += L.w.size();
    active += L.active();
    per_layer = per_layer && L.active() == csnn::active_target(L.w.size(), 0.87);
  }
  for (const auto& u : res.updates) per_layer = per_layer && u.active == expected;
  const double frac = static_cast<double>(active) / static_cast<double>(total);
  return {std::abs(frac - 0.13) <= 1e-12 && per_layer && !res.updates.empty(),
          fmt::format("[4,100,100,1]: active fraction {} of sparse layers ({} of {}), counts constant over {} "
                      "updates, {:.1f} s",
                      fmt_double(frac), active, total, res.updates.size(), since(t0))};
}

// ---- 6

Outcome encoding_exactness(const Shared& s) {
  csnn::TrainConfig tc = s.cfg.nadir_train;
  tc.hidden = {8, 8};
  auto net = csnn::train(s.split.x_train, s.split.nadir_train, tc).net;
  std::vector<encode::Interval> box;
  for (int f = 0; f < 4; ++f)
    box.push_back({s.ds.box.lower[static_cast<std::size_t>(f)] / s.ds.norm[static_cast<std::size_t>(f)],
                   s.ds.box.upper[static_cast<std::size_t>(f)] / s.ds.norm[static_cast<std::size_t>(f)]});
  const auto bounds = encode::propagate_bounds(net, box);
  const auto layers = dense_layers(net);
  Rng rng(6);
  double worst = 0.0;
  std::size_t bin_on = 0, bin_off = 0;
  bool solved = true;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x;
    for (const auto& b : box) x.push_back(rng.uniform(b.lo, b.hi));
    const double ref = oracle::mlp(layers, x)[0];
    for (bool presolve : {true, false})
      for (double sgn : {1.0, -1.0}) {
        milp::MilpModel m("encode");
        std::vector<milp::Var> xv;
        for (std::size_t f = 0; f < 4; ++f) xv.push_back(m.add_continuous("x" + std::to_string(f), x[f], x[f]));
        const auto y = m.add_continuous("y", -milp::kInf, milp::kInf, sgn);
        encode::EncodeOptions eo;
        eo.presolve = presolve;
        const auto h = encode::emit_nn_constraints(net, bounds, m, xv, {y}, eo);
        (presolve ? bin_on : bin_off) = h.binaries;
        g_mps.record(m);
        const auto r = milp::bnb_solve(m);
        if (r.status != milp::Status::Optimal) {
          solved = false;
          continue;
        }
        worst = std::max(worst, std::abs(r.value(y) - ref));
      }
  }
  return {solved && worst <= 1e-6,
          fmt::format("trained [4,8,8,1], 50 inputs x (min, max) x presolve on/off: max |MILP - forward| {:.2e} "
                      "({} / {} binaries)",
                      worst, bin_on, bin_off)};
}

// ---- 7

bool region_milp_feasible(const region::StabilityRegion& reg, const region::Point& x) {
  milp::MilpModel m("region");
  std::array<milp::Var, 4> xv;
  for (int f = 0; f < 4; ++f) xv[static_cast<std::size_t>(f)] = m.add_continuous("x" + std::to_string(f), x[static_cast<std::size_t>(f)], x[static_cast<std::size_t>(f)]);
  (void)region::emit_region_constraints(reg, m, xv);
  g_mps.record(m);
  return milp::bnb_solve(m).status == milp::Status::Optimal;
}

Outcome region_soundness(const Shared& s) {
  std::vector<region::Point> stable;
  region::Point lo, hi;
  lo.fill(1e300);
  hi.fill(-1e300);
  for (const auto& r : s.ds.rows)
    if (r.stable) {
      stable.push_back(r.xn);
      for (std::size_t f = 0; f < 4; ++f) {
        lo[f] = std::min(lo[f], r.xn[f]);
        hi[f] = std::max(hi[f], r.xn[f]);
      }
    }
  Rng rng(77);
  int members = 0, outside_rejected = 0, agree = 0;
  for (int i = 0; i < 200; ++i) {
    const auto& x = stable[rng.below(stable.size())];
    const bool in = region::membership(s.region, x).inside;
    members += in;
    agree += region_milp_feasible(s.region, x) == in;
  }
  for (int i = 0; i < 200; ++i) {
    region::Point x;
    for (std::size_t f = 0; f < 4; ++f) x[f] = rng.uniform(lo[f], hi[f]);
    // Push one coordinate past a face of the bounding box.
    const auto f = rng.below(4);
    const double width = hi[f] - lo[f];
    x[f] = rng.below(2) ? hi[f] + rng.uniform(0.01, 0.5) * width : lo[f] - rng.uniform(0.01, 0.5) * width;
    const bool in = region::membership(s.region, x).inside;
    outside_rejected += !in;
    agree += region_milp_feasible(s.region, x) == in;
  }
  return {members == 200 && outside_rejected == 200 && agree == 400,
          fmt::format("{} clusters / {} generators: {}/200 dataset points inside, {}/200 outside points rejected, "
                      "MILP agrees on {}/400",
                      s.region.clusters.size(), s.region.num_generators(), members, outside_rejected, agree)};
}

// ---- 8

Outcome uc_correctness(const Shared& s) {
  uc::SolveOptions o;
  o.mode = uc::Mode::Conventional;
  g_mps.record(uc::build_model(s.desk, o).model);
  const auto t0 = Clock::now();
  const auto sched = uc::solve_case(s.desk, o);
  const double bnb_s = since(t0);
  const auto t1 = Clock::now();
  const auto en = oracle::enumerate_commitments_plain(s.desk);
  const double enum_s = since(t1);
  const double diff = std::abs(en.best - sched.objective);
  return {sched.status == milp::Status::Optimal && diff <= 1e-6 && enum_s < 300.0 && bnb_s < 10.0,
          fmt::format("B&B {:.4f} ({} nodes, {:.3f} s) vs enumeration {:.4f} over {} patterns ({:.1f} s), |diff| {:.1e}",
                      sched.objective, sched.nodes, bnb_s, en.best, en.patterns, enum_s, diff)};
}

// ---- 9

Outcome fcuc_stability(const Shared& s, double& fcuc_seconds) {
  const auto conv = pl::run_solve(s.cfg, uc::Mode::Conventional);
  const auto fc = pl::run_solve(s.cfg, uc::Mode::Fcuc);
  const auto art = pl::load_artifacts(s.cfg, uc::Mode::Fcuc);
  g_mps.record(uc::build_model(art.uc, pl::solve_options(s.cfg, art, uc::Mode::Conventional)).model);
  g_mps.record(uc::build_model(art.uc, pl::solve_options(s.cfg, art, uc::Mode::Fcuc)).model);
  fcuc_seconds = fc.schedule.wall_seconds;
  const int conv_fail = conv.verification.failing_periods();
  const int fc_fail = fc.verification.failing_periods();
  const double c0 = conv.schedule.objective, c1 = fc.schedule.objective;
  return {fc.schedule.status == milp::Status::Optimal && conv_fail >= 1 && fc_fail == 0 && c1 >= c0 - 1e-6,
          fmt::format("conventional fails {}/6 periods, FCUC fails {}/6; cost {:.2f} -> {:.2f} (+{:.2f}%)", conv_fail,
                      fc_fail, c0, c1, 100.0 * (c1 - c0) / c0)};
}

// ---- 10

Outcome sparse_speedup(const Shared& s, double sparse_seconds) {
  auto dense_cfg = s.cfg.nadir_train;
  dense_cfg.sparse = false;
  auto dense_step_cfg = s.cfg.step_train;
  dense_step_cfg.sparse = false;
  auto nadir = csnn::train(s.split.x_train, s.split.nadir_train, dense_cfg).net;
  auto step = csnn::train(s.split.x_train, s.split.step_train, dense_step_cfg).net;
  for (auto* n : {&nadir, &step}) {
    n->input_norm = s.ds.norm;
    n->dataset_hash = s.region.dataset_hash;
  }
  nadir.target = "nadir";
  step.target = "stepwise";
  for (const auto& cp : s.ds.limit.checkpoints) step.checkpoints.push_back(cp.t);

  const auto art = pl::load_artifacts(s.cfg, uc::Mode::Fcuc);
  auto o = pl::solve_options(s.cfg, art, uc::Mode::Fcuc);
  o.nadir_net = &nadir;
  o.step_net = &step;
  const auto dense = uc::solve_case(art.uc, o);
  const double ratio = dense.wall_seconds / sparse_seconds;
  return {dense.status == milp::Status::Optimal && ratio >= 2.0,
          fmt::format("sparse [4,16,16,.] {:.2f} s vs dense {:.2f} s ({} vs {} active weights), speedup {:.1f}x",
                      sparse_seconds, dense.wall_seconds, s.trained.nadir.active_params(), nadir.active_params(),
                      ratio)};
}

}  // namespace

int main() {
  const auto t_all = Clock::now();
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    fmt::print("[{}] {:>2}. {}: {} [{:.1f} s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail, since(t0));
    std::fflush(stdout);
  };

  Shared s;
  pl::Overrides ov;
  ov.out_dir = (fs::current_path() / "acceptance_out").string();
  s.cfg = pl::load_config(std::string(FCUC_SOURCE_DIR) + "/configs/desk.json", ov);
  s.ds = pl::run_sample(s.cfg);
  s.split = pl::split_data(s.ds, s.cfg.test_fraction, s.cfg.seed);
  s.trained = pl::run_train(s.cfg);
  s.region = pl::run_region(s.cfg);
  s.desk = uc::load_case(s.cfg.case_path);
  std::vector<pl::EvalRow> eval_rows;
  try {
    eval_rows = pl::run_eval(s.cfg);
  } catch (const std::exception& e) {
    fmt::print("eval stage failed: {}\n", e.what());
  }
  fmt::print("desk pipeline: {} samples ({} stable), train {} / test {}, region {} clusters [{:.1f} s]\n",
             s.ds.rows.size(), s.ds.stable_count(), s.split.x_train.size(), s.split.x_test.size(),
             s.region.clusters.size(), since(t_all));

  double fcuc_seconds = 0.0;
  report(1, "SFR closed form vs grid oracle", sfr_closed_form);
  report(2, "conservative loss gradient", loss_gradient);
  report(3, "conservativeness", [&] { return conservativeness(s, eval_rows); });
  report(4, "accuracy", [&] { return accuracy(s); });
  report(5, "sparsity", [&] { return sparsity(s); });
  report(6, "encoding exactness", [&] { return encoding_exactness(s); });
  report(7, "region soundness", [&] { return region_soundness(s); });
  report(8, "UC correctness", [&] { return uc_correctness(s); });
  report(9, "end-to-end FCUC stability", [&] { return fcuc_stability(s, fcuc_seconds); });
  report(10, "sparse embedding speedup", [&] {
    if (fcuc_seconds <= 0.0) return Outcome{false, "no FCUC solve time from criterion 9"};
    return sparse_speedup(s, fcuc_seconds);
  });
  report(11, "MPS round-trip", [&] {
    return Outcome{g_mps.models > 0 && g_mps.mismatches == 0,
                   fmt::format("{} models from criteria 6-9 ({} rows), {} mismatches", g_mps.models, g_mps.rows,
                               g_mps.mismatches)};
  });
  fmt::print("{} of 11 criteria pass [{:.1f} s total]\n", 11 - failures, since(t_all));
  return failures == 0 ? 0 : 1;
}
