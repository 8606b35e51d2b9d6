#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <tuple>

#include "fcuc/csnn.hpp"
#include "fcuc/encode.hpp"
#include "fcuc/milp/bnb.hpp"
#include "oracles/nn_oracle.hpp"

using namespace fcuc;
using namespace fcuc::encode;
using milp::MilpModel;
using milp::Var;

namespace {

struct Built {
  MilpModel model;
  std::vector<Var> x, y;
  NnHandles h;
};

Built build(const csnn::Network& net, const std::vector<Interval>& box, bool presolve = true) {
  Built b;
  for (int i = 0; i < net.inputs(); ++i)
    b.x.push_back(b.model.add_continuous("x" + std::to_string(i), box[static_cast<std::size_t>(i)].lo,
                                         box[static_cast<std::size_t>(i)].hi));
  for (int i = 0; i < net.outputs(); ++i) b.y.push_back(b.model.add_continuous("y" + std::to_string(i), -milp::kInf, milp::kInf));
  EncodeOptions o;
  o.presolve = presolve;
  b.h = emit_nn_constraints(net, propagate_bounds(net, box), b.model, b.x, b.y, o);
  return b;
}

std::vector<double> ref_forward(const csnn::Network& net, const std::vector<double>& x) {
  std::vector<oracle::DenseLayer> ls;
  for (const auto& L : net.layers) {
    oracle::DenseLayer d;
    d.b = L.b;
    d.w.assign(static_cast<std::size_t>(L.out), std::vector<double>(static_cast<std::size_t>(L.in)));
    for (int i = 0; i < L.out; ++i)
      for (int j = 0; j < L.in; ++j) d.w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = L.weight(i, j);
    ls.push_back(std::move(d));
  }
  return oracle::mlp(ls, x);
}

std::vector<Interval> unit_box(int n) { return std::vector<Interval>(static_cast<std::size_t>(n), {0.0, 1.0}); }

csnn::Network scalar_relu(double w, double b) {
  auto net = csnn::make_network({1, 1, 1}, 0.0, 1);
  net.layers[0].w = {w};
  net.layers[0].b = {b};
  net.layers[1].w = {1.0};
  net.layers[1].b = {0.0};
  return net;
}

}  // namespace

TEST_CASE("interval bounds of a scalar ReLU") {
  auto net = scalar_relu(2.0, -1.0);
  auto nb = propagate_bounds(net, {{0.0, 1.0}});
  CHECK(nb.pre[0][0].lo == -1.0);
  CHECK(nb.pre[0][0].hi == 1.0);
  CHECK(nb.pre[1][0].lo == 0.0);
  CHECK(nb.pre[1][0].hi == 1.0);
  auto neg = scalar_relu(-3.0, 0.5);
  auto nn = propagate_bounds(neg, {{0.0, 2.0}});
  CHECK(nn.pre[0][0].lo == -5.5);
  CHECK(nn.pre[0][0].hi == 0.5);
  CHECK_THROWS_AS((void)propagate_bounds(net, {{1.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS((void)propagate_bounds(net, {{0.0, 1.0}, {0.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("scalar ReLU encodings") {
  // Mixed sign: one binary, exact at fixed inputs.
  {
    auto net = scalar_relu(2.0, -1.0);
    auto b = build(net, {{0.0, 1.0}});
    CHECK(b.h.binaries == 1);
    for (double x : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      auto m = b.model;
      m.set_bounds(b.x[0], x, x);
      m.set_obj(b.y[0], 1.0);
      auto lo = milp::bnb_solve(m);
      m.set_obj(b.y[0], -1.0);
      auto hi = milp::bnb_solve(m);
      REQUIRE(lo.status == milp::Status::Optimal);
      REQUIRE(hi.status == milp::Status::Optimal);
      CHECK(lo.value(b.y[0]) == doctest::Approx(std::max(0.0, 2 * x - 1)).epsilon(1e-9));
      CHECK(hi.value(b.y[0]) == doctest::Approx(std::max(0.0, 2 * x - 1)).epsilon(1e-9));
    }
  }
  // Always inactive: no binary, output pinned to zero.
  {
    auto b = build(scalar_relu(-1.0, -0.1), {{0.0, 1.0}});
    CHECK(b.h.binaries == 0);
    CHECK(b.h.fixed_inactive == 1);
    b.model.set_obj(b.y[0], -1.0);
    auto r = milp::lp_solve(b.model);
    REQUIRE(r.status == milp::Status::Optimal);
    CHECK(r.value(b.y[0]) == doctest::Approx(0.0));
  }
  // Always active: no binary, output equals the affine map.
  {
    auto b = build(scalar_relu(1.5, 0.2), {{0.0, 1.0}});
    CHECK(b.h.binaries == 0);
    CHECK(b.h.fixed_active == 1);
    b.model.set_obj(b.y[0], -1.0);
    auto r = milp::lp_solve(b.model);
    REQUIRE(r.status == milp::Status::Optimal);
    CHECK(r.value(b.y[0]) == doctest::Approx(1.7));
  }
}

TEST_CASE("identity layer bounds and zero-weight bounds") {
  auto id = scalar_relu(1.0, 0.0);
  auto nb = propagate_bounds(id, {{0.0, 1.0}});
  CHECK(nb.pre[0][0].lo == 0.0);
  CHECK(nb.pre[0][0].hi == 1.0);
  auto z = csnn::make_network({3, 4, 2}, 0.0, 2);
  for (auto& L : z.layers) {
    std::fill(L.w.begin(), L.w.end(), 0.0);
    for (std::size_t i = 0; i < L.b.size(); ++i) L.b[i] = static_cast<double>(i) - 1.5;
  }
  auto zb = propagate_bounds(z, unit_box(3));
  for (const auto& layer : zb.pre)
    for (std::size_t i = 0; i < layer.size(); ++i) {
      CHECK(layer[i].lo == static_cast<double>(i) - 1.5);
      CHECK(layer[i].hi == static_cast<double>(i) - 1.5);
    }
}

TEST_CASE("fixed scalar input pins the unit state") {
  auto net = scalar_relu(1.0, 0.0);
  for (auto [x, v_expect, t_expect] : {std::tuple{2.0, 2.0, 1.0}, std::tuple{-3.0, 0.0, 0.0}}) {
    auto b = build(net, {{-5.0, 5.0}});
    REQUIRE(b.h.binaries == 1);
    const Var v = b.h.post[0][0], t = b.h.active[0][0];
    b.model.set_bounds(b.x[0], x, x);
    for (Var obj : {v, t})
      for (double sgn : {1.0, -1.0}) {
        auto m = b.model;
        m.set_obj(obj, sgn);
        auto r = milp::bnb_solve(m);
        REQUIRE(r.status == milp::Status::Optimal);
        CHECK(r.value(v) == doctest::Approx(v_expect));
        CHECK(r.value(t) == doctest::Approx(t_expect));
      }
  }
}

TEST_CASE("interval bounds contain sampled preactivations") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto net = csnn::make_network({4, 16, 16, 2}, 0.87, seed);
    for (auto& b : net.layers[0].b) b = 0.3 * (static_cast<double>(&b - net.layers[0].b.data()) - 8.0) / 8.0;
    std::vector<Interval> box{{0.1, 0.9}, {0.0, 0.5}, {0.2, 1.0}, {0.3, 0.4}};
    auto nb = propagate_bounds(net, box);
    std::mt19937_64 rng(seed);
    int violations = 0;
    for (int s = 0; s < 10000; ++s) {
      std::vector<double> x(4);
      for (int j = 0; j < 4; ++j) {
        std::uniform_real_distribution<double> u(box[static_cast<std::size_t>(j)].lo, box[static_cast<std::size_t>(j)].hi);
        x[static_cast<std::size_t>(j)] = u(rng);
      }
      auto pre = net.preactivations(x);
      for (std::size_t l = 0; l < pre.size(); ++l)
        for (std::size_t i = 0; i < pre[l].size(); ++i)
          if (pre[l][i] < nb.pre[l][i].lo - 1e-12 || pre[l][i] > nb.pre[l][i].hi + 1e-12) ++violations;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("encoding is exact at fixed inputs") {
  auto net = csnn::make_network({4, 8, 8, 2}, 0.5, 11);
  for (auto& L : net.layers)
    for (std::size_t i = 0; i < L.b.size(); ++i) L.b[i] = 0.2 * std::sin(static_cast<double>(i) + 1.0);
  const auto box = unit_box(4);
  auto b = build(net, box);
  CHECK(b.h.binaries <= 16);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x{u(rng), u(rng), u(rng), u(rng)};
    const auto ref = ref_forward(net, x);
    auto m = b.model;
    for (int j = 0; j < 4; ++j) m.set_bounds(b.x[static_cast<std::size_t>(j)], x[static_cast<std::size_t>(j)], x[static_cast<std::size_t>(j)]);
    for (int k = 0; k < 2; ++k) {
      for (double sgn : {1.0, -1.0}) {
        auto mm = m;
        mm.set_obj(b.y[static_cast<std::size_t>(k)], sgn);
        auto r = milp::bnb_solve(mm);
        REQUIRE(r.status == milp::Status::Optimal);
        CHECK(std::abs(r.value(b.y[static_cast<std::size_t>(k)]) - ref[static_cast<std::size_t>(k)]) <= 1e-6);
      }
    }
  }
}

TEST_CASE("box extrema match the network and bound every sample") {
  auto net = csnn::make_network({4, 8, 8, 2}, 0.5, 23);
  for (auto& L : net.layers)
    for (std::size_t i = 0; i < L.b.size(); ++i) L.b[i] = 0.3 * std::cos(static_cast<double>(i));
  const auto box = unit_box(4);
  auto b = build(net, box);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> samples(20000);
  for (auto& s : samples) s = {u(rng), u(rng), u(rng), u(rng)};
  for (int k = 0; k < 2; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    double smin = 1e300, smax = -1e300;
    for (const auto& s : samples) {
      const double v = ref_forward(net, s)[uk];
      smin = std::min(smin, v);
      smax = std::max(smax, v);
    }
    for (double sgn : {1.0, -1.0}) {
      auto m = b.model;
      m.set_obj(b.y[uk], sgn);
      auto r = milp::bnb_solve(m);
      REQUIRE(r.status == milp::Status::Optimal);
      std::vector<double> xs;
      for (auto v : b.x) xs.push_back(r.value(v));
      const double at = ref_forward(net, xs)[uk];
      CHECK(std::abs(at - r.value(b.y[uk])) <= 1e-6);
      if (sgn > 0) CHECK(r.value(b.y[uk]) <= smin + 1e-9);
      else CHECK(r.value(b.y[uk]) >= smax - 1e-9);
    }
  }
}

TEST_CASE("presolve leaves the optimum unchanged and never adds binaries") {
  for (std::uint64_t seed : {3u, 4u, 5u, 6u}) {
    auto net = csnn::make_network({4, 16, 16, 1}, 0.87, seed);
    for (auto& L : net.layers)
      for (std::size_t i = 0; i < L.b.size(); ++i) L.b[i] = 0.5 * std::sin(3.0 * static_cast<double>(i) + static_cast<double>(seed));
    std::vector<Interval> box{{0.2, 0.8}, {0.0, 1.0}, {0.4, 0.6}, {0.1, 0.9}};
    auto on = build(net, box, true);
    auto off = build(net, box, false);
    CHECK(on.h.binaries <= off.h.binaries);
    CHECK(off.h.binaries == 32);
    CHECK(on.h.binaries + on.h.fixed_active + on.h.fixed_inactive + on.h.unreachable == 32);
    for (double sgn : {1.0, -1.0}) {
      on.model.set_obj(on.y[0], sgn);
      off.model.set_obj(off.y[0], sgn);
      auto a = milp::bnb_solve(on.model);
      auto c = milp::bnb_solve(off.model);
      REQUIRE(a.status == milp::Status::Optimal);
      REQUIRE(c.status == milp::Status::Optimal);
      CHECK(std::abs(a.objective - c.objective) <= 1e-7);
    }
  }
}

TEST_CASE("masked weights do not materialise") {
  auto net = csnn::make_network({4, 16, 16, 1}, 0.87, 7);
  auto dense = csnn::make_network({4, 16, 16, 1}, 0.0, 7);
  const auto box = unit_box(4);
  auto count = [&](const csnn::Network& n) {
    auto b = build(n, box, false);
    return b.model.num_nonzeros();
  };
  CHECK(count(net) < count(dense));
}

TEST_CASE("shape errors") {
  auto net = csnn::make_network({4, 8, 1}, 0.0, 1);
  MilpModel m;
  std::vector<Var> x;
  for (int i = 0; i < 4; ++i) x.push_back(m.add_continuous("x" + std::to_string(i), 0, 1));
  auto y = m.add_continuous("y", -milp::kInf, milp::kInf);
  auto nb = propagate_bounds(net, unit_box(4));
  CHECK_THROWS_AS((void)emit_nn_constraints(net, nb, m, {x[0], x[1]}, {y}), milp::ModelError);
  CHECK_THROWS_AS((void)emit_nn_constraints(net, nb, m, x, {Var{}}), milp::ModelError);
}
