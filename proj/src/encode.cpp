#include "fcuc/encode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fcuc::encode {

NeuronBounds propagate_bounds(const csnn::Network& net, const std::vector<Interval>& input_box) {
  if (static_cast<int>(input_box.size()) != net.inputs()) throw std::invalid_argument("bounds: input box dimension");
  for (const auto& iv : input_box)
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi)
      throw std::invalid_argument("bounds: input box must be finite and ordered");
  NeuronBounds nb;
  std::vector<Interval> in = input_box;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& L = net.layers[l];
    std::vector<Interval> pre(static_cast<std::size_t>(L.out));
    for (int i = 0; i < L.out; ++i) {
      double lo = L.b[static_cast<std::size_t>(i)], hi = lo;
      for (int j = 0; j < L.in; ++j) {
        const double w = L.weight(i, j);
        if (w > 0.0) {
          lo += w * in[static_cast<std::size_t>(j)].lo;
          hi += w * in[static_cast<std::size_t>(j)].hi;
        } else if (w < 0.0) {
          lo += w * in[static_cast<std::size_t>(j)].hi;
          hi += w * in[static_cast<std::size_t>(j)].lo;
        }
      }
      pre[static_cast<std::size_t>(i)] = {lo, hi};
    }
    in.resize(pre.size());
    for (std::size_t i = 0; i < pre.size(); ++i) in[i] = {std::max(0.0, pre[i].lo), std::max(0.0, pre[i].hi)};
    nb.pre.push_back(std::move(pre));
  }
  return nb;
}

NnHandles emit_nn_constraints(const csnn::Network& net, const NeuronBounds& bounds, milp::MilpModel& model,
                              const std::vector<milp::Var>& x_vars, const std::vector<milp::Var>& out_vars,
                              const EncodeOptions& opts) {
  if (static_cast<int>(x_vars.size()) != net.inputs() || static_cast<int>(out_vars.size()) != net.outputs())
    throw milp::ModelError("network encoding: variable counts do not match the network shape");
  for (const auto* vs : {&x_vars, &out_vars})
    for (auto v : *vs)
      if (!v.valid() || static_cast<std::size_t>(v.index) >= model.num_vars())
        throw milp::ModelError("network encoding: variable missing from the model");
  if (bounds.pre.size() != net.layers.size()) throw milp::ModelError("network encoding: bounds do not match");
  const std::size_t nl = net.layers.size();

  // Hidden units that can reach an output through nonzero weights.
  std::vector<std::vector<char>> live(nl);
  live[nl - 1].assign(static_cast<std::size_t>(net.outputs()), 1);
  for (std::size_t l = nl - 1; l-- > 0;) {
    const auto& next = net.layers[l + 1];
    live[l].assign(static_cast<std::size_t>(net.layers[l].out), opts.presolve ? 0 : 1);
    if (!opts.presolve) continue;
    for (int i = 0; i < next.out; ++i) {
      if (!live[l + 1][static_cast<std::size_t>(i)]) continue;
      for (int j = 0; j < next.in; ++j)
        if (next.weight(i, j) != 0.0) live[l][static_cast<std::size_t>(j)] = 1;
    }
  }

  NnHandles h;
  std::vector<milp::LinExpr> prev;
  for (auto v : x_vars) prev.emplace_back(v);
  for (std::size_t l = 0; l < nl; ++l) {
    const auto& L = net.layers[l];
    const bool hidden = l + 1 < nl;
    std::vector<milp::LinExpr> cur(static_cast<std::size_t>(L.out));
    if (hidden) {
      h.post.emplace_back(static_cast<std::size_t>(L.out));
      h.active.emplace_back(static_cast<std::size_t>(L.out));
    }
    for (int i = 0; i < L.out; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (hidden && !live[l][ui]) {
        ++h.unreachable;
        continue;
      }
      milp::LinExpr pre(L.b[ui]);
      for (int j = 0; j < L.in; ++j) {
        const double w = L.weight(i, j);
        if (w != 0.0) pre += w * prev[static_cast<std::size_t>(j)];
      }
      pre = pre.normalized();
      const std::string name = opts.prefix + "_" + std::to_string(l) + "_" + std::to_string(i);
      if (!hidden) {
        pre.add(out_vars[ui], -1.0);
        model.add_constraint(pre, milp::Sense::Equal, 0.0, name + "_out");
        continue;
      }
      const auto [lo, hi] = bounds.pre[l][ui];
      if (opts.presolve && hi <= 0.0) {
        ++h.fixed_inactive;
        continue;
      }
      if (opts.presolve && lo >= 0.0) {
        ++h.fixed_active;
        cur[ui] = pre;
        continue;
      }
      const double vhi = std::max(hi, 0.0);
      auto v = model.add_continuous(name + "_v", 0.0, vhi);
      auto t = model.add_binary(name + "_t");
      h.post.back()[ui] = v;
      h.active.back()[ui] = t;
      ++h.binaries;
      // v >= pre
      milp::LinExpr a = milp::LinExpr(v) - pre;
      model.add_constraint(a, milp::Sense::GreaterEqual, 0.0, name + "_ge");
      // v <= pre - lo (1 - t)
      if (lo < 0.0) {
        milp::LinExpr b = milp::LinExpr(v) - pre;
        b.add(t, -lo);
        model.add_constraint(b, milp::Sense::LessEqual, -lo, name + "_lo");
      } else {
        milp::LinExpr b = milp::LinExpr(v) - pre;
        model.add_constraint(b, milp::Sense::LessEqual, 0.0, name + "_lo");
      }
      // v <= hi t
      milp::LinExpr c(v);
      c.add(t, -vhi);
      model.add_constraint(c, milp::Sense::LessEqual, 0.0, name + "_hi");
      cur[ui] = milp::LinExpr(v);
    }
    prev = std::move(cur);
  }
  return h;
}

}  // namespace fcuc::encode
