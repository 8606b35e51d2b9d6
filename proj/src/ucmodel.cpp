#include "fcuc/ucmodel.hpp"

#include <algorithm>
#include <cmath>

namespace fcuc::uc {

using milp::LinExpr;
using milp::Sense;
using milp::Var;

namespace {

constexpr int kPriorityCommit = 3;
constexpr int kPriorityParticipation = 2;
constexpr int kPriorityTransition = 1;

std::string tag(const std::string& a, int t) { return a + "_" + std::to_string(t); }

}  // namespace

UcBuild build_uc(const UcCase& c) {
  c.validate();
  UcBuild b;
  b.model = milp::MilpModel(c.name);
  auto& m = b.model;
  auto& h = b.h;
  const int T = c.periods;
  const auto ng = c.thermal.size(), nd = c.der.size(), nb = c.buses.size();
  h.on.assign(ng, {});
  h.start.assign(ng, {});
  h.stop.assign(ng, {});
  h.p.assign(ng, {});
  h.seg.assign(ng, {});
  h.der_p.assign(nd, {});
  h.der_u.assign(nd, std::vector<Var>(static_cast<std::size_t>(T)));
  h.shed.assign(nb, {});
  h.angle.assign(nb, {});
  h.balance.assign(nb, {});

  for (int t = 0; t < T; ++t) {
    for (std::size_t g = 0; g < ng; ++g) {
      const auto& u = c.thermal[g];
      // Cost at p_min is carried by the status; reserve R = p_max x - p.
      auto x = m.add_binary(tag(u.name + "_on", t), u.fuel.front().cost + u.reserve_cost * u.p_max);
      auto su = m.add_binary(tag(u.name + "_su", t), u.startup_cost);
      auto sd = m.add_binary(tag(u.name + "_sd", t), u.shutdown_cost);
      m.set_priority(x, kPriorityCommit);
      m.set_priority(su, kPriorityTransition);
      m.set_priority(sd, kPriorityTransition);
      auto p = m.add_continuous(tag(u.name + "_p", t), 0.0, u.p_max, -u.reserve_cost);
      LinExpr def = LinExpr(p) - u.p_min * LinExpr(x);
      std::vector<Var> segs;
      for (std::size_t k = 1; k < u.fuel.size(); ++k) {
        const double width = u.fuel[k].p - u.fuel[k - 1].p;
        const double slope = (u.fuel[k].cost - u.fuel[k - 1].cost) / width;
        auto s = m.add_continuous(tag(u.name + "_seg" + std::to_string(k), t), 0.0, width, slope);
        LinExpr cap(s);
        cap.add(x, -width);
        m.add_constraint(cap, Sense::LessEqual, 0.0, tag(u.name + "_segcap" + std::to_string(k), t));
        def.add(s, -1.0);
        segs.push_back(s);
      }
      m.add_constraint(def, Sense::Equal, 0.0, tag(u.name + "_pdef", t));

      // Start-up and shut-down logic.
      const bool first = t == 0;
      const double x_prev0 = u.initial_on ? 1.0 : 0.0;
      LinExpr logic = LinExpr(su) - LinExpr(sd) - LinExpr(x);
      if (first) logic.add_constant(x_prev0);
      else logic.add(h.on[g][static_cast<std::size_t>(t - 1)], 1.0);
      m.add_constraint(logic, Sense::Equal, 0.0, tag(u.name + "_logic", t));
      m.add_constraint(LinExpr(su) + LinExpr(sd), Sense::LessEqual, 1.0, tag(u.name + "_once", t));

      // Ramping with start-up/shut-down allowances; skipped when never binding.
      LinExpr p_prev = first ? LinExpr(u.initial_p) : LinExpr(h.p[g][static_cast<std::size_t>(t - 1)]);
      LinExpr x_prev = first ? LinExpr(x_prev0) : LinExpr(h.on[g][static_cast<std::size_t>(t - 1)]);
      if (u.ramp_up < u.p_max || u.startup_ramp < u.p_max) {
        LinExpr r = LinExpr(p) - p_prev - u.ramp_up * x_prev;
        r.add(su, -u.startup_ramp);
        m.add_constraint(r, Sense::LessEqual, 0.0, tag(u.name + "_rampup", t));
      }
      if (u.ramp_down < u.p_max || u.shutdown_ramp < u.p_max) {
        LinExpr r = p_prev - LinExpr(p);
        r.add(x, -u.ramp_down);
        r.add(sd, -u.shutdown_ramp);
        m.add_constraint(r, Sense::LessEqual, 0.0, tag(u.name + "_rampdown", t));
      }
      h.on[g].push_back(x);
      h.start[g].push_back(su);
      h.stop[g].push_back(sd);
      h.p[g].push_back(p);
      h.seg[g].push_back(std::move(segs));
    }

    for (std::size_t d = 0; d < nd; ++d) {
      const auto& r = c.der[d];
      const double fc = r.forecast[static_cast<std::size_t>(t)];
      // Reserve R = forecast - p.
      h.der_p[d].push_back(m.add_continuous(tag(r.name + "_p", t), 0.0, fc, -r.reserve_cost));
      m.add_obj_offset(r.reserve_cost * fc);
    }

    for (std::size_t n = 0; n < nb; ++n) {
      const auto& bus = c.buses[n];
      const double load = bus.load[static_cast<std::size_t>(t)];
      h.shed[n].push_back(m.add_continuous(tag(bus.name + "_shed", t), 0.0, load, c.shed_cost));
      const double lim = bus.slack ? 0.0 : milp::kInf;
      h.angle[n].push_back(m.add_continuous(tag(bus.name + "_angle", t), -lim, lim));
    }

    std::vector<LinExpr> injection(nb);
    for (std::size_t g = 0; g < ng; ++g)
      injection[static_cast<std::size_t>(c.thermal[g].bus)].add(h.p[g].back(), 1.0);
    for (std::size_t d = 0; d < nd; ++d)
      injection[static_cast<std::size_t>(c.der[d].bus)].add(h.der_p[d].back(), 1.0);
    for (std::size_t n = 0; n < nb; ++n) injection[n].add(h.shed[n].back(), 1.0);
    for (std::size_t l = 0; l < c.lines.size(); ++l) {
      const auto& ln = c.lines[l];
      const auto a = static_cast<std::size_t>(ln.from), z = static_cast<std::size_t>(ln.to);
      LinExpr flow;
      flow.add(h.angle[a].back(), ln.susceptance);
      flow.add(h.angle[z].back(), -ln.susceptance);
      m.add_range(flow, -ln.limit, ln.limit, tag("line" + std::to_string(l), t));
      injection[a] -= flow;
      injection[z] += flow;
    }
    for (std::size_t n = 0; n < nb; ++n)
      h.balance[n].push_back(m.add_constraint(injection[n], Sense::Equal, c.buses[n].load[static_cast<std::size_t>(t)],
                                              tag(c.buses[n].name + "_balance", t)));

    // Online capacity plus forecasts and shed cover load and forecast errors.
    LinExpr cap;
    double der_total = 0.0;
    for (const auto& r : c.der) der_total += r.forecast[static_cast<std::size_t>(t)];
    for (std::size_t g = 0; g < ng; ++g) cap.add(h.on[g].back(), c.thermal[g].p_max);
    for (std::size_t n = 0; n < nb; ++n) cap.add(h.shed[n].back(), 1.0);
    cap.add_constant(der_total);
    m.add_constraint(cap, Sense::GreaterEqual, (1.0 + c.eps_load) * c.total_load(t) + (1.0 + c.eps_der) * der_total,
                     tag("reserve", t));
  }
  return b;
}

AggregateExpr aggregate_inertia_expr(const UcCase& c, const UcHandles& h, int t) {
  const auto ut = static_cast<std::size_t>(t);
  const double pg = c.base_sync, pall = c.base_sync + c.base_der;
  AggregateExpr a;
  for (std::size_t g = 0; g < c.thermal.size(); ++g) {
    const auto& u = c.thermal[g];
    const auto x = h.on[g][ut];
    a.M.add(x, u.inertia.M * u.rating / pall);
    a.D.add(x, u.inertia.D * u.rating / pall);
    a.Rg.add(x, u.inertia.K / u.inertia.R * u.rating / pg);
    a.Fg.add(x, u.inertia.K * u.inertia.F / u.inertia.R * u.rating / pg);
  }
  for (std::size_t d = 0; d < c.der.size(); ++d) {
    if (d >= h.der_u.size() || !h.der_u[d][ut].valid()) continue;
    const auto& r = c.der[d];
    const auto u = h.der_u[d][ut];
    if (r.control == DerControl::Vsm) {
      a.M.add(u, r.inertia.M * r.rating / pall);
      a.D.add(u, r.inertia.D * r.rating / pall);
    } else {
      a.D.add(u, r.inertia.K / r.inertia.R * r.rating / pall);
    }
  }
  return a;
}

std::array<double, 4> aggregate_values(const UcCase& c, const std::vector<bool>& unit_on,
                                       const std::vector<bool>& der_on) {
  if (unit_on.size() != c.thermal.size() || (!der_on.empty() && der_on.size() != c.der.size()))
    throw std::invalid_argument("aggregate_values: status vector sizes");
  const double pg = c.base_sync, pall = c.base_sync + c.base_der;
  double Ms = 0.0, Ds = 0.0, R = 0.0, F = 0.0;
  for (std::size_t g = 0; g < c.thermal.size(); ++g) {
    if (!unit_on[g]) continue;
    const auto& u = c.thermal[g];
    Ms += u.inertia.M * u.rating;
    Ds += u.inertia.D * u.rating;
    R += u.inertia.K / u.inertia.R * u.rating;
    F += u.inertia.K * u.inertia.F / u.inertia.R * u.rating;
  }
  for (std::size_t d = 0; d < der_on.size(); ++d) {
    if (!der_on[d]) continue;
    const auto& r = c.der[d];
    if (r.control == DerControl::Vsm) {
      Ms += r.inertia.M * r.rating;
      Ds += r.inertia.D * r.rating;
    } else {
      Ds += r.inertia.K / r.inertia.R * r.rating;
    }
  }
  return {Ms / pall, Ds / pall, R / pg, F / pg};
}

namespace {

bool same_norm(const std::array<double, 4>& a, const std::array<double, 4>& b) {
  for (int i = 0; i < 4; ++i)
    if (std::abs(a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)]) >
        1e-12 * std::max(1.0, std::abs(a[static_cast<std::size_t>(i)])))
      return false;
  return true;
}

void check_artifacts(const csnn::Network& nadir, const csnn::Network* step, const region::StabilityRegion& reg,
                     const sfr::StepwiseLimit& lim) {
  if (nadir.inputs() != 4 || nadir.outputs() != 1) throw ConfigError("nadir network must map 4 inputs to 1 output");
  if (reg.clusters.empty()) throw ConfigError("stability region has no clusters");
  if (!same_norm(nadir.input_norm, reg.normalization))
    throw ConfigError("nadir network normalisation differs from the region");
  if (!nadir.dataset_hash.empty() && !reg.dataset_hash.empty() && nadir.dataset_hash != reg.dataset_hash)
    throw ConfigError("nadir network and region come from different datasets");
  if (!step) return;
  if (step->inputs() != 4 || step->outputs() != static_cast<int>(lim.checkpoints.size()))
    throw ConfigError("stepwise network outputs must match the checkpoints");
  if (!same_norm(step->input_norm, reg.normalization))
    throw ConfigError("stepwise network normalisation differs from the region");
  if (!step->dataset_hash.empty() && !reg.dataset_hash.empty() && step->dataset_hash != reg.dataset_hash)
    throw ConfigError("stepwise network and region come from different datasets");
  if (step->checkpoints.size() != lim.checkpoints.size())
    throw ConfigError("stepwise network checkpoints differ from the limit");
  for (std::size_t j = 0; j < lim.checkpoints.size(); ++j)
    if (std::abs(step->checkpoints[j] - lim.checkpoints[j].t) > 1e-9)
      throw ConfigError("stepwise network checkpoints differ from the limit");
}

}  // namespace

FrequencyHandles add_frequency_constraints(UcBuild& b, const UcCase& c, const csnn::Network& nadir_net,
                                           const csnn::Network* step_net, const region::StabilityRegion& reg,
                                           const FrequencyConfig& cfg) {
  cfg.limit.validate();
  check_artifacts(nadir_net, step_net, reg, cfg.limit);
  if (!(cfg.limit.f_nominal == c.f_nominal)) throw ConfigError("limit and case disagree on nominal frequency");
  auto& m = b.model;
  auto& h = b.h;
  const int T = c.periods;
  const double fN = c.f_nominal;
  const double dev = (fN - cfg.limit.f_min) / fN;  // nominal taken as f_0

  // Input box: componentwise extent of the region generators.
  std::vector<encode::Interval> box(4, {1e300, -1e300});
  for (const auto& cl : reg.clusters)
    for (const auto& g : cl.generators)
      for (std::size_t i = 0; i < 4; ++i) {
        box[i].lo = std::min(box[i].lo, g[i]);
        box[i].hi = std::max(box[i].hi, g[i]);
      }
  const auto nadir_bounds = encode::propagate_bounds(nadir_net, box);
  std::optional<encode::NeuronBounds> step_bounds;
  if (step_net) step_bounds = encode::propagate_bounds(*step_net, box);

  FrequencyHandles fh;
  for (int t = 0; t < T; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    for (std::size_t d = 0; d < c.der.size(); ++d) {
      const auto& r = c.der[d];
      auto u = m.add_binary(tag(r.name + "_u", t));
      m.set_priority(u, kPriorityParticipation);
      // A converter with no forecast output has nothing to respond with.
      if (r.forecast[ut] <= 0.0) m.set_bounds(u, 0.0, 0.0);
      h.der_u[d][ut] = u;
    }
    const auto agg = aggregate_inertia_expr(c, h, t);
    const std::array<const LinExpr*, 4> exprs{&agg.M, &agg.D, &agg.Rg, &agg.Fg};
    static const char* const kNames[4] = {"M", "D", "Rg", "Fg"};
    std::array<Var, 4> av{}, xn{};
    for (std::size_t i = 0; i < 4; ++i) {
      av[i] = m.add_continuous(tag(std::string("agg") + kNames[i], t), 0.0, milp::kInf);
      m.add_constraint(LinExpr(av[i]) - *exprs[i], Sense::Equal, 0.0, tag(std::string("aggdef") + kNames[i], t));
      xn[i] = m.add_continuous(tag(std::string("norm") + kNames[i], t), box[i].lo, box[i].hi);
      LinExpr link(xn[i], reg.normalization[i]);
      link.add(av[i], -1.0);
      m.add_constraint(link, Sense::Equal, 0.0, tag(std::string("normdef") + kNames[i], t));
    }

    if (cfg.dP > 0.0) {
      // |dP / M| f_N <= RoCoF_max and |dP / (D + R_g)| f_N <= qss_max.
      m.add_constraint(LinExpr(av[0]), Sense::GreaterEqual, cfg.dP * fN / cfg.limit.rocof_max, tag("rocof", t));
      m.add_constraint(LinExpr(av[1]) + LinExpr(av[2]), Sense::GreaterEqual, cfg.dP * fN / cfg.limit.qss_max,
                       tag("qss", t));
    }

    (void)region::emit_region_constraints(reg, m, xn, tag("reg", t));

    const std::vector<Var> xin(xn.begin(), xn.end());
    auto y = m.add_continuous(tag("nadir", t), cfg.limit.f_min, milp::kInf);
    encode::EncodeOptions eo;
    eo.prefix = tag("nn", t);
    fh.nadir_nn.push_back(encode::emit_nn_constraints(nadir_net, nadir_bounds, m, xin, {y}, eo));
    fh.nn_binaries += fh.nadir_nn.back().binaries;
    fh.nadir.push_back(y);
    std::vector<Var> ys;
    if (step_net) {
      for (std::size_t j = 0; j < cfg.limit.checkpoints.size(); ++j)
        ys.push_back(m.add_continuous(tag("step" + std::to_string(j), t), cfg.limit.checkpoints[j].floor, milp::kInf));
      eo.prefix = tag("sn", t);
      fh.stepwise_nn.push_back(encode::emit_nn_constraints(*step_net, *step_bounds, m, xin, ys, eo));
      fh.nn_binaries += fh.stepwise_nn.back().binaries;
    }
    fh.stepwise.push_back(std::move(ys));
    fh.aggregate.push_back(av);
    fh.normalized.push_back(xn);

    if (cfg.headroom) {
      for (std::size_t g = 0; g < c.thermal.size(); ++g) {
        const auto& u = c.thermal[g];
        const double need = u.inertia.K / u.inertia.R * c.gamma * dev;
        LinExpr e(h.p[g][ut]);
        e.add(h.on[g][ut], -(1.0 - need) * u.p_max);
        m.add_constraint(e, Sense::LessEqual, 0.0, tag(u.name + "_headroom", t));
      }
      for (std::size_t d = 0; d < c.der.size(); ++d) {
        const auto& r = c.der[d];
        const double fc = r.forecast[ut];
        if (fc <= 0.0) continue;
        const double droop = r.control == DerControl::Droop ? r.inertia.R : r.headroom_droop;
        LinExpr e(h.der_p[d][ut]);
        e.add(h.der_u[d][ut], fc * c.gamma * dev / droop);
        m.add_constraint(e, Sense::LessEqual, fc, tag(r.name + "_headroom", t));
      }
    }
  }
  return fh;
}

}  // namespace fcuc::uc
