#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <sstream>

#include "fcuc/ucmodel.hpp"
#include "fcuc/util.hpp"

namespace fcuc::uc {

using nlohmann::json;

const char* to_string(Mode m) { return m == Mode::Fcuc ? "fcuc" : "conventional"; }

namespace {

double fuel_cost(const ThermalUnit& u, double p) {
  if (u.fuel.size() == 1) return u.fuel.front().cost;
  for (std::size_t k = 1; k < u.fuel.size(); ++k) {
    const auto& a = u.fuel[k - 1];
    const auto& b = u.fuel[k];
    if (p <= b.p || k + 1 == u.fuel.size()) return a.cost + (b.cost - a.cost) * (p - a.p) / (b.p - a.p);
  }
  return u.fuel.back().cost;
}

double row_residual(const milp::Constraint& r, const std::vector<double>& x) {
  double act = 0.0;
  for (const auto& term : r.terms) act += term.coef * x[static_cast<std::size_t>(term.var)];
  const double lo = r.lower(), hi = r.upper();
  return std::max({0.0, lo - act, act - hi});
}

UcBuild build_model_with(const UcCase& c, const SolveOptions& opts, std::optional<FrequencyHandles>* fh) {
  auto b = build_uc(c);
  if (opts.mode == Mode::Fcuc) {
    if (!opts.nadir_net || !opts.region) throw ConfigError("fcuc mode needs a nadir network and a region");
    auto h = add_frequency_constraints(b, c, *opts.nadir_net, opts.step_net, *opts.region, opts.freq);
    if (fh) *fh = std::move(h);
  }
  return b;
}

}  // namespace

CostBreakdown schedule_cost(const UcCase& c, const Schedule& s) {
  CostBreakdown k;
  for (std::size_t t = 0; t < s.periods.size(); ++t) {
    const auto& ps = s.periods[t];
    for (std::size_t g = 0; g < c.thermal.size(); ++g) {
      const auto& u = c.thermal[g];
      if (ps.start[g]) k.oper += u.startup_cost;
      if (ps.stop[g]) k.oper += u.shutdown_cost;
      if (ps.on[g]) k.oper += fuel_cost(u, ps.p[g]);
      k.reserve += u.reserve_cost * ps.reserve[g];
    }
    for (std::size_t d = 0; d < c.der.size(); ++d) k.reserve += c.der[d].reserve_cost * ps.der_reserve[d];
    for (double sh : ps.shed) k.load += c.shed_cost * sh;
  }
  return k;
}

UcBuild build_model(const UcCase& c, const SolveOptions& opts) {
  return build_model_with(c, opts, nullptr);
}

Schedule solve_case(const UcCase& c, const SolveOptions& opts) {
  std::optional<FrequencyHandles> fh;
  auto b = build_model_with(c, opts, &fh);
  const auto r = milp::bnb_solve(b.model, opts.bnb);
  Schedule s;
  s.status = r.status;
  s.mode = opts.mode;
  s.nodes = r.nodes;
  s.wall_seconds = r.wall_seconds;
  s.variables = b.model.num_vars();
  s.constraints = b.model.num_constraints();
  s.binaries = b.model.num_binaries();
  if (!r.has_solution()) return s;
  s.objective = r.objective;
  for (const auto& row : b.model.constraints()) s.max_row_residual = std::max(s.max_row_residual, row_residual(row, r.values));

  const auto& h = b.h;
  auto bit = [&](milp::Var v) { return r.value(v) > 0.5; };
  for (int t = 0; t < c.periods; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    PeriodSchedule ps;
    for (std::size_t g = 0; g < c.thermal.size(); ++g) {
      ps.on.push_back(bit(h.on[g][ut]));
      ps.start.push_back(bit(h.start[g][ut]));
      ps.stop.push_back(bit(h.stop[g][ut]));
      const double p = r.value(h.p[g][ut]);
      ps.p.push_back(p);
      ps.reserve.push_back((ps.on.back() ? c.thermal[g].p_max : 0.0) - p);
    }
    for (std::size_t d = 0; d < c.der.size(); ++d) {
      const double p = r.value(h.der_p[d][ut]);
      ps.der_p.push_back(p);
      ps.der_reserve.push_back(c.der[d].forecast[ut] - p);
      ps.der_on.push_back(h.der_u[d][ut].valid() && bit(h.der_u[d][ut]));
    }
    for (std::size_t n = 0; n < c.buses.size(); ++n) {
      ps.shed.push_back(r.value(h.shed[n][ut]));
      ps.angle.push_back(r.value(h.angle[n][ut]));
    }
    ps.aggregate = aggregate_values(c, ps.on, ps.der_on);
    if (fh) {
      std::array<double, 4> a{};
      for (std::size_t i = 0; i < 4; ++i) a[i] = r.value(fh->aggregate[ut][i]);
      ps.model_aggregate = a;
    }
    s.periods.push_back(std::move(ps));
  }
  s.cost = schedule_cost(c, s);
  return s;
}

bool Verification::all_pass() const {
  return std::all_of(periods.begin(), periods.end(), [](const PeriodCheck& p) { return p.pass(); });
}

int Verification::failing_periods() const {
  return static_cast<int>(std::count_if(periods.begin(), periods.end(), [](const PeriodCheck& p) { return !p.pass(); }));
}

Verification verify(const UcCase& c, const Schedule& s, const FrequencyConfig& cfg, const region::StabilityRegion* reg) {
  Verification v;
  const double dev = (c.f_nominal - cfg.limit.f_min) / c.f_nominal;
  for (std::size_t t = 0; t < s.periods.size(); ++t) {
    const auto& ps = s.periods[t];
    PeriodCheck pc;
    const std::vector<bool> none(c.der.size(), false);
    const auto a = aggregate_values(c, ps.on, s.mode == Mode::Fcuc ? ps.der_on : none);
    const sfr::InertiaAggregate ia{a[0], a[1], a[2], a[3], cfg.T, cfg.dP};
    pc.stability = sfr::classify_stability(ia);
    if (pc.stability == sfr::Stability::StableUnderdamped) pc.report = sfr::check_requirements(ia, cfg.limit);
    if (reg) {
      region::Point z{};
      for (std::size_t i = 0; i < 4; ++i) z[i] = a[i] / reg->normalization[i];
      pc.in_region = region::membership(*reg, z).inside;
    }
    v.periods.push_back(pc);

    std::vector<double> net(c.buses.size(), 0.0);
    for (std::size_t g = 0; g < c.thermal.size(); ++g) {
      const auto& u = c.thermal[g];
      net[static_cast<std::size_t>(u.bus)] += ps.p[g];
      const double lo = ps.on[g] ? u.p_min : 0.0, hi = ps.on[g] ? u.p_max : 0.0;
      v.max_bound_residual = std::max({v.max_bound_residual, lo - ps.p[g], ps.p[g] - hi});
      if (s.mode == Mode::Fcuc && ps.on[g]) {
        const double need = u.inertia.K / u.inertia.R * u.p_max * c.gamma * dev;
        v.max_headroom_residual = std::max(v.max_headroom_residual, need - ps.reserve[g]);
      }
    }
    for (std::size_t d = 0; d < c.der.size(); ++d) {
      const auto& r = c.der[d];
      const double fc = r.forecast[t];
      net[static_cast<std::size_t>(r.bus)] += ps.der_p[d];
      v.max_bound_residual = std::max({v.max_bound_residual, -ps.der_p[d], ps.der_p[d] - fc});
      if (s.mode == Mode::Fcuc && ps.der_on[d]) {
        const double droop = r.control == DerControl::Droop ? r.inertia.R : r.headroom_droop;
        v.max_headroom_residual = std::max(v.max_headroom_residual, fc * c.gamma * dev / droop - ps.der_reserve[d]);
      }
    }
    for (const auto& ln : c.lines) {
      const double f = ln.susceptance * (ps.angle[static_cast<std::size_t>(ln.from)] - ps.angle[static_cast<std::size_t>(ln.to)]);
      net[static_cast<std::size_t>(ln.from)] -= f;
      net[static_cast<std::size_t>(ln.to)] += f;
      v.max_bound_residual = std::max(v.max_bound_residual, std::abs(f) - ln.limit);
    }
    for (std::size_t n = 0; n < c.buses.size(); ++n) {
      const double load = c.buses[n].load[t];
      v.max_bound_residual = std::max({v.max_bound_residual, -ps.shed[n], ps.shed[n] - load});
      v.max_balance_residual = std::max(v.max_balance_residual, std::abs(net[n] + ps.shed[n] - load));
    }
  }
  v.max_bound_residual = std::max(0.0, v.max_bound_residual);
  return v;
}

std::string schedule_json(const UcCase& c, const Schedule& s) {
  json j;
  j["format"] = "fcuc-schedule";
  j["version"] = 1;
  j["case"] = c.name;
  j["mode"] = to_string(s.mode);
  j["status"] = milp::to_string(s.status);
  j["objective"] = s.objective;
  j["cost"] = {{"oper", s.cost.oper}, {"reserve", s.cost.reserve}, {"load", s.cost.load}, {"total", s.cost.total()}};
  j["solver"] = {{"nodes", s.nodes},
                 {"wall_seconds", s.wall_seconds},
                 {"variables", s.variables},
                 {"constraints", s.constraints},
                 {"binaries", s.binaries},
                 {"max_row_residual", s.max_row_residual}};
  json per = json::array();
  for (std::size_t t = 0; t < s.periods.size(); ++t) {
    const auto& ps = s.periods[t];
    json jp;
    jp["t"] = t;
    json units = json::array();
    for (std::size_t g = 0; g < c.thermal.size(); ++g)
      units.push_back({{"name", c.thermal[g].name},
                       {"on", static_cast<bool>(ps.on[g])},
                       {"start", static_cast<bool>(ps.start[g])},
                       {"stop", static_cast<bool>(ps.stop[g])},
                       {"p", ps.p[g]},
                       {"reserve", ps.reserve[g]}});
    jp["units"] = units;
    json ders = json::array();
    for (std::size_t d = 0; d < c.der.size(); ++d)
      ders.push_back({{"name", c.der[d].name},
                      {"p", ps.der_p[d]},
                      {"reserve", ps.der_reserve[d]},
                      {"participates", static_cast<bool>(ps.der_on[d])}});
    jp["der"] = ders;
    json buses = json::array();
    for (std::size_t n = 0; n < c.buses.size(); ++n)
      buses.push_back({{"name", c.buses[n].name}, {"shed", ps.shed[n]}, {"angle", ps.angle[n]}});
    jp["buses"] = buses;
    jp["aggregate"] = {{"M", ps.aggregate[0]}, {"D", ps.aggregate[1]}, {"Rg", ps.aggregate[2]}, {"Fg", ps.aggregate[3]}};
    per.push_back(jp);
  }
  j["periods"] = per;
  return j.dump(2);
}

std::string schedule_csv(const UcCase& c, const Schedule& s) {
  std::ostringstream o;
  o << "t";
  for (const auto& u : c.thermal) o << "," << u.name << "_on," << u.name << "_p";
  for (const auto& d : c.der) o << "," << d.name << "_p," << d.name << "_u";
  o << ",shed,M,D,Rg,Fg\n";
  for (std::size_t t = 0; t < s.periods.size(); ++t) {
    const auto& ps = s.periods[t];
    o << t;
    for (std::size_t g = 0; g < c.thermal.size(); ++g) o << "," << (ps.on[g] ? 1 : 0) << "," << fmt_double(ps.p[g]);
    for (std::size_t d = 0; d < c.der.size(); ++d) o << "," << fmt_double(ps.der_p[d]) << "," << (ps.der_on[d] ? 1 : 0);
    double shed = 0.0;
    for (double x : ps.shed) shed += x;
    o << "," << fmt_double(shed);
    for (double a : ps.aggregate) o << "," << fmt_double(a);
    o << "\n";
  }
  return o.str();
}

std::string verification_json(const Verification& v) {
  json j;
  j["format"] = "fcuc-verification";
  j["version"] = 1;
  j["all_pass"] = v.all_pass();
  j["failing_periods"] = v.failing_periods();
  j["max_balance_residual"] = v.max_balance_residual;
  j["max_bound_residual"] = v.max_bound_residual;
  j["max_headroom_residual"] = v.max_headroom_residual;
  json per = json::array();
  for (std::size_t t = 0; t < v.periods.size(); ++t) {
    const auto& p = v.periods[t];
    json jp{{"t", t}, {"stability", sfr::to_string(p.stability)}, {"pass", p.pass()}};
    if (p.in_region) jp["in_region"] = *p.in_region;
    if (p.report) {
      auto verdict = [](const sfr::Verdict& x) { return json{{"pass", x.pass}, {"margin_hz", x.margin_hz}}; };
      jp["rocof"] = verdict(p.report->rocof);
      jp["qss"] = verdict(p.report->qss);
      jp["nadir"] = verdict(p.report->nadir);
      json st = json::array();
      for (const auto& x : p.report->stepwise) st.push_back(verdict(x));
      jp["stepwise"] = st;
    }
    per.push_back(jp);
  }
  j["periods"] = per;
  return j.dump(2);
}

}  // namespace fcuc::uc
