#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>

#include "fcuc/ucmodel.hpp"
#include "fcuc/util.hpp"

namespace fcuc::uc {

using nlohmann::json;

InertiaRow type_defaults(const std::string& type) {
  if (type == "Nuclear") return {9.0, 0.6, 0.98, 0.25, 0.04};
  if (type == "CCGT") return {14.0, 0.6, 1.1, 0.15, 0.01};
  if (type == "OCGT") return {11.0, 0.6, 0.95, 0.35, 0.03};
  if (type == "VSM") return {12.0, 0.6, 1.0, 0.0, 0.0};
  if (type == "Droop") return {0.0, 0.0, 1.0, 0.0, 0.05};
  throw CaseError("unknown generator type '" + type + "'");
}

double UcCase::total_load(int t) const {
  double s = 0.0;
  for (const auto& b : buses) s += b.load[static_cast<std::size_t>(t)];
  return s;
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw CaseError(msg);
}

void check_series(const std::vector<double>& v, int periods, const std::string& what) {
  require(static_cast<int>(v.size()) == periods, what + ": series length differs from the horizon");
  for (double x : v) require(std::isfinite(x) && x >= 0.0, what + ": values must be finite and non-negative");
}

}  // namespace

void UcCase::validate() const {
  require(periods >= 1, "case: horizon must have at least one period");
  require(!buses.empty(), "case: no buses");
  const int nb = static_cast<int>(buses.size());
  require(std::count_if(buses.begin(), buses.end(), [](const Bus& b) { return b.slack; }) == 1,
          "case: exactly one slack bus required");
  for (const auto& b : buses) check_series(b.load, periods, "bus " + b.name + " load");
  for (const auto& l : lines) {
    require(l.from >= 0 && l.from < nb && l.to >= 0 && l.to < nb && l.from != l.to, "line: bad endpoints");
    require(l.susceptance > 0.0 && l.limit > 0.0, "line: susceptance and limit must be positive");
  }
  for (const auto& g : thermal) {
    const std::string w = "unit " + g.name;
    require(g.bus >= 0 && g.bus < nb, w + ": bad bus");
    require(g.p_min >= 0.0 && g.p_min <= g.p_max && g.p_max > 0.0, w + ": need 0 <= p_min <= p_max");
    require(g.ramp_up >= 0.0 && g.ramp_down >= 0.0 && g.startup_ramp >= 0.0 && g.shutdown_ramp >= 0.0,
            w + ": negative ramp");
    require(g.startup_cost >= 0.0 && g.shutdown_cost >= 0.0 && g.reserve_cost >= 0.0, w + ": negative cost");
    require(!g.fuel.empty(), w + ": empty fuel curve");
    require(std::abs(g.fuel.front().p - g.p_min) <= 1e-9 && std::abs(g.fuel.back().p - g.p_max) <= 1e-9,
            w + ": fuel curve must span [p_min, p_max]");
    double prev_slope = -1e300;
    for (std::size_t k = 1; k < g.fuel.size(); ++k) {
      const double dp = g.fuel[k].p - g.fuel[k - 1].p;
      require(dp > 0.0, w + ": fuel breakpoints must increase");
      const double slope = (g.fuel[k].cost - g.fuel[k - 1].cost) / dp;
      require(slope >= prev_slope - 1e-12, w + ": non-convex fuel curve");
      prev_slope = slope;
    }
    if (g.initial_on)
      require(g.initial_p >= g.p_min - 1e-9 && g.initial_p <= g.p_max + 1e-9, w + ": initial output outside limits");
    else
      require(g.initial_p == 0.0, w + ": initial output of an offline unit must be 0");
    require(g.inertia.R > 0.0 && g.inertia.M >= 0.0 && g.inertia.K >= 0.0, w + ": bad inertia row");
    require(g.rating > 0.0, w + ": rating must be positive");
  }
  for (const auto& d : der) {
    const std::string w = "DER " + d.name;
    require(d.bus >= 0 && d.bus < nb, w + ": bad bus");
    check_series(d.forecast, periods, w + " forecast");
    require(d.rating > 0.0 && d.reserve_cost >= 0.0, w + ": bad rating or cost");
    if (d.control == DerControl::Droop) require(d.inertia.R > 0.0, w + ": droop must be positive");
    else require(d.headroom_droop > 0.0, w + ": headroom droop must be positive");
  }
  require(shed_cost >= 0.0 && eps_load >= 0.0 && eps_der >= 0.0, "case: negative scalar");
  require(gamma >= 0.0 && f_nominal > 0.0, "case: bad gamma or nominal frequency");
  require(base_sync > 0.0, "case: synchronous base must be positive");
  require(der.empty() || base_der > 0.0, "case: converter base must be positive");
}

UcCase case_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw CaseError(std::string("case: ") + e.what());
  }
  try {
    UcCase c;
    c.name = j.value("name", "case");
    c.periods = j.at("periods").get<int>();
    c.shed_cost = j.value("shed_cost", c.shed_cost);
    c.eps_load = j.value("eps_load", c.eps_load);
    c.eps_der = j.value("eps_der", c.eps_der);
    c.gamma = j.value("gamma", c.gamma);
    c.f_nominal = j.value("f_nominal", c.f_nominal);

    std::map<std::string, int> bus_index;
    for (const auto& jb : j.at("buses")) {
      Bus b;
      b.name = jb.at("name").get<std::string>();
      b.slack = jb.value("slack", false);
      b.load = jb.at("load").get<std::vector<double>>();
      require(bus_index.emplace(b.name, static_cast<int>(c.buses.size())).second, "case: duplicate bus " + b.name);
      c.buses.push_back(std::move(b));
    }
    auto bus = [&](const json& v) {
      auto it = bus_index.find(v.get<std::string>());
      require(it != bus_index.end(), "case: unknown bus " + v.get<std::string>());
      return it->second;
    };
    for (const auto& jl : j.value("lines", json::array()))
      c.lines.push_back({bus(jl.at("from")), bus(jl.at("to")), jl.at("susceptance").get<double>(),
                         jl.at("limit").get<double>()});
    for (const auto& jg : j.value("thermal", json::array())) {
      ThermalUnit g;
      g.name = jg.at("name").get<std::string>();
      g.bus = bus(jg.at("bus"));
      g.type = jg.at("type").get<std::string>();
      g.p_min = jg.at("p_min").get<double>();
      g.p_max = jg.at("p_max").get<double>();
      g.ramp_up = jg.value("ramp_up", g.p_max);
      g.ramp_down = jg.value("ramp_down", g.p_max);
      g.startup_ramp = jg.value("startup_ramp", std::max(g.p_min, g.ramp_up));
      g.shutdown_ramp = jg.value("shutdown_ramp", std::max(g.p_min, g.ramp_down));
      g.startup_cost = jg.value("startup_cost", 0.0);
      g.shutdown_cost = jg.value("shutdown_cost", 0.0);
      g.reserve_cost = jg.value("reserve_cost", 0.0);
      for (const auto& pt : jg.at("fuel")) g.fuel.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
      g.initial_on = jg.value("initial_on", false);
      g.initial_p = jg.value("initial_p", 0.0);
      g.inertia = type_defaults(g.type);
      if (jg.contains("inertia")) {
        const auto& ji = jg["inertia"];
        g.inertia.M = ji.value("M", g.inertia.M);
        g.inertia.D = ji.value("D", g.inertia.D);
        g.inertia.K = ji.value("K", g.inertia.K);
        g.inertia.F = ji.value("F", g.inertia.F);
        g.inertia.R = ji.value("R", g.inertia.R);
      }
      g.rating = jg.value("rating", g.p_max);
      c.thermal.push_back(std::move(g));
    }
    for (const auto& jd : j.value("der", json::array())) {
      DerPlant d;
      d.name = jd.at("name").get<std::string>();
      d.bus = bus(jd.at("bus"));
      const auto ctl = jd.at("control").get<std::string>();
      if (ctl == "Droop") d.control = DerControl::Droop;
      else if (ctl == "VSM") d.control = DerControl::Vsm;
      else throw CaseError("DER " + d.name + ": control must be Droop or VSM");
      d.inertia = type_defaults(ctl);
      if (jd.contains("inertia")) {
        const auto& ji = jd["inertia"];
        d.inertia.M = ji.value("M", d.inertia.M);
        d.inertia.D = ji.value("D", d.inertia.D);
        d.inertia.K = ji.value("K", d.inertia.K);
        d.inertia.R = ji.value("R", d.inertia.R);
      }
      d.forecast = jd.at("forecast").get<std::vector<double>>();
      d.reserve_cost = jd.value("reserve_cost", 0.0);
      d.rating = jd.at("rating").get<double>();
      d.headroom_droop = jd.value("headroom_droop", d.headroom_droop);
      c.der.push_back(std::move(d));
    }
    double s = 0.0, r = 0.0;
    for (const auto& g : c.thermal) s += g.rating;
    for (const auto& d : c.der) r += d.rating;
    c.base_sync = j.value("base_sync", s);
    c.base_der = j.value("base_der", r);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw CaseError(std::string("case: ") + e.what());
  }
}

UcCase load_case(const std::string& path) { return case_from_json(read_file(path)); }

}  // namespace fcuc::uc
