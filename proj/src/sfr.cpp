#include "fcuc/sfr.hpp"

#include <cmath>

namespace fcuc::sfr {

void StepwiseLimit::validate() const {
  if (!(f_min <= f_nominal)) throw std::invalid_argument("stepwise limit: f_min above f_nominal");
  if (!(qss_max > 0.0) || !(rocof_max > 0.0))
    throw std::invalid_argument("stepwise limit: qss_max and rocof_max must be positive");
  double prev_t = -1.0;
  double prev_floor = f_min;
  for (const auto& c : checkpoints) {
    if (!(c.t > prev_t) || c.t < 0.0)
      throw std::invalid_argument("stepwise limit: checkpoint times must be strictly increasing");
    if (c.floor < prev_floor || c.floor > f_nominal)
      throw std::invalid_argument("stepwise limit: floors must be non-decreasing in [f_min, f_N]");
    prev_t = c.t;
    prev_floor = c.floor;
  }
}

double StepwiseLimit::floor_at(double t) const {
  double f = f_min;
  for (const auto& c : checkpoints) {
    if (t >= c.t) f = c.floor;
  }
  return f;
}

StepwiseLimit StepwiseLimit::defaults() {
  StepwiseLimit lim;
  lim.checkpoints = {{5.0, 49.3}, {15.0, 49.6}};
  return lim;
}

const char* to_string(Stability s) {
  switch (s) {
    case Stability::StableUnderdamped: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::OutOfModel: return "out_of_model";
  }
  return "?";
}

namespace {

double zeta_of(const InertiaAggregate& p) {
  return (p.M + p.T * (p.D + p.Fg)) / (2.0 * std::sqrt(p.M * p.T * (p.D + p.Rg)));
}

void require_basic(const InertiaAggregate& p) {
  if (!(p.M > 0.0) || !(p.T > 0.0) || !(p.D + p.Rg > 0.0))
    throw DomainError("sfr: requires M > 0, T > 0, D + Rg > 0");
}

}  // namespace

SfrDerived derive(const InertiaAggregate& p) {
  require_basic(p);
  SfrDerived d;
  d.omega_n = std::sqrt((p.D + p.Rg) / (p.M * p.T));
  d.zeta = zeta_of(p);
  if (!(d.zeta > 0.0) || !(d.zeta < 1.0))
    throw DomainError("sfr: damping ratio outside (0,1), closed form assumes underdamped response");
  const double s = std::sqrt(1.0 - d.zeta * d.zeta);
  d.omega_d = d.omega_n * s;
  d.phi = std::asin(s);
  // atan2 keeps t_m on the first extremum when zeta*omega_n < 1/T.
  d.t_m = std::atan2(d.omega_d, d.zeta * d.omega_n - 1.0 / p.T) / d.omega_d;
  return d;
}

double delta_f(const InertiaAggregate& p, const SfrDerived& d, double t) {
  if (p.dP == 0.0 || t == 0.0) return 0.0;
  const double steady = -p.dP / (p.M * p.T * d.omega_n * d.omega_n);
  const double osc = std::sin(d.omega_d * t) - std::sin(d.omega_d * t + d.phi) / (d.omega_n * p.T);
  return steady - p.dP / (p.M * d.omega_d) * std::exp(-d.zeta * d.omega_n * t) * osc;
}

double delta_f(const InertiaAggregate& p, double t) {
  if (t < 0.0) throw DomainError("sfr: t must be non-negative");
  return delta_f(p, derive(p), t);
}

double nadir_deviation(const InertiaAggregate& p) {
  const auto d = derive(p);
  if (p.Rg < p.Fg) throw DomainError("sfr: nadir formula requires Rg >= Fg");
  if (p.dP == 0.0) return 0.0;
  const double amp = std::sqrt(p.T * (p.Rg - p.Fg) / p.M);
  return -p.dP / (p.D + p.Rg) * (1.0 + amp * std::exp(-d.zeta * d.omega_n * d.t_m));
}

double rocof(const InertiaAggregate& p, double f_nominal) {
  if (!(p.M > 0.0)) throw DomainError("sfr: rocof requires M > 0");
  return std::abs(p.dP / p.M) * f_nominal;
}

double qss_deviation(const InertiaAggregate& p) {
  if (!(p.D + p.Rg > 0.0)) throw DomainError("sfr: qss requires D + Rg > 0");
  return -p.dP / (p.D + p.Rg);
}

Stability classify_stability(const InertiaAggregate& p) {
  if (!(p.D + p.Rg > 0.0) || !(p.M > 0.0) || !(p.T > 0.0)) return Stability::Unstable;
  const double z = zeta_of(p);
  if (!(z > 0.0)) return Stability::Unstable;
  if (z < kZetaGate && p.Rg >= p.Fg) return Stability::StableUnderdamped;
  return Stability::OutOfModel;
}

bool RequirementReport::all_pass() const {
  if (!rocof.pass || !qss.pass || !nadir.pass) return false;
  for (const auto& v : stepwise)
    if (!v.pass) return false;
  return true;
}

RequirementReport check_requirements(const InertiaAggregate& p, const StepwiseLimit& lim) {
  const auto d = derive(p);
  const double fN = lim.f_nominal;
  RequirementReport r;

  const double rc = rocof(p, fN);
  r.rocof = {rc <= lim.rocof_max, lim.rocof_max - rc};

  const double qss_hz = std::abs(qss_deviation(p)) * fN;
  r.qss = {qss_hz <= lim.qss_max, lim.qss_max - qss_hz};

  const double nadir_hz = fN - std::abs(nadir_deviation(p)) * fN;
  r.nadir = {nadir_hz >= lim.f_min, nadir_hz - lim.f_min};

  r.stepwise.reserve(lim.checkpoints.size());
  for (const auto& c : lim.checkpoints) {
    const double df = delta_f(p, d, c.t);
    const double f = fN - std::abs(df) * fN;
    r.stepwise.push_back({f >= c.floor, f - c.floor});
  }
  return r;
}

std::vector<TracePoint> trace(const InertiaAggregate& p, double f_nominal, double t_end,
                              double step) {
  if (!(step > 0.0)) throw std::invalid_argument("trace: step must be positive");
  const auto d = derive(p);
  std::vector<TracePoint> out;
  const auto n = static_cast<std::size_t>(std::floor(t_end / step + 1e-9)) + 1;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * step;
    const double df = delta_f(p, d, t);
    out.push_back({t, f_nominal * (1.0 + df)});
  }
  return out;
}

}  // namespace fcuc::sfr
