#pragma once

// Closed-form second-order system frequency response (SFR).
//
// All deviations are per-unit on the system base; conversion to Hz happens
// only in the requirement checks through StepwiseLimit::f_nominal.
// Sign convention: dP > 0 is a loss of generation and drives delta_f < 0.

#include <stdexcept>
#include <string>
#include <vector>

namespace fcuc::sfr {

struct InertiaAggregate {
  double M = 0.0;   // aggregate inertia constant [s]
  double D = 0.0;   // aggregate damping [pu]
  double Rg = 0.0;  // aggregate droop factor [pu]
  double Fg = 0.0;  // aggregate turbine fraction factor [pu]
  double T = 8.0;   // turbine time constant [s]
  double dP = 0.0;  // step disturbance [pu], positive = generation loss
};

struct SfrDerived {
  double omega_n = 0.0;  // natural frequency [rad/s]
  double zeta = 0.0;     // damping ratio
  double omega_d = 0.0;  // damped frequency [rad/s]
  double phi = 0.0;      // phase [rad]
  double t_m = 0.0;      // nadir time [s]
};

struct Checkpoint {
  double t = 0.0;      // step-change time t_{j,l} [s]
  double floor = 0.0;  // frequency floor f_j [Hz]
};

struct StepwiseLimit {
  std::vector<Checkpoint> checkpoints;
  double f_nominal = 50.0;  // [Hz]
  double f_min = 49.2;      // nadir floor [Hz]
  double qss_max = 0.2;     // max quasi-steady deviation [Hz]
  double rocof_max = 1.0;   // max |RoCoF| [Hz/s]

  // Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
  // Piecewise-constant floor curve; f_min before the first checkpoint.
  [[nodiscard]] double floor_at(double t) const;

  static StepwiseLimit defaults();
};

enum class Stability { StableUnderdamped, Unstable, OutOfModel };

[[nodiscard]] const char* to_string(Stability s);

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Damping ratio at or above this gate is classified OutOfModel.
inline constexpr double kZetaGate = 0.99;

[[nodiscard]] SfrDerived derive(const InertiaAggregate& p);
[[nodiscard]] double delta_f(const InertiaAggregate& p, double t);
[[nodiscard]] double delta_f(const InertiaAggregate& p, const SfrDerived& d, double t);
[[nodiscard]] double nadir_deviation(const InertiaAggregate& p);
[[nodiscard]] double rocof(const InertiaAggregate& p, double f_nominal);
[[nodiscard]] double qss_deviation(const InertiaAggregate& p);
[[nodiscard]] Stability classify_stability(const InertiaAggregate& p);

struct Verdict {
  bool pass = false;
  double margin_hz = 0.0;  // positive = slack, negative = violation
};

struct RequirementReport {
  Verdict rocof;
  Verdict qss;
  Verdict nadir;
  std::vector<Verdict> stepwise;

  [[nodiscard]] bool all_pass() const;
};

[[nodiscard]] RequirementReport check_requirements(const InertiaAggregate& p,
                                                   const StepwiseLimit& lim);

struct TracePoint {
  double t = 0.0;
  double freq_hz = 0.0;
};

// Sampled frequency trajectory f_N * (1 + delta_f(t)) over [0, t_end].
[[nodiscard]] std::vector<TracePoint> trace(const InertiaAggregate& p, double f_nominal,
                                            double t_end, double step);

}  // namespace fcuc::sfr
