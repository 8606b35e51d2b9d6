#pragma once

// Unit commitment with embedded frequency-response constraints.
//
// Power quantities are in MW and costs in currency per period. Inertia
// aggregates follow the SFR conventions of fcuc/sfr.hpp: M and D on the
// combined synchronous + converter base, R_g and F_g on the synchronous base.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fcuc/csnn.hpp"
#include "fcuc/encode.hpp"
#include "fcuc/milp/bnb.hpp"
#include "fcuc/milp/model.hpp"
#include "fcuc/region.hpp"
#include "fcuc/sfr.hpp"

namespace fcuc::uc {

class CaseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InertiaRow {
  double M = 0.0;  // inertia constant [s]
  double D = 0.0;  // damping [pu]
  double K = 0.0;  // mechanical power gain
  double F = 0.0;  // high-pressure turbine fraction
  double R = 0.0;  // droop [pu]
};

// Parameters by generator type: Nuclear, CCGT, OCGT, VSM, Droop.
[[nodiscard]] InertiaRow type_defaults(const std::string& type);

struct FuelPoint {
  double p = 0.0;     // MW
  double cost = 0.0;  // cost per period at p
};

struct ThermalUnit {
  std::string name;
  int bus = 0;
  std::string type;
  double p_min = 0.0;
  double p_max = 0.0;
  double ramp_up = 0.0;    // MW per period
  double ramp_down = 0.0;  // MW per period
  double startup_ramp = 0.0;   // allowance in a start-up period
  double shutdown_ramp = 0.0;  // allowance in a shut-down period
  double startup_cost = 0.0;
  double shutdown_cost = 0.0;
  double reserve_cost = 0.0;
  std::vector<FuelPoint> fuel;  // convex, from p_min to p_max
  bool initial_on = false;
  double initial_p = 0.0;
  InertiaRow inertia;
  double rating = 0.0;  // MW, weight in the aggregation
};

enum class DerControl { Droop, Vsm };

struct DerPlant {
  std::string name;
  int bus = 0;
  DerControl control = DerControl::Droop;
  std::vector<double> forecast;  // MW per period
  double reserve_cost = 0.0;
  double rating = 0.0;
  InertiaRow inertia;  // Droop uses K, R; VSM uses M, D
  // Droop used for the VSM emergency headroom, which has no droop of its own.
  double headroom_droop = 0.05;
};

struct Bus {
  std::string name;
  bool slack = false;
  std::vector<double> load;  // MW per period
};

struct Line {
  int from = 0;
  int to = 0;
  double susceptance = 0.0;  // MW per rad
  double limit = 0.0;        // MW
};

struct UcCase {
  std::string name = "case";
  int periods = 0;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<ThermalUnit> thermal;
  std::vector<DerPlant> der;
  double shed_cost = 1000.0;
  double eps_load = 0.05;
  double eps_der = 0.1;
  double gamma = 0.5;
  double f_nominal = 50.0;
  double base_sync = 0.0;  // MW; total thermal rating when not given
  double base_der = 0.0;   // MW; total converter rating when not given

  // Throws CaseError.
  void validate() const;
  [[nodiscard]] double total_load(int t) const;
};

[[nodiscard]] UcCase case_from_json(const std::string& text);
[[nodiscard]] UcCase load_case(const std::string& path);

struct UcHandles {
  // [unit][t]
  std::vector<std::vector<milp::Var>> on, start, stop, p;
  std::vector<std::vector<std::vector<milp::Var>>> seg;
  // [der][t]
  std::vector<std::vector<milp::Var>> der_p;
  std::vector<std::vector<milp::Var>> der_u;  // participation, set by add_frequency_constraints
  // [bus][t]
  std::vector<std::vector<milp::Var>> shed, angle;
  std::vector<std::vector<milp::Row>> balance;
};

struct UcBuild {
  milp::MilpModel model;
  UcHandles h;
};

// Conventional UC: cost, DC network, thermal limits and ramps, renewable
// limits and system reserve.
[[nodiscard]] UcBuild build_uc(const UcCase& c);

struct AggregateExpr {
  milp::LinExpr M, D, Rg, Fg;
};

// Linear aggregation for period t. Synchronous participation follows
// commitment; converter participation uses h.der_u (absent = 0).
[[nodiscard]] AggregateExpr aggregate_inertia_expr(const UcCase& c, const UcHandles& h, int t);

// Same aggregation evaluated at fixed statuses.
[[nodiscard]] std::array<double, 4> aggregate_values(const UcCase& c, const std::vector<bool>& unit_on,
                                                     const std::vector<bool>& der_on);

struct FrequencyConfig {
  sfr::StepwiseLimit limit = sfr::StepwiseLimit::defaults();
  double T = 8.0;
  double dP = 0.08;  // pu on the combined base
  bool headroom = true;
};

struct FrequencyHandles {
  // [t]
  std::vector<std::array<milp::Var, 4>> aggregate;
  std::vector<std::array<milp::Var, 4>> normalized;
  std::vector<milp::Var> nadir;
  std::vector<std::vector<milp::Var>> stepwise;
  std::vector<encode::NnHandles> nadir_nn, stepwise_nn;
  std::size_t nn_binaries = 0;
};

// Adds per-period RoCoF and QSS rows, the region, the network surrogates and
// emergency headroom. step_net may be null. Throws ConfigError when the
// artifacts disagree on normalisation or dataset.
FrequencyHandles add_frequency_constraints(UcBuild& b, const UcCase& c, const csnn::Network& nadir_net,
                                           const csnn::Network* step_net, const region::StabilityRegion& reg,
                                           const FrequencyConfig& cfg);

enum class Mode { Conventional, Fcuc };

struct SolveOptions {
  Mode mode = Mode::Fcuc;
  FrequencyConfig freq;
  milp::BnbOptions bnb;
  const csnn::Network* nadir_net = nullptr;
  const csnn::Network* step_net = nullptr;
  const region::StabilityRegion* region = nullptr;
};

struct PeriodSchedule {
  std::vector<bool> on, start, stop;
  std::vector<double> p, reserve;          // per unit
  std::vector<double> der_p, der_reserve;  // per DER
  std::vector<bool> der_on;
  std::vector<double> shed, angle;         // per bus
  std::array<double, 4> aggregate{};       // M, D, R_g, F_g from the statuses
  std::optional<std::array<double, 4>> model_aggregate;  // FCUC variable values
};

struct CostBreakdown {
  double oper = 0.0;
  double reserve = 0.0;
  double load = 0.0;
  [[nodiscard]] double total() const { return oper + reserve + load; }
};

struct Schedule {
  milp::Status status = milp::Status::Infeasible;
  Mode mode = Mode::Conventional;
  double objective = 0.0;
  CostBreakdown cost;
  std::vector<PeriodSchedule> periods;
  long nodes = 0;
  double wall_seconds = 0.0;
  double max_row_residual = 0.0;  // over every model row at the returned point
  std::size_t variables = 0, constraints = 0, binaries = 0;
};

struct PeriodCheck {
  sfr::Stability stability = sfr::Stability::Unstable;
  std::optional<sfr::RequirementReport> report;  // only for StableUnderdamped
  std::optional<bool> in_region;
  [[nodiscard]] bool pass() const { return report && report->all_pass(); }
};

struct Verification {
  std::vector<PeriodCheck> periods;
  double max_balance_residual = 0.0;
  double max_bound_residual = 0.0;
  double max_headroom_residual = 0.0;  // violation of the emergency headroom, 0 when met
  [[nodiscard]] bool all_pass() const;
  [[nodiscard]] int failing_periods() const;
};

// The model solve_case would solve, frequency rows included in FCUC mode.
[[nodiscard]] UcBuild build_model(const UcCase& c, const SolveOptions& opts);

// Builds, solves and extracts the schedule.
[[nodiscard]] Schedule solve_case(const UcCase& c, const SolveOptions& opts);

// Re-evaluates a schedule with the SFR model. u_d for a conventional schedule
// is taken as zero.
[[nodiscard]] Verification verify(const UcCase& c, const Schedule& s, const FrequencyConfig& cfg,
                                  const region::StabilityRegion* reg = nullptr);

// Cost parts recomputed from a schedule.
[[nodiscard]] CostBreakdown schedule_cost(const UcCase& c, const Schedule& s);

[[nodiscard]] std::string schedule_json(const UcCase& c, const Schedule& s);
[[nodiscard]] std::string schedule_csv(const UcCase& c, const Schedule& s);
[[nodiscard]] std::string verification_json(const Verification& v);

[[nodiscard]] const char* to_string(Mode m);

}  // namespace fcuc::uc
