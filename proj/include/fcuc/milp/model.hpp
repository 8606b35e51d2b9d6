#pragma once

// Backend-neutral mixed-integer linear model container.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fcuc::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind : std::uint8_t { Continuous, Binary };
enum class Sense : std::uint8_t { LessEqual, Equal, GreaterEqual };

struct Var {
  int index = -1;
  [[nodiscard]] bool valid() const { return index >= 0; }
  friend bool operator==(Var a, Var b) { return a.index == b.index; }
};

struct Row {
  int index = -1;
  [[nodiscard]] bool valid() const { return index >= 0; }
};

struct Term {
  int var = -1;
  double coef = 0.0;
  friend bool operator==(const Term&, const Term&) = default;
};

class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double constant) : constant_(constant) {}  // NOLINT(google-explicit-constructor)
  LinExpr(Var v, double coef = 1.0) { add(v, coef); }  // NOLINT(google-explicit-constructor)

  LinExpr& add(Var v, double coef) {
    if (coef != 0.0) terms_.push_back({v.index, coef});
    return *this;
  }
  LinExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }
  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double s);

  [[nodiscard]] const std::vector<Term>& terms() const { return terms_; }
  [[nodiscard]] double constant() const { return constant_; }
  // Merges duplicate variables and drops zero coefficients; sorted by variable.
  [[nodiscard]] LinExpr normalized() const;
  [[nodiscard]] double evaluate(const std::vector<double>& x) const;

 private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(double s, LinExpr e);
LinExpr operator*(LinExpr e, double s);

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lb = 0.0;
  double ub = kInf;
  double obj = 0.0;
  int priority = 0;  // branching class; larger branches first
  friend bool operator==(const Variable&, const Variable&) = default;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;  // sorted by variable, no duplicates, no zeros
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
  // Optional second side for ranged rows: lo <= a.x <= hi.
  double range_lo = -kInf;
  double range_hi = kInf;
  friend bool operator==(const Constraint&, const Constraint&) = default;

  [[nodiscard]] double lower() const;
  [[nodiscard]] double upper() const;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MilpModel {
 public:
  explicit MilpModel(std::string name = "model") : name_(std::move(name)) {}

  Var add_var(std::string name, VarKind kind, double lb, double ub, double obj = 0.0);
  Var add_continuous(std::string name, double lb = 0.0, double ub = kInf, double obj = 0.0) {
    return add_var(std::move(name), VarKind::Continuous, lb, ub, obj);
  }
  Var add_binary(std::string name, double obj = 0.0) {
    return add_var(std::move(name), VarKind::Binary, 0.0, 1.0, obj);
  }

  // expr (sense) rhs; the expression constant moves to the right-hand side.
  Row add_constraint(const LinExpr& expr, Sense sense, double rhs, std::string name = {});
  // lo <= expr <= hi; collapses to a one-sided or equality row where possible.
  Row add_range(const LinExpr& expr, double lo, double hi, std::string name = {});

  void set_obj(Var v, double c) { var_ref(v).obj = c; }
  void add_obj(Var v, double c) { var_ref(v).obj += c; }
  void set_obj_offset(double c) { obj_offset_ = c; }
  void add_obj_offset(double c) { obj_offset_ += c; }
  void set_bounds(Var v, double lb, double ub);
  void set_priority(Var v, int p) { var_ref(v).priority = p; }

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] std::size_t num_vars() const { return vars_.size(); }
  [[nodiscard]] std::size_t num_constraints() const { return rows_.size(); }
  [[nodiscard]] std::size_t num_binaries() const;
  [[nodiscard]] std::size_t num_nonzeros() const;
  [[nodiscard]] const std::vector<Variable>& vars() const { return vars_; }
  [[nodiscard]] const std::vector<Constraint>& constraints() const { return rows_; }
  [[nodiscard]] const Variable& var(Var v) const { return vars_.at(static_cast<std::size_t>(v.index)); }
  [[nodiscard]] const Constraint& constraint(Row r) const {
    return rows_.at(static_cast<std::size_t>(r.index));
  }
  [[nodiscard]] double obj_offset() const { return obj_offset_; }
  [[nodiscard]] Var find_var(const std::string& name) const;

  [[nodiscard]] double objective_value(const std::vector<double>& x) const;
  // Largest bound or row violation of x; binaries also measured against {0,1}.
  [[nodiscard]] double max_violation(const std::vector<double>& x, bool integrality = true) const;

  // Throws ModelError on dangling variable references or inconsistent binaries.
  void validate() const;

  friend bool operator==(const MilpModel&, const MilpModel&) = default;

 private:
  Variable& var_ref(Var v);

  std::string name_;
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  double obj_offset_ = 0.0;
};

enum class Status { Optimal, Infeasible, Unbounded, TimeLimit, NodeLimit, NumericalFailure };

[[nodiscard]] const char* to_string(Status s);

struct SolveResult {
  Status status = Status::Infeasible;
  double objective = 0.0;
  double best_bound = 0.0;
  std::vector<double> values;
  long nodes = 0;
  long lp_iterations = 0;
  double wall_seconds = 0.0;

  [[nodiscard]] bool has_solution() const { return !values.empty(); }
  [[nodiscard]] double value(Var v) const { return values.at(static_cast<std::size_t>(v.index)); }
};

}  // namespace fcuc::milp
