#include "fcuc/milp/model.hpp"

#include <algorithm>
#include <cmath>

namespace fcuc::milp {

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  constant_ += o.constant_;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  for (const auto& t : o.terms_) terms_.push_back({t.var, -t.coef});
  constant_ -= o.constant_;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  for (auto& t : terms_) t.coef *= s;
  constant_ *= s;
  return *this;
}

LinExpr LinExpr::normalized() const {
  LinExpr out;
  out.constant_ = constant_;
  out.terms_ = terms_;
  std::stable_sort(out.terms_.begin(), out.terms_.end(),
                   [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  merged.reserve(out.terms_.size());
  for (const auto& t : out.terms_) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  out.terms_ = std::move(merged);
  return out;
}

double LinExpr::evaluate(const std::vector<double>& x) const {
  double s = constant_;
  for (const auto& t : terms_) s += t.coef * x.at(static_cast<std::size_t>(t.var));
  return s;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator*(double s, LinExpr e) { return e *= s; }
LinExpr operator*(LinExpr e, double s) { return e *= s; }

double Constraint::lower() const {
  switch (sense) {
    case Sense::LessEqual: return std::isfinite(range_lo) ? range_lo : -kInf;
    case Sense::Equal: return rhs;
    case Sense::GreaterEqual: return rhs;
  }
  return -kInf;
}

double Constraint::upper() const {
  switch (sense) {
    case Sense::LessEqual: return rhs;
    case Sense::Equal: return rhs;
    case Sense::GreaterEqual: return std::isfinite(range_hi) ? range_hi : kInf;
  }
  return kInf;
}

Variable& MilpModel::var_ref(Var v) {
  if (v.index < 0 || static_cast<std::size_t>(v.index) >= vars_.size())
    throw ModelError("milp: unknown variable index " + std::to_string(v.index));
  return vars_[static_cast<std::size_t>(v.index)];
}

Var MilpModel::add_var(std::string name, VarKind kind, double lb, double ub, double obj) {
  if (lb > ub) throw ModelError("milp: variable '" + name + "' has lb > ub");
  if (kind == VarKind::Binary && (lb < 0.0 || ub > 1.0))
    throw ModelError("milp: binary '" + name + "' bounds outside [0,1]");
  vars_.push_back({std::move(name), kind, lb, ub, obj, 0});
  return Var{static_cast<int>(vars_.size() - 1)};
}

void MilpModel::set_bounds(Var v, double lb, double ub) {
  auto& var = var_ref(v);
  if (lb > ub) throw ModelError("milp: set_bounds with lb > ub on '" + var.name + "'");
  if (var.kind == VarKind::Binary && (lb < 0.0 || ub > 1.0))
    throw ModelError("milp: binary '" + var.name + "' bounds outside [0,1]");
  var.lb = lb;
  var.ub = ub;
}

Row MilpModel::add_constraint(const LinExpr& expr, Sense sense, double rhs, std::string name) {
  const auto e = expr.normalized();
  for (const auto& t : e.terms()) {
    if (t.var < 0 || static_cast<std::size_t>(t.var) >= vars_.size())
      throw ModelError("milp: constraint '" + name + "' references undeclared variable");
  }
  Constraint c;
  c.name = name.empty() ? "r" + std::to_string(rows_.size()) : std::move(name);
  c.terms = e.terms();
  c.sense = sense;
  c.rhs = rhs - e.constant();
  rows_.push_back(std::move(c));
  return Row{static_cast<int>(rows_.size() - 1)};
}

Row MilpModel::add_range(const LinExpr& expr, double lo, double hi, std::string name) {
  if (lo > hi) throw ModelError("milp: range with lo > hi");
  if (lo == hi) return add_constraint(expr, Sense::Equal, lo, std::move(name));
  if (!std::isfinite(lo)) return add_constraint(expr, Sense::LessEqual, hi, std::move(name));
  if (!std::isfinite(hi)) return add_constraint(expr, Sense::GreaterEqual, lo, std::move(name));
  auto r = add_constraint(expr, Sense::LessEqual, hi, std::move(name));
  auto& c = rows_.back();
  c.range_lo = lo - expr.constant();
  return r;
}

std::size_t MilpModel::num_binaries() const {
  return static_cast<std::size_t>(std::count_if(
      vars_.begin(), vars_.end(), [](const Variable& v) { return v.kind == VarKind::Binary; }));
}

std::size_t MilpModel::num_nonzeros() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.terms.size();
  return n;
}

Var MilpModel::find_var(const std::string& name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return Var{static_cast<int>(i)};
  return Var{};
}

double MilpModel::objective_value(const std::vector<double>& x) const {
  double s = obj_offset_;
  for (std::size_t j = 0; j < vars_.size(); ++j) s += vars_[j].obj * x.at(j);
  return s;
}

double MilpModel::max_violation(const std::vector<double>& x, bool integrality) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    const auto& v = vars_[j];
    worst = std::max({worst, v.lb - x[j], x[j] - v.ub});
    if (integrality && v.kind == VarKind::Binary)
      worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
  }
  for (const auto& r : rows_) {
    double a = 0.0;
    for (const auto& t : r.terms) a += t.coef * x[static_cast<std::size_t>(t.var)];
    worst = std::max({worst, r.lower() - a, a - r.upper()});
  }
  return worst;
}

void MilpModel::validate() const {
  for (const auto& v : vars_) {
    if (v.lb > v.ub) throw ModelError("milp: variable '" + v.name + "' has lb > ub");
    if (v.kind == VarKind::Binary && (v.lb < 0.0 || v.ub > 1.0))
      throw ModelError("milp: binary '" + v.name + "' bounds outside [0,1]");
  }
  for (const auto& r : rows_) {
    for (const auto& t : r.terms)
      if (t.var < 0 || static_cast<std::size_t>(t.var) >= vars_.size())
        throw ModelError("milp: constraint '" + r.name + "' references undeclared variable");
  }
}

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::TimeLimit: return "time_limit";
    case Status::NodeLimit: return "node_limit";
    case Status::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

}  // namespace fcuc::milp
