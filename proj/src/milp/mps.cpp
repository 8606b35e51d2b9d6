#include "fcuc/milp/mps.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace fcuc::milp {

namespace {

constexpr const char* kObjRow = "OBJ";

std::string num(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

double parse_num(const std::string& s) {
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw MpsError("mps: bad number '" + s + "'");
  return v;
}

std::string pad(const std::string& s, std::size_t width) {
  if (s.size() >= width) return s;
  return s + std::string(width - s.size(), ' ');
}

// Name fields start at columns 5 and 15, numbers at 25; wider numbers push
// following fields right.
void entry(std::ostream& os, const std::string& f1, const std::string& f2, const std::string& f3,
           const std::string& value) {
  os << ' ' << pad(f1, 2) << ' ' << pad(f2, 8) << "  " << pad(f3, 8) << "  " << value << '\n';
}

char sense_code(const Constraint& c) {
  switch (c.sense) {
    case Sense::LessEqual: return 'L';
    case Sense::Equal: return 'E';
    case Sense::GreaterEqual: return 'G';
  }
  return 'L';
}

// Range width R with rhs - R == lo exactly, searched a few ulps around the
// rounded difference; NaN if none exists.
double exact_width(double rhs, double lo) {
  double r = rhs - lo;
  double up = r, down = r;
  for (int k = 0; k < 8; ++k) {
    if (rhs - up == lo) return up;
    if (rhs - down == lo) return down;
    up = std::nextafter(up, kInf);
    down = std::nextafter(down, -kInf);
  }
  return std::nan("");
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

}  // namespace

std::string column_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "C%07zu", index + 1);
  return buf;
}

std::string row_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "R%07zu", index + 1);
  return buf;
}

void write_mps(const MilpModel& model, std::ostream& os, std::ostream* names) {
  if (model.num_vars() > 9'999'999 || model.num_constraints() > 9'999'999)
    throw MpsError("mps: model too large for 8-character ids");
  os << "NAME          " << "FCUC" << '\n';
  if (names) {
    nlohmann::json t;
    t["model"] = model.name();
    auto& cols = t["columns"] = nlohmann::json::array();
    for (std::size_t j = 0; j < model.num_vars(); ++j)
      cols.push_back({column_id(j), model.vars()[j].name, model.vars()[j].priority});
    auto& rows = t["rows"] = nlohmann::json::array();
    auto& exact = t["range_lower"] = nlohmann::json::object();
    for (std::size_t i = 0; i < model.num_constraints(); ++i) {
      const auto& c = model.constraints()[i];
      rows.push_back({row_id(i), c.name});
      if (c.sense == Sense::LessEqual && std::isfinite(c.range_lo) && std::isnan(exact_width(c.rhs, c.range_lo)))
        exact[row_id(i)] = num(c.range_lo);
    }
    *names << t.dump(1) << '\n';
  }
  if (model.num_vars() == 0 && model.num_constraints() == 0) {
    os << "ENDATA\n";
    return;
  }

  os << "ROWS\n";
  os << " N  " << kObjRow << '\n';
  for (std::size_t i = 0; i < model.num_constraints(); ++i)
    os << ' ' << sense_code(model.constraints()[i]) << "  " << row_id(i) << '\n';

  std::vector<std::vector<std::pair<std::size_t, double>>> by_col(model.num_vars());
  for (std::size_t i = 0; i < model.num_constraints(); ++i)
    for (const auto& t : model.constraints()[i].terms) by_col[static_cast<std::size_t>(t.var)].emplace_back(i, t.coef);

  os << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  auto emit_marker = [&](const char* what) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "M%07d", ++marker);
    os << "    " << pad(buf, 8) << "  'MARKER'                 '" << what << "'\n";
  };
  for (std::size_t j = 0; j < model.num_vars(); ++j) {
    const auto& v = model.vars()[j];
    const bool is_int = v.kind == VarKind::Binary;
    if (is_int != in_int) {
      emit_marker(is_int ? "INTORG" : "INTEND");
      in_int = is_int;
    }
    const auto id = column_id(j);
    if (v.obj != 0.0 || by_col[j].empty()) entry(os, "", id, kObjRow, num(v.obj));
    for (const auto& [i, a] : by_col[j]) entry(os, "", id, row_id(i), num(a));
  }
  if (in_int) emit_marker("INTEND");

  os << "RHS\n";
  if (model.obj_offset() != 0.0) entry(os, "", "RHS", kObjRow, num(-model.obj_offset()));
  for (std::size_t i = 0; i < model.num_constraints(); ++i) {
    const double rhs = model.constraints()[i].rhs;
    if (rhs != 0.0) entry(os, "", "RHS", row_id(i), num(rhs));
  }

  bool ranges_header = false;
  for (std::size_t i = 0; i < model.num_constraints(); ++i) {
    const auto& c = model.constraints()[i];
    double r = 0.0;
    if (c.sense == Sense::LessEqual && std::isfinite(c.range_lo)) {
      r = exact_width(c.rhs, c.range_lo);
      if (std::isnan(r)) r = c.rhs - c.range_lo;
    }
    else if (c.sense == Sense::GreaterEqual && std::isfinite(c.range_hi))
      r = c.range_hi - c.rhs;
    else
      continue;
    if (!ranges_header) {
      os << "RANGES\n";
      ranges_header = true;
    }
    entry(os, "", "RNG", row_id(i), num(r));
  }

  os << "BOUNDS\n";
  for (std::size_t j = 0; j < model.num_vars(); ++j) {
    const auto& v = model.vars()[j];
    const auto id = column_id(j);
    if (v.lb == v.ub) {
      entry(os, "FX", "BND", id, num(v.lb));
      continue;
    }
    if (std::isinf(v.lb) && std::isinf(v.ub)) {
      os << " FR BND       " << id << '\n';
      continue;
    }
    if (std::isinf(v.lb))
      os << " MI BND       " << id << '\n';
    else if (v.lb != 0.0)
      entry(os, "LO", "BND", id, num(v.lb));
    if (std::isfinite(v.ub)) entry(os, "UP", "BND", id, num(v.ub));
  }
  os << "ENDATA\n";
}

MilpModel read_mps(std::istream& is, std::istream* names) {
  enum class Section { None, Rows, Columns, Rhs, Ranges, Bounds, End };
  struct RowInfo {
    char code;
    std::vector<Term> terms;
    double rhs = 0.0;
    double range = 0.0;
    bool has_range = false;
  };
  std::vector<RowInfo> rows;
  std::unordered_map<std::string, std::size_t> row_index;
  std::string obj_name;
  struct ColInfo {
    bool integer = false;
    double obj = 0.0;
    double lb = 0.0;
    double ub = kInf;
    bool ub_set = false;
  };
  std::vector<ColInfo> cols;
  std::vector<std::string> col_names;
  std::unordered_map<std::string, std::size_t> col_index;
  double obj_rhs = 0.0;

  Section sec = Section::None;
  bool in_int = false;
  std::string line;
  auto find_row = [&](const std::string& n) -> long {
    if (n == obj_name) return -1;
    auto it = row_index.find(n);
    if (it == row_index.end()) throw MpsError("mps: unknown row '" + n + "'");
    return static_cast<long>(it->second);
  };
  auto find_col = [&](const std::string& n) {
    auto it = col_index.find(n);
    if (it == col_index.end()) throw MpsError("mps: unknown column '" + n + "'");
    return it->second;
  };
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '*') continue;
    auto tk = tokens(line);
    if (tk.empty()) continue;
    if (line[0] != ' ') {
      const auto& h = tk[0];
      if (h == "NAME") sec = Section::None;
      else if (h == "ROWS") sec = Section::Rows;
      else if (h == "COLUMNS") sec = Section::Columns;
      else if (h == "RHS") sec = Section::Rhs;
      else if (h == "RANGES") sec = Section::Ranges;
      else if (h == "BOUNDS") sec = Section::Bounds;
      else if (h == "ENDATA") { sec = Section::End; break; }
      else throw MpsError("mps: unknown section '" + h + "'");
      continue;
    }
    switch (sec) {
      case Section::Rows: {
        if (tk.size() != 2) throw MpsError("mps: bad ROWS line");
        const char code = tk[0][0];
        if (code == 'N') {
          if (obj_name.empty()) obj_name = tk[1];
          break;
        }
        if (code != 'L' && code != 'E' && code != 'G') throw MpsError("mps: bad row type");
        row_index.emplace(tk[1], rows.size());
        rows.push_back({code, {}, 0.0, 0.0, false});
        break;
      }
      case Section::Columns: {
        if (tk.size() == 3 && tk[1] == "'MARKER'") {
          if (tk[2] == "'INTORG'") in_int = true;
          else if (tk[2] == "'INTEND'") in_int = false;
          else throw MpsError("mps: bad marker");
          break;
        }
        if (tk.size() != 3 && tk.size() != 5) throw MpsError("mps: bad COLUMNS line");
        auto it = col_index.find(tk[0]);
        std::size_t j;
        if (it == col_index.end()) {
          j = cols.size();
          col_index.emplace(tk[0], j);
          col_names.push_back(tk[0]);
          cols.push_back({});
          cols.back().integer = in_int;
        } else {
          j = it->second;
        }
        for (std::size_t k = 1; k + 1 < tk.size(); k += 2) {
          const double v = parse_num(tk[k + 1]);
          const long r = find_row(tk[k]);
          if (r < 0)
            cols[j].obj = v;
          else
            rows[static_cast<std::size_t>(r)].terms.push_back({static_cast<int>(j), v});
        }
        break;
      }
      case Section::Rhs:
      case Section::Ranges: {
        if (tk.size() != 3 && tk.size() != 5) throw MpsError("mps: bad RHS/RANGES line");
        for (std::size_t k = 1; k + 1 < tk.size(); k += 2) {
          const double v = parse_num(tk[k + 1]);
          const long r = find_row(tk[k]);
          if (sec == Section::Rhs) {
            if (r < 0) obj_rhs = v;
            else rows[static_cast<std::size_t>(r)].rhs = v;
          } else {
            if (r < 0) throw MpsError("mps: range on objective row");
            rows[static_cast<std::size_t>(r)].range = v;
            rows[static_cast<std::size_t>(r)].has_range = true;
          }
        }
        break;
      }
      case Section::Bounds: {
        if (tk.size() < 3) throw MpsError("mps: bad BOUNDS line");
        const auto& type = tk[0];
        auto& c = cols[find_col(tk[2])];
        const double v = tk.size() >= 4 ? parse_num(tk[3]) : 0.0;
        if (type == "UP") {
          c.ub = v;
          c.ub_set = true;
        } else if (type == "LO") {
          c.lb = v;
        } else if (type == "FX") {
          c.lb = c.ub = v;
          c.ub_set = true;
        } else if (type == "FR") {
          c.lb = -kInf;
          c.ub = kInf;
        } else if (type == "MI") {
          c.lb = -kInf;
        } else if (type == "PL") {
          c.ub = kInf;
        } else if (type == "BV") {
          c.integer = true;
          c.lb = 0.0;
          c.ub = 1.0;
          c.ub_set = true;
        } else {
          throw MpsError("mps: unsupported bound type '" + type + "'");
        }
        break;
      }
      default: throw MpsError("mps: data line outside a section");
    }
  }
  if (sec != Section::End) throw MpsError("mps: missing ENDATA");

  std::string model_name = "model";
  std::vector<std::string> cname = col_names;
  std::vector<int> priority(cols.size(), 0);
  std::vector<std::string> rname;
  std::map<std::string, double> range_lower;
  for (const auto& [n, i] : row_index) {
    if (rname.size() <= i) rname.resize(i + 1);
    rname[i] = n;
  }
  if (names) {
    auto t = nlohmann::json::parse(*names);
    model_name = t.at("model").get<std::string>();
    std::map<std::string, std::pair<std::string, int>> cmap;
    for (const auto& c : t.at("columns")) cmap[c.at(0).get<std::string>()] = {c.at(1).get<std::string>(), c.at(2).get<int>()};
    std::map<std::string, std::string> rmap;
    for (const auto& r : t.at("rows")) rmap[r.at(0).get<std::string>()] = r.at(1).get<std::string>();
    if (t.contains("range_lower"))
      for (const auto& [id, v] : t.at("range_lower").items()) range_lower[id] = parse_num(v.get<std::string>());
    for (std::size_t j = 0; j < cname.size(); ++j) {
      auto it = cmap.find(cname[j]);
      if (it == cmap.end()) throw MpsError("mps: column missing from name table");
      priority[j] = it->second.second;
      cname[j] = it->second.first;
    }
    for (auto& n : rname) {
      auto it = rmap.find(n);
      if (it == rmap.end()) throw MpsError("mps: row missing from name table");
      n = it->second;
    }
  }

  MilpModel m(model_name);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const auto& c = cols[j];
    double ub = c.ub;
    if (c.integer && !c.ub_set) ub = 1.0;
    if (c.integer && (c.lb < 0.0 || ub > 1.0)) throw MpsError("mps: only binary integer columns are supported");
    auto v = m.add_var(cname[j], c.integer ? VarKind::Binary : VarKind::Continuous, c.lb, ub, c.obj);
    m.set_priority(v, priority[j]);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (auto it = range_lower.find(row_id(i)); it != range_lower.end() && r.code == 'L') {
      LinExpr e;
      for (const auto& t : r.terms) e.add(Var{t.var}, t.coef);
      m.add_range(e, it->second, r.rhs, rname[i]);
      continue;
    }
    LinExpr e;
    for (const auto& t : r.terms) e.add(Var{t.var}, t.coef);
    if (!r.has_range) {
      const auto s = r.code == 'L' ? Sense::LessEqual : r.code == 'E' ? Sense::Equal : Sense::GreaterEqual;
      m.add_constraint(e, s, r.rhs, rname[i]);
    } else if (r.code == 'L') {
      m.add_range(e, r.rhs - std::abs(r.range), r.rhs, rname[i]);
    } else if (r.code == 'G') {
      m.add_range(e, r.rhs, r.rhs + std::abs(r.range), rname[i]);
    } else if (r.range >= 0.0) {
      m.add_range(e, r.rhs, r.rhs + r.range, rname[i]);
    } else {
      m.add_range(e, r.rhs + r.range, r.rhs, rname[i]);
    }
  }
  m.set_obj_offset(-obj_rhs);
  return m;
}

void export_mps(const MilpModel& model, const std::string& path) {
  std::ofstream os(path);
  std::ofstream ns(path + ".names");
  if (!os || !ns) throw MpsError("mps: cannot open '" + path + "' for writing");
  write_mps(model, os, &ns);
  if (!os || !ns) throw MpsError("mps: write failed for '" + path + "'");
}

MilpModel import_mps(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw MpsError("mps: cannot open '" + path + "'");
  std::ifstream ns(path + ".names");
  return read_mps(is, ns ? &ns : nullptr);
}

}  // namespace fcuc::milp
