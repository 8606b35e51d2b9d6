#pragma once

// Fixed-format MPS interchange.
//
// Column and row names are replaced by 8-character ids (C0000001, R0000001)
// so every name field fits the fixed layout; the original names, priorities
// and the model name go to a JSON side table next to the MPS file.
// Numbers are written in shortest round-trip form, so a numeric field may be
// wider than 12 characters; the reader splits on whitespace.

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "fcuc/milp/model.hpp"

namespace fcuc::milp {

class MpsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_mps(const MilpModel& model, std::ostream& mps, std::ostream* names = nullptr);
// Without a name table, ids are used as names and priorities are zero.
[[nodiscard]] MilpModel read_mps(std::istream& mps, std::istream* names = nullptr);

// Writes <path> and <path>.names.
void export_mps(const MilpModel& model, const std::string& path);
[[nodiscard]] MilpModel import_mps(const std::string& path);

[[nodiscard]] std::string column_id(std::size_t index);
[[nodiscard]] std::string row_id(std::size_t index);

}  // namespace fcuc::milp
