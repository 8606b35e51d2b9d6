#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "fcuc/milp/bnb.hpp"
#include "fcuc/milp/mps.hpp"

using namespace fcuc::milp;

namespace {

MilpModel roundtrip(const MilpModel& m) {
  std::stringstream mps, names;
  write_mps(m, mps, &names);
  return read_mps(mps, &names);
}

}  // namespace

TEST_CASE("empty model writes NAME and ENDATA only") {
  MilpModel m;
  std::stringstream os;
  write_mps(m, os);
  CHECK(os.str() == "NAME          FCUC\nENDATA\n");
  CHECK(roundtrip(m) == m);
}

TEST_CASE("random models round-trip exactly") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int rep = 0; rep < 30; ++rep) {
    MilpModel m("random model " + std::to_string(rep));
    std::vector<Var> v;
    for (int j = 0; j < 12; ++j) {
      const int kind = static_cast<int>(rng() % 6);
      Var x;
      switch (kind) {
        case 0: x = m.add_binary("bin " + std::to_string(j), u(rng)); break;
        case 1: x = m.add_continuous("free_" + std::to_string(j), -kInf, kInf, u(rng)); break;
        case 2: x = m.add_continuous("mi_" + std::to_string(j), -kInf, u(rng) + 20.0, 0.0); break;
        case 3: {
          const double a = u(rng);
          x = m.add_continuous("fx_" + std::to_string(j), a, a, 1.0 / 3.0);
          break;
        }
        case 4: x = m.add_continuous("box_" + std::to_string(j), -1.0 / 7.0, 1e-17, u(rng)); break;
        default: x = m.add_continuous("pos_" + std::to_string(j), u(rng) - 20.0, kInf, 0.1); break;
      }
      m.set_priority(x, static_cast<int>(rng() % 3));
      v.push_back(x);
    }
    for (int i = 0; i < 8; ++i) {
      LinExpr e;
      for (auto x : v)
        if (rng() % 3 == 0) e.add(x, u(rng) * 1e-3);
      const int s = static_cast<int>(rng() % 4);
      if (s == 3)
        m.add_range(e, -1.0 - std::abs(u(rng)), 1.0 + std::abs(u(rng)), "rng row " + std::to_string(i));
      else
        m.add_constraint(e, static_cast<Sense>(s), u(rng), "row_" + std::to_string(i));
    }
    m.set_obj_offset(u(rng));
    CHECK(roundtrip(m) == m);
  }
}

TEST_CASE("binaries sit inside INTORG/INTEND with an explicit upper bound") {
  MilpModel m;
  auto x = m.add_binary("x", 1.0);
  auto y = m.add_continuous("y", 0.0, 4.0);
  m.add_constraint(x + y, Sense::GreaterEqual, 1.0);
  std::stringstream os;
  write_mps(m, os);
  const auto s = os.str();
  CHECK(s.find("'INTORG'") != std::string::npos);
  CHECK(s.find("'INTEND'") != std::string::npos);
  CHECK(s.find(" UP BND       C0000001  1\n") != std::string::npos);
  CHECK(s.find("RANGES") == std::string::npos);
}

TEST_CASE("export and import through files, then solve the same") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> d(1, 25);
  MilpModel m("knapsack");
  LinExpr w;
  for (int i = 0; i < 10; ++i) w.add(m.add_binary("x" + std::to_string(i), -d(rng)), d(rng));
  m.add_constraint(w, Sense::LessEqual, 60.0, "cap");
  const auto dir = std::filesystem::temp_directory_path() / "fcuc_mps_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "knapsack.mps").string();
  export_mps(m, path);
  REQUIRE(std::filesystem::exists(path + ".names"));
  auto back = import_mps(path);
  CHECK(back == m);
  CHECK(bnb_solve(back).objective == bnb_solve(m).objective);
  std::filesystem::remove_all(dir);
}

TEST_CASE("reader rejects malformed input") {
  std::stringstream bad("NAME x\nROWS\n N OBJ\nCOLUMNS\n C1 R9 1\nENDATA\n");
  CHECK_THROWS_AS((void)read_mps(bad), MpsError);
  std::stringstream truncated("NAME x\nROWS\n N OBJ\n");
  CHECK_THROWS_AS((void)read_mps(truncated), MpsError);
}
