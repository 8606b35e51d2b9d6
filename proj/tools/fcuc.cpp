// Command-line driver: sample -> train -> region -> build -> solve -> simulate -> eval.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <iostream>

#include "fcuc/pipeline.hpp"
#include "fcuc/util.hpp"

using namespace fcuc;
namespace pl = fcuc::pipeline;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kInfeasible = 3, kMismatch = 4 };

void print_metrics(const char* name, const pl::SplitMetrics& m, double sparsity) {
  fmt::print("{:<9} train mse {:.4e} mape {:.4f}% neg {:.4f} | test mse {:.4e} mape {:.4f}% neg {:.4f} | sparsity {:.4f}\n",
             name, m.train.mse, 100.0 * m.train.mape, m.train.negativeness, m.test.mse, 100.0 * m.test.mape,
             m.test.negativeness, sparsity);
}

int run(const std::string& cmd, const pl::Config& cfg, const std::string& mode_arg) {
  const auto mode = mode_arg.empty() ? cfg.mode : pl::parse_mode(mode_arg);
  if (cmd == "sample") {
    const auto ds = pl::run_sample(cfg);
    fmt::print("sampled {} points, {} stable -> {}\n", ds.rows.size(), ds.stable_count(), cfg.dataset_csv());
  } else if (cmd == "train") {
    const auto t = pl::run_train(cfg);
    print_metrics("nadir", t.nadir_metrics, t.nadir_sparsity);
    print_metrics("stepwise", t.step_metrics, t.step_sparsity);
    fmt::print("report -> {}\n", cfg.train_report());
  } else if (cmd == "region") {
    const auto r = pl::run_region(cfg);
    fmt::print("{} clusters, {} generators -> {}\n", r.clusters.size(), r.num_generators(), cfg.region_file());
  } else if (cmd == "build") {
    const auto b = pl::run_build(cfg, mode);
    fmt::print("{} model: {} variables ({} binary), {} rows, {} nonzeros -> {}\n", uc::to_string(mode), b.variables,
               b.binaries, b.constraints, b.nonzeros, b.mps_path);
  } else if (cmd == "solve") {
    const auto s = pl::run_solve(cfg, mode);
    const auto& sc = s.schedule;
    fmt::print("{}: {} objective {:.4f} (oper {:.2f}, reserve {:.2f}, shed {:.2f}) nodes {} time {:.2f}s\n",
               uc::to_string(mode), milp::to_string(sc.status), sc.objective, sc.cost.oper, sc.cost.reserve,
               sc.cost.load, sc.nodes, sc.wall_seconds);
    fmt::print("frequency verdicts: {} of {} periods fail\n", s.verification.failing_periods(), sc.periods.size());
    if (sc.status != milp::Status::Optimal) fmt::print("note: search stopped at a limit; schedule is the incumbent\n");
  } else if (cmd == "simulate") {
    pl::run_simulate(cfg);
    fmt::print("trace -> {}\n", cfg.path("trace.csv"));
  } else if (cmd == "eval") {
    const auto rows = pl::run_eval(cfg);
    std::fputs(pl::eval_table(rows).c_str(), stdout);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-constrained unit commitment with learned constraints"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  auto* out_opt = app.add_option("--out", out_dir, "Override the output directory");
  app.add_option("--config", config_path, "Pipeline config file")->required();

  std::string mode;
  const auto mode_check = CLI::IsMember({"conventional", "fcuc"});
  app.add_subcommand("sample", "Sample the inertia box and label it");
  app.add_subcommand("train", "Train the nadir and stepwise networks");
  app.add_subcommand("region", "Build the stability region");
  app.add_subcommand("build", "Export the UC model as MPS")->add_option("--mode", mode)->check(mode_check);
  app.add_subcommand("solve", "Solve the UC case and verify")->add_option("--mode", mode)->check(mode_check);
  app.add_subcommand("simulate", "Frequency traces of both schedules");
  app.add_subcommand("eval", "Compare networks on the dataset splits");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    pl::Overrides ov;
    if (*seed_opt) ov.seed = seed;
    if (*out_opt) ov.out_dir = out_dir;
    const auto cfg = pl::load_config(config_path, ov);
    return run(app.get_subcommands().front()->get_name(), cfg, mode);
  } catch (const pl::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const uc::CaseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const pl::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInfeasible;
  } catch (const ArtifactMismatch& e) {
    std::cerr << "artifact mismatch: " << e.what() << "\n";
    return kMismatch;
  } catch (const uc::ConfigError& e) {
    std::cerr << "artifact mismatch: " << e.what() << "\n";
    return kMismatch;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
