#pragma once

// Stage drivers shared by the command-line tool and the acceptance run.
// Every stage reads its inputs from the output directory, checks the recorded
// hashes, and writes new files; nothing is modified in place.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "fcuc/csnn.hpp"
#include "fcuc/milp/bnb.hpp"
#include "fcuc/region.hpp"
#include "fcuc/sampler.hpp"
#include "fcuc/sfr.hpp"
#include "fcuc/ucmodel.hpp"

namespace fcuc::pipeline {

// Bad command line or configuration; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The solver proved infeasibility or stopped without a schedule; exit code 3.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kConfigVersion = 1;

struct Config {
  std::string source;  // path of the config file, empty when built in code
  std::uint64_t seed = 1;
  std::string case_path;
  std::string out_dir;

  sampler::SampleBox box;
  std::size_t samples = 2000;
  std::size_t lhs_candidates = 20;
  sfr::StepwiseLimit limit = sfr::StepwiseLimit::defaults();

  double test_fraction = 0.2;
  csnn::TrainConfig nadir_train;
  csnn::TrainConfig step_train;

  region::RegionOptions region;

  uc::Mode mode = uc::Mode::Fcuc;
  bool use_stepwise = true;
  bool headroom = true;
  milp::BnbOptions bnb;

  double sim_t_end = 30.0;
  double sim_step = 0.05;

  [[nodiscard]] std::string path(const std::string& file) const;  // inside out_dir
  [[nodiscard]] std::string dataset_csv() const { return path("dataset.csv"); }
  [[nodiscard]] std::string dataset_sidecar() const { return path("dataset.json"); }
  [[nodiscard]] std::string nadir_net() const { return path("nadir_net.json"); }
  [[nodiscard]] std::string step_net() const { return path("stepwise_net.json"); }
  [[nodiscard]] std::string train_report() const { return path("train_report.json"); }
  [[nodiscard]] std::string region_file() const { return path("region.json"); }
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

// Relative paths in the file resolve against the file's directory; an --out
// override resolves against the working directory. Throws UsageError.
[[nodiscard]] Config config_from_json(const std::string& text, const std::string& base_dir, const Overrides& ov = {});
[[nodiscard]] Config load_config(const std::string& path, const Overrides& ov = {});

[[nodiscard]] uc::Mode parse_mode(const std::string& s);

// sample: dataset.csv + dataset.json.
sampler::Dataset run_sample(const Config& cfg);

struct SplitMetrics {
  csnn::Metrics train;
  csnn::Metrics test;
};

struct TrainOutcome {
  csnn::Network nadir;
  csnn::Network stepwise;
  SplitMetrics nadir_metrics;
  SplitMetrics step_metrics;
  double nadir_sparsity = 0.0;  // inactive fraction over sparse layers
  double step_sparsity = 0.0;
};

// Inactive fraction of the weights in the sparse layers; 0 if none are sparse.
[[nodiscard]] double sparsity_rate(const csnn::Network& net);

// Train/test feature and target matrices of the stable rows.
struct SplitData {
  std::vector<std::vector<double>> x_train, x_test;
  std::vector<std::vector<double>> nadir_train, nadir_test;
  std::vector<std::vector<double>> step_train, step_test;
};
[[nodiscard]] SplitData split_data(const sampler::Dataset& ds, double test_fraction, std::uint64_t seed);

// train: nadir_net.json, stepwise_net.json, train_report.json.
TrainOutcome run_train(const Config& cfg);

// region: region.json from the stable rows of the dataset.
region::StabilityRegion run_region(const Config& cfg);

// Loaded and mutually checked artifacts for the optimisation stages.
struct Artifacts {
  uc::UcCase uc;
  std::string case_hash;
  sampler::Dataset dataset;
  std::string dataset_hash;
  std::optional<csnn::Network> nadir, stepwise;
  std::optional<region::StabilityRegion> region;
  std::string nadir_hash, step_hash, region_hash;  // file hashes
};

// The learned artifacts are required in FCUC mode only. Throws
// ArtifactMismatch when an artifact was derived from other inputs.
[[nodiscard]] Artifacts load_artifacts(const Config& cfg, uc::Mode mode);

[[nodiscard]] uc::SolveOptions solve_options(const Config& cfg, const Artifacts& a, uc::Mode mode);

struct BuildOutcome {
  std::string mps_path;
  std::size_t variables = 0, constraints = 0, binaries = 0, nonzeros = 0;
};

// build: model_<mode>.mps and its name table.
BuildOutcome run_build(const Config& cfg, uc::Mode mode);

struct SolveOutcome {
  uc::Schedule schedule;
  uc::Verification verification;
};

// solve: schedule_<mode>.json/.csv, verification_<mode>.json, trace_<mode>.csv.
// Throws InfeasibleError when there is no schedule.
SolveOutcome run_solve(const Config& cfg, uc::Mode mode);

// simulate: trace.csv with both schedules' trajectories and the limit curve.
// Needs the two schedule files written by solve.
void run_simulate(const Config& cfg);

struct EvalRow {
  std::string method;
  std::string split;
  csnn::Metrics m;
};

// eval: eval.csv and eval.txt comparing the trained nadir network with an
// ablation trained without the overshoot penalty.
std::vector<EvalRow> run_eval(const Config& cfg);

[[nodiscard]] std::string eval_csv(const std::vector<EvalRow>& rows);
[[nodiscard]] std::string eval_table(const std::vector<EvalRow>& rows);

}  // namespace fcuc::pipeline
