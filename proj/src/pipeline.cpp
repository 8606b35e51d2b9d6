#include "fcuc/pipeline.hpp"

#include <fmt/format.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "fcuc/milp/mps.hpp"
#include "fcuc/util.hpp"

namespace fcuc::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& base, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute() || base.empty()) return path.lexically_normal().string();
  return (fs::path(base) / path).lexically_normal().string();
}

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw UsageError("config: " + where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw UsageError("config: unknown key '" + k + "' in " + where);
}

csnn::TrainConfig train_from_json(const json& j, std::uint64_t seed, const std::string& where) {
  only_keys(j, {"hidden", "sparse", "sparsity", "sparse_output", "learning_rate", "final_learning_rate", "beta1",
                "beta2", "epsilon", "batch_size", "epochs", "update_interval", "update_end", "drop_fraction",
                "dropout", "loss", "seed"},
            where);
  csnn::TrainConfig t;
  t.hidden = j.value("hidden", t.hidden);
  t.sparse = j.value("sparse", t.sparse);
  t.sparsity = j.value("sparsity", t.sparsity);
  t.sparse_output = j.value("sparse_output", t.sparse_output);
  t.learning_rate = j.value("learning_rate", t.learning_rate);
  t.final_learning_rate = j.value("final_learning_rate", t.final_learning_rate);
  t.beta1 = j.value("beta1", t.beta1);
  t.beta2 = j.value("beta2", t.beta2);
  t.epsilon = j.value("epsilon", t.epsilon);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.epochs = j.value("epochs", t.epochs);
  t.update_interval = j.value("update_interval", t.update_interval);
  t.update_end = j.value("update_end", t.update_end);
  t.drop_fraction = j.value("drop_fraction", t.drop_fraction);
  t.dropout = j.value("dropout", t.dropout);
  if (j.contains("loss")) {
    only_keys(j["loss"], {"squared", "overshoot"}, where + ".loss");
    t.loss.squared = j["loss"].value("squared", t.loss.squared);
    t.loss.overshoot = j["loss"].value("overshoot", t.loss.overshoot);
  }
  t.seed = j.value("seed", seed);
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("config: ") + where + ": " + e.what());
  }
  return t;
}

json train_to_json(const csnn::TrainConfig& t) {
  return {{"hidden", t.hidden},
          {"sparse", t.sparse},
          {"sparsity", t.sparsity},
          {"sparse_output", t.sparse_output},
          {"learning_rate", t.learning_rate},
          {"final_learning_rate", t.final_learning_rate},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"epsilon", t.epsilon},
          {"batch_size", t.batch_size},
          {"epochs", t.epochs},
          {"update_interval", t.update_interval},
          {"update_end", t.update_end},
          {"drop_fraction", t.drop_fraction},
          {"dropout", t.dropout},
          {"loss", {{"squared", t.loss.squared}, {"overshoot", t.loss.overshoot}}},
          {"seed", t.seed}};
}

json metrics_json(const csnn::Metrics& m) {
  return {{"mse", m.mse}, {"mape", m.mape}, {"negativeness", m.negativeness}};
}

std::string file_hash(const std::string& path) { return sha256_hex(read_file(path)); }

// Ties a network to the dataset it was fitted on and the settings it was fitted with.
std::string train_hash(const std::string& dataset_hash, const std::string& target, double test_fraction,
                       const csnn::TrainConfig& t) {
  json j{{"dataset", dataset_hash}, {"target", target}, {"test_fraction", test_fraction}, {"train", train_to_json(t)}};
  return sha256_hex(j.dump());
}

bool same_limit(const sfr::StepwiseLimit& a, const sfr::StepwiseLimit& b) {
  if (a.f_nominal != b.f_nominal || a.f_min != b.f_min || a.qss_max != b.qss_max || a.rocof_max != b.rocof_max ||
      a.checkpoints.size() != b.checkpoints.size())
    return false;
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i)
    if (a.checkpoints[i].t != b.checkpoints[i].t || a.checkpoints[i].floor != b.checkpoints[i].floor) return false;
  return true;
}

void ensure_out(const Config& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw UsageError("cannot create output directory " + cfg.out_dir + ": " + ec.message());
}

void require_file(const std::string& path, const std::string& stage) {
  if (!fs::exists(path)) throw UsageError(path + " not found; run '" + stage + "' first");
}

// Loads the dataset and checks it was sampled with the configured settings.
sampler::Dataset current_dataset(const Config& cfg) {
  require_file(cfg.dataset_csv(), "sample");
  require_file(cfg.dataset_sidecar(), "sample");
  auto ds = sampler::load_dataset(cfg.dataset_csv(), cfg.dataset_sidecar());
  if (ds.box.lower != cfg.box.lower || ds.box.upper != cfg.box.upper || ds.box.T != cfg.box.T ||
      ds.box.dP != cfg.box.dP || ds.seed != cfg.seed || ds.rows.size() != cfg.samples ||
      ds.lhs_candidates != cfg.lhs_candidates || !same_limit(ds.limit, cfg.limit))
    throw ArtifactMismatch("dataset was sampled with settings that differ from the config; rerun 'sample'");
  return ds;
}

csnn::Network checked_network(const std::string& path, const std::string& target, const std::string& dataset_hash,
                              double test_fraction, const csnn::TrainConfig& t) {
  require_file(path, "train");
  auto net = csnn::load_network(path);
  if (net.target != target) throw ArtifactMismatch(path + ": expected a " + target + " network");
  if (net.dataset_hash != dataset_hash)
    throw ArtifactMismatch(path + " was trained on a different dataset; rerun 'train'");
  if (net.train_hash != train_hash(dataset_hash, target, test_fraction, t))
    throw ArtifactMismatch(path + " was trained with settings that differ from the config; rerun 'train'");
  return net;
}

SplitMetrics split_metrics(const csnn::Network& net, const std::vector<std::vector<double>>& xt,
                           const std::vector<std::vector<double>>& yt, const std::vector<std::vector<double>>& xv,
                           const std::vector<std::vector<double>>& yv) {
  SplitMetrics m;
  m.train = csnn::evaluate(net, xt, yt);
  if (!xv.empty()) m.test = csnn::evaluate(net, xv, yv);
  return m;
}

json net_report(const csnn::Network& net, const SplitMetrics& m, double sparsity, long steps) {
  return {{"sizes", net.sizes()},
          {"train", metrics_json(m.train)},
          {"test", metrics_json(m.test)},
          {"sparsity_rate", sparsity},
          {"active_params", net.active_params()},
          {"params", net.num_params()},
          {"steps", steps},
          {"train_hash", net.train_hash}};
}

std::string mode_file(const Config& cfg, const std::string& stem, uc::Mode mode, const std::string& ext) {
  return cfg.path(stem + "_" + uc::to_string(mode) + ext);
}

uc::SolveOptions options_for(const Config& cfg, const Artifacts& a, uc::Mode mode) {
  uc::SolveOptions o;
  o.mode = mode;
  o.freq.limit = a.dataset.limit;
  o.freq.T = a.dataset.box.T;
  o.freq.dP = a.dataset.box.dP;
  o.freq.headroom = cfg.headroom;
  o.bnb = cfg.bnb;
  if (mode == uc::Mode::Fcuc) {
    o.nadir_net = &*a.nadir;
    o.step_net = cfg.use_stepwise ? &*a.stepwise : nullptr;
    o.region = &*a.region;
  }
  return o;
}

json provenance(const Artifacts& a, uc::Mode mode) {
  json j{{"case_sha256", a.case_hash}, {"dataset_sha256", a.dataset_hash}};
  if (mode == uc::Mode::Fcuc) {
    j["nadir_net_sha256"] = a.nadir_hash;
    j["stepwise_net_sha256"] = a.step_hash;
    j["region_sha256"] = a.region_hash;
  }
  return j;
}

// Frequency at each trace time, NaN where the aggregate is outside the model.
std::vector<double> period_trace(const std::array<double, 4>& agg, const sampler::Dataset& ds, double t_end,
                                 double step) {
  const sfr::InertiaAggregate p{agg[0], agg[1], agg[2], agg[3], ds.box.T, ds.box.dP};
  const auto n = static_cast<std::size_t>(std::floor(t_end / step + 1e-9)) + 1;
  if (sfr::classify_stability(p) != sfr::Stability::StableUnderdamped)
    return std::vector<double>(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> f;
  for (const auto& tp : sfr::trace(p, ds.limit.f_nominal, t_end, step)) f.push_back(tp.freq_hz);
  return f;
}

std::string csv_num(double v) { return std::isnan(v) ? "nan" : fmt_double(v); }

}  // namespace

std::string Config::path(const std::string& file) const { return (fs::path(out_dir) / file).string(); }

uc::Mode parse_mode(const std::string& s) {
  if (s == "conventional") return uc::Mode::Conventional;
  if (s == "fcuc") return uc::Mode::Fcuc;
  throw UsageError("mode must be 'conventional' or 'fcuc', got '" + s + "'");
}

Config config_from_json(const std::string& text, const std::string& base_dir, const Overrides& ov) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  try {
    only_keys(j, {"version", "seed", "case", "out", "sample", "limit", "train", "region", "solve", "simulate"},
              "config");
    if (j.value("version", 0) != kConfigVersion)
      throw UsageError("config: version must be " + std::to_string(kConfigVersion));
    Config c;
    c.seed = ov.seed ? *ov.seed : j.value("seed", c.seed);
    c.case_path = resolve(base_dir, j.at("case").get<std::string>());
    c.out_dir = ov.out_dir ? resolve("", *ov.out_dir) : resolve(base_dir, j.value("out", std::string("out")));

    const auto& js = j.at("sample");
    only_keys(js, {"n", "lhs_candidates", "lower", "upper", "T", "dP"}, "sample");
    c.samples = js.at("n").get<std::size_t>();
    if (c.samples == 0) throw UsageError("config: sample.n must be positive");
    c.lhs_candidates = js.value("lhs_candidates", c.lhs_candidates);
    c.box.lower = js.at("lower").get<sampler::Feature>();
    c.box.upper = js.at("upper").get<sampler::Feature>();
    c.box.T = js.value("T", c.box.T);
    c.box.dP = js.value("dP", c.box.dP);
    try {
      c.box.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("config: sample: ") + e.what());
    }

    if (j.contains("limit")) {
      const auto& jl = j["limit"];
      only_keys(jl, {"f_nominal", "f_min", "qss_max", "rocof_max", "checkpoints"}, "limit");
      c.limit.f_nominal = jl.value("f_nominal", c.limit.f_nominal);
      c.limit.f_min = jl.value("f_min", c.limit.f_min);
      c.limit.qss_max = jl.value("qss_max", c.limit.qss_max);
      c.limit.rocof_max = jl.value("rocof_max", c.limit.rocof_max);
      if (jl.contains("checkpoints")) {
        c.limit.checkpoints.clear();
        for (const auto& cp : jl["checkpoints"]) c.limit.checkpoints.push_back({cp.at(0).get<double>(), cp.at(1).get<double>()});
      }
      try {
        c.limit.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("config: limit: ") + e.what());
      }
    }

    const json jt = j.value("train", json::object());
    only_keys(jt, {"test_fraction", "nadir", "stepwise"}, "train");
    c.test_fraction = jt.value("test_fraction", c.test_fraction);
    if (!(c.test_fraction >= 0.0 && c.test_fraction < 1.0)) throw UsageError("config: train.test_fraction must be in [0, 1)");
    c.nadir_train = train_from_json(jt.value("nadir", json::object()), c.seed, "train.nadir");
    c.step_train = train_from_json(jt.value("stepwise", json::object()), c.seed, "train.stepwise");

    const json jr = j.value("region", json::object());
    only_keys(jr, {"k", "seed", "thin", "thin_above"}, "region");
    c.region.k = jr.value("k", c.region.k);
    c.region.seed = jr.value("seed", c.seed);
    c.region.thin = jr.value("thin", c.region.thin);
    c.region.thin_above = jr.value("thin_above", c.region.thin_above);
    if (c.region.k < 1) throw UsageError("config: region.k must be at least 1");

    const json jv = j.value("solve", json::object());
    only_keys(jv, {"mode", "use_stepwise", "headroom", "rel_gap", "time_limit", "node_limit"}, "solve");
    c.mode = parse_mode(jv.value("mode", std::string("fcuc")));
    c.use_stepwise = jv.value("use_stepwise", c.use_stepwise);
    c.headroom = jv.value("headroom", c.headroom);
    c.bnb.rel_gap = jv.value("rel_gap", c.bnb.rel_gap);
    c.bnb.time_limit_seconds = jv.value("time_limit", c.bnb.time_limit_seconds);
    c.bnb.node_limit = jv.value("node_limit", c.bnb.node_limit);

    const json jm = j.value("simulate", json::object());
    only_keys(jm, {"t_end", "step"}, "simulate");
    c.sim_t_end = jm.value("t_end", c.sim_t_end);
    c.sim_step = jm.value("step", c.sim_step);
    if (!(c.sim_step > 0.0) || !(c.sim_t_end > 0.0)) throw UsageError("config: simulate t_end and step must be positive");
    return c;
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

Config load_config(const std::string& path, const Overrides& ov) {
  if (!fs::exists(path)) throw UsageError("config file " + path + " not found");
  auto c = config_from_json(read_file(path), fs::path(path).parent_path().string(), ov);
  c.source = path;
  return c;
}

sampler::Dataset run_sample(const Config& cfg) {
  if (cfg.samples == 0) throw UsageError("sample: n must be positive");
  ensure_out(cfg);
  sampler::BuildOptions bo;
  bo.lhs_candidates = cfg.lhs_candidates;
  sampler::Dataset ds;
  try {
    ds = sampler::build_dataset(cfg.box, cfg.samples, cfg.limit, cfg.seed, bo);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("sample: ") + e.what());
  }
  sampler::save_dataset(ds, cfg.dataset_csv(), cfg.dataset_sidecar());
  return ds;
}

double sparsity_rate(const csnn::Network& net) {
  std::size_t total = 0, active = 0;
  for (const auto& L : net.layers)
    if (L.is_sparse()) {
      total += L.w.size();
      active += L.active();
    }
  return total == 0 ? 0.0 : 1.0 - static_cast<double>(active) / static_cast<double>(total);
}

SplitData split_data(const sampler::Dataset& ds, double test_fraction, std::uint64_t seed) {
  const auto sp = sampler::split_stable(ds, test_fraction, seed);
  SplitData d;
  auto fill = [&](const std::vector<std::size_t>& idx, auto& x, auto& yn, auto& ys) {
    for (auto i : idx) {
      const auto& r = ds.rows[i];
      x.push_back({r.xn.begin(), r.xn.end()});
      yn.push_back({r.y_nadir});
      ys.push_back(r.y_step);
    }
  };
  fill(sp.train, d.x_train, d.nadir_train, d.step_train);
  fill(sp.test, d.x_test, d.nadir_test, d.step_test);
  return d;
}

TrainOutcome run_train(const Config& cfg) {
  ensure_out(cfg);
  const auto ds = current_dataset(cfg);
  const auto dh = sampler::dataset_hash(cfg.dataset_sidecar());
  const auto d = split_data(ds, cfg.test_fraction, cfg.seed);
  if (d.x_train.empty()) throw UsageError("train: no stable rows to train on");

  auto fit = [&](const std::vector<std::vector<double>>& y, const csnn::TrainConfig& tc, const std::string& target,
                 long& steps) {
    auto res = csnn::train(d.x_train, y, tc);
    auto net = std::move(res.net);
    steps = res.steps;
    net.input_norm = ds.norm;
    net.target = target;
    if (target == "stepwise")
      for (const auto& cp : ds.limit.checkpoints) net.checkpoints.push_back(cp.t);
    net.dataset_hash = dh;
    net.train_hash = train_hash(dh, target, cfg.test_fraction, tc);
    return net;
  };
  TrainOutcome out;
  long nadir_steps = 0, step_steps = 0;
  out.nadir = fit(d.nadir_train, cfg.nadir_train, "nadir", nadir_steps);
  out.stepwise = fit(d.step_train, cfg.step_train, "stepwise", step_steps);
  out.nadir_metrics = split_metrics(out.nadir, d.x_train, d.nadir_train, d.x_test, d.nadir_test);
  out.step_metrics = split_metrics(out.stepwise, d.x_train, d.step_train, d.x_test, d.step_test);
  out.nadir_sparsity = sparsity_rate(out.nadir);
  out.step_sparsity = sparsity_rate(out.stepwise);
  csnn::save_network(out.nadir, cfg.nadir_net());
  csnn::save_network(out.stepwise, cfg.step_net());

  json rep{{"format", "fcuc-train-report"},
           {"version", 1},
           {"dataset_sha256", dh},
           {"train_rows", d.x_train.size()},
           {"test_rows", d.x_test.size()},
           {"nadir", net_report(out.nadir, out.nadir_metrics, out.nadir_sparsity, nadir_steps)},
           {"stepwise", net_report(out.stepwise, out.step_metrics, out.step_sparsity, step_steps)}};
  rep["nadir"]["config"] = train_to_json(cfg.nadir_train);
  rep["stepwise"]["config"] = train_to_json(cfg.step_train);
  write_file(cfg.train_report(), rep.dump(2) + "\n");
  return out;
}

region::StabilityRegion run_region(const Config& cfg) {
  ensure_out(cfg);
  const auto ds = current_dataset(cfg);
  std::vector<region::Point> pts;
  for (const auto& r : ds.rows)
    if (r.stable) pts.push_back(r.xn);
  if (pts.empty()) throw UsageError("region: dataset has no stable rows");
  auto reg = region::build_region(pts, cfg.region);
  reg.normalization = ds.norm;
  reg.dataset_hash = sampler::dataset_hash(cfg.dataset_sidecar());
  region::save_region(reg, cfg.region_file());
  return reg;
}

Artifacts load_artifacts(const Config& cfg, uc::Mode mode) {
  Artifacts a;
  if (!fs::exists(cfg.case_path)) throw UsageError("case file " + cfg.case_path + " not found");
  a.uc = uc::load_case(cfg.case_path);
  a.case_hash = file_hash(cfg.case_path);
  a.dataset = current_dataset(cfg);
  a.dataset_hash = sampler::dataset_hash(cfg.dataset_sidecar());
  if (mode != uc::Mode::Fcuc) return a;
  a.nadir = checked_network(cfg.nadir_net(), "nadir", a.dataset_hash, cfg.test_fraction, cfg.nadir_train);
  a.nadir_hash = file_hash(cfg.nadir_net());
  a.stepwise = checked_network(cfg.step_net(), "stepwise", a.dataset_hash, cfg.test_fraction, cfg.step_train);
  a.step_hash = file_hash(cfg.step_net());
  require_file(cfg.region_file(), "region");
  a.region = region::load_region(cfg.region_file());
  a.region_hash = file_hash(cfg.region_file());
  if (a.region->dataset_hash != a.dataset_hash)
    throw ArtifactMismatch("region was built from a different dataset; rerun 'region'");
  return a;
}

uc::SolveOptions solve_options(const Config& cfg, const Artifacts& a, uc::Mode mode) { return options_for(cfg, a, mode); }

BuildOutcome run_build(const Config& cfg, uc::Mode mode) {
  ensure_out(cfg);
  const auto a = load_artifacts(cfg, mode);
  auto b = uc::build_model(a.uc, options_for(cfg, a, mode));
  BuildOutcome out;
  out.mps_path = mode_file(cfg, "model", mode, ".mps");
  milp::export_mps(b.model, out.mps_path);
  out.variables = b.model.num_vars();
  out.constraints = b.model.num_constraints();
  out.binaries = b.model.num_binaries();
  out.nonzeros = b.model.num_nonzeros();
  return out;
}

SolveOutcome run_solve(const Config& cfg, uc::Mode mode) {
  ensure_out(cfg);
  const auto a = load_artifacts(cfg, mode);
  const auto opts = options_for(cfg, a, mode);
  SolveOutcome out;
  out.schedule = uc::solve_case(a.uc, opts);
  if (out.schedule.periods.empty())
    throw InfeasibleError(std::string(uc::to_string(mode)) + " solve ended " + milp::to_string(out.schedule.status) +
                          " without a schedule");
  out.verification = uc::verify(a.uc, out.schedule, opts.freq, opts.region);

  auto js = json::parse(uc::schedule_json(a.uc, out.schedule));
  js["provenance"] = provenance(a, mode);
  write_file(mode_file(cfg, "schedule", mode, ".json"), js.dump(2) + "\n");
  write_file(mode_file(cfg, "schedule", mode, ".csv"), uc::schedule_csv(a.uc, out.schedule));
  write_file(mode_file(cfg, "verification", mode, ".json"), uc::verification_json(out.verification));

  std::string tr = "period,t,freq_hz,limit_hz\n";
  for (std::size_t t = 0; t < out.schedule.periods.size(); ++t) {
    const auto f = period_trace(out.schedule.periods[t].aggregate, a.dataset, cfg.sim_t_end, cfg.sim_step);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double time = static_cast<double>(i) * cfg.sim_step;
      tr += fmt::format("{},{},{},{}\n", t, fmt_double(time), csv_num(f[i]), fmt_double(a.dataset.limit.floor_at(time)));
    }
  }
  write_file(mode_file(cfg, "trace", mode, ".csv"), tr);
  return out;
}

void run_simulate(const Config& cfg) {
  ensure_out(cfg);
  const auto a = load_artifacts(cfg, uc::Mode::Fcuc);
  std::array<json, 2> sched;
  const std::array<uc::Mode, 2> modes{uc::Mode::Conventional, uc::Mode::Fcuc};
  for (std::size_t k = 0; k < 2; ++k) {
    const auto path = mode_file(cfg, "schedule", modes[k], ".json");
    require_file(path, std::string("solve --mode ") + uc::to_string(modes[k]));
    sched[k] = json::parse(read_file(path));
    if (sched[k].value("provenance", json::object()) != provenance(a, modes[k]))
      throw ArtifactMismatch(path + " was solved from other inputs; rerun 'solve --mode " +
                             uc::to_string(modes[k]) + "'");
  }
  const auto periods = sched[0].at("periods").size();
  if (sched[1].at("periods").size() != periods) throw ArtifactMismatch("schedules cover different horizons");
  auto agg = [](const json& p) {
    const auto& g = p.at("aggregate");
    return std::array<double, 4>{g.at("M").get<double>(), g.at("D").get<double>(), g.at("Rg").get<double>(),
                                 g.at("Fg").get<double>()};
  };
  std::string out = "period,t,conventional_hz,fcuc_hz,limit_hz\n";
  for (std::size_t t = 0; t < periods; ++t) {
    const auto fc = period_trace(agg(sched[0]["periods"][t]), a.dataset, cfg.sim_t_end, cfg.sim_step);
    const auto ff = period_trace(agg(sched[1]["periods"][t]), a.dataset, cfg.sim_t_end, cfg.sim_step);
    for (std::size_t i = 0; i < fc.size(); ++i) {
      const double time = static_cast<double>(i) * cfg.sim_step;
      out += fmt::format("{},{},{},{},{}\n", t, fmt_double(time), csv_num(fc[i]), csv_num(ff[i]),
                         fmt_double(a.dataset.limit.floor_at(time)));
    }
  }
  write_file(cfg.path("trace.csv"), out);
}

std::vector<EvalRow> run_eval(const Config& cfg) {
  ensure_out(cfg);
  const auto ds = current_dataset(cfg);
  const auto dh = sampler::dataset_hash(cfg.dataset_sidecar());
  const auto nadir = checked_network(cfg.nadir_net(), "nadir", dh, cfg.test_fraction, cfg.nadir_train);
  const auto step = checked_network(cfg.step_net(), "stepwise", dh, cfg.test_fraction, cfg.step_train);
  const auto d = split_data(ds, cfg.test_fraction, cfg.seed);

  auto ablation_cfg = cfg.nadir_train;
  ablation_cfg.loss.overshoot = 0.0;
  const auto ablation = csnn::train(d.x_train, d.nadir_train, ablation_cfg).net;

  std::vector<EvalRow> rows;
  auto add = [&](const std::string& method, const SplitMetrics& m) {
    rows.push_back({method, "train", m.train});
    if (!d.x_test.empty()) rows.push_back({method, "test", m.test});
  };
  add("nadir", split_metrics(nadir, d.x_train, d.nadir_train, d.x_test, d.nadir_test));
  add("nadir_no_overshoot", split_metrics(ablation, d.x_train, d.nadir_train, d.x_test, d.nadir_test));
  add("stepwise", split_metrics(step, d.x_train, d.step_train, d.x_test, d.step_test));
  write_file(cfg.path("eval.csv"), eval_csv(rows));
  write_file(cfg.path("eval.txt"), eval_table(rows));
  return rows;
}

std::string eval_csv(const std::vector<EvalRow>& rows) {
  std::string s = "method,split,mse,mape,negativeness\n";
  for (const auto& r : rows)
    s += fmt::format("{},{},{},{},{}\n", r.method, r.split, fmt_double(r.m.mse), fmt_double(r.m.mape),
                     fmt_double(r.m.negativeness));
  return s;
}

std::string eval_table(const std::vector<EvalRow>& rows) {
  std::size_t w = 6;
  for (const auto& r : rows) w = std::max(w, r.method.size());
  std::string s = fmt::format("{:<{}}  {:<5}  {:>12}  {:>9}  {:>12}\n", "method", w, "split", "MSE [Hz^2]", "MAPE [%]",
                              "negativeness");
  for (const auto& r : rows)
    s += fmt::format("{:<{}}  {:<5}  {:>12.4e}  {:>9.4f}  {:>12.4f}\n", r.method, w, r.split, r.m.mse, 100.0 * r.m.mape,
                     r.m.negativeness);
  return s;
}

}  // namespace fcuc::pipeline
