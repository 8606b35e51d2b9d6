#include "fcuc/csnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "fcuc/util.hpp"

namespace fcuc::csnn {

using nlohmann::json;

std::size_t Layer::active() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

std::vector<int> Network::sizes() const {
  std::vector<int> s{layers.front().in};
  for (const auto& l : layers) s.push_back(l.out);
  return s;
}

std::vector<std::vector<double>> Network::preactivations(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != inputs()) throw std::invalid_argument("network input has the wrong dimension");
  std::vector<std::vector<double>> z;
  std::vector<double> a = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    std::vector<double> zl(static_cast<std::size_t>(L.out));
    for (int i = 0; i < L.out; ++i) {
      double s = L.b[static_cast<std::size_t>(i)];
      const double* row = &L.w[static_cast<std::size_t>(i * L.in)];
      for (int j = 0; j < L.in; ++j) s += row[j] * a[static_cast<std::size_t>(j)];
      zl[static_cast<std::size_t>(i)] = s;
    }
    a = zl;
    if (l + 1 < layers.size())
      for (auto& v : a) v = v > 0.0 ? v : 0.0;
    z.push_back(std::move(zl));
  }
  return z;
}

std::vector<double> Network::forward(const std::vector<double>& x) const { return preactivations(x).back(); }

std::size_t Network::num_params() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.w.size() + l.b.size();
  return n;
}

std::size_t Network::active_params() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.active() + l.b.size();
  return n;
}

std::size_t active_target(std::size_t n, double sparsity) {
  const auto a = static_cast<std::size_t>(std::llround((1.0 - sparsity) * static_cast<double>(n)));
  return std::clamp<std::size_t>(a, 1, n);
}

Network make_network(const std::vector<int>& sizes, double sparsity, std::uint64_t seed, bool sparse_output) {
  if (sizes.size() < 2) throw std::invalid_argument("network needs at least an input and an output size");
  for (int s : sizes)
    if (s < 1) throw std::invalid_argument("layer sizes must be positive");
  if (!(sparsity >= 0.0 && sparsity < 1.0)) throw std::invalid_argument("sparsity must be in [0, 1)");
  Network net;
  auto rng = Rng::substream(seed, 1);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    Layer L;
    L.in = sizes[l];
    L.out = sizes[l + 1];
    const std::size_t n = static_cast<std::size_t>(L.in) * static_cast<std::size_t>(L.out);
    const double r = 1.0 / std::sqrt(static_cast<double>(L.in));
    L.w.resize(n);
    L.b.resize(static_cast<std::size_t>(L.out));
    for (auto& v : L.w) v = rng.uniform(-r, r);
    for (auto& v : L.b) v = rng.uniform(-r, r);
    L.mask.assign(n, 1);
    const bool is_output = l + 2 == sizes.size();
    if (l > 0 && sparsity > 0.0 && (!is_output || sparse_output)) {
      L.sparsity = sparsity;
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      rng.shuffle(idx);
      const auto keep = active_target(n, sparsity);
      for (std::size_t q = keep; q < n; ++q) {
        L.mask[idx[q]] = 0;
        L.w[idx[q]] = 0.0;
      }
    }
    net.layers.push_back(std::move(L));
  }
  return net;
}

LossValue conservative_loss(const std::vector<double>& pred, const std::vector<double>& target, const LossWeights& lw) {
  if (pred.size() != target.size()) throw std::invalid_argument("loss: length mismatch");
  LossValue out;
  out.grad.resize(pred.size());
  if (pred.empty()) return out;
  const double inv = 1.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    out.value += lw.squared * e * e + lw.overshoot * std::max(e, 0.0);
    out.grad[i] = (2.0 * lw.squared * e + (e > 0.0 ? lw.overshoot : 0.0)) * inv;
  }
  out.value *= inv;
  return out;
}

Gradients backward(const Network& net, const std::vector<std::vector<double>>& x,
                   const std::vector<std::vector<double>>& y, const LossWeights& lw, const DropoutMasks* dropout) {
  if (x.size() != y.size() || x.empty()) throw std::invalid_argument("backward: batch shapes disagree");
  const std::size_t nl = net.layers.size();
  const std::size_t no = static_cast<std::size_t>(net.outputs());
  Gradients g;
  g.w.resize(nl);
  g.b.resize(nl);
  for (std::size_t l = 0; l < nl; ++l) {
    g.w[l].assign(net.layers[l].w.size(), 0.0);
    g.b[l].assign(net.layers[l].b.size(), 0.0);
  }
  const double inv = 1.0 / static_cast<double>(x.size() * no);
  std::vector<std::vector<double>> act(nl + 1), pre(nl);
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (y[s].size() != no || static_cast<int>(x[s].size()) != net.inputs())
      throw std::invalid_argument("backward: row shape disagrees with the network");
    act[0] = x[s];
    for (std::size_t l = 0; l < nl; ++l) {
      const auto& L = net.layers[l];
      pre[l].assign(static_cast<std::size_t>(L.out), 0.0);
      for (int i = 0; i < L.out; ++i) {
        double z = L.b[static_cast<std::size_t>(i)];
        const double* row = &L.w[static_cast<std::size_t>(i * L.in)];
        for (int j = 0; j < L.in; ++j) z += row[j] * act[l][static_cast<std::size_t>(j)];
        pre[l][static_cast<std::size_t>(i)] = z;
      }
      act[l + 1] = pre[l];
      if (l + 1 < nl) {
        for (std::size_t i = 0; i < act[l + 1].size(); ++i) {
          double a = pre[l][i] > 0.0 ? pre[l][i] : 0.0;
          if (dropout) a *= (*dropout)[s][l][i];
          act[l + 1][i] = a;
        }
      }
    }
    std::vector<double> delta(no);
    for (std::size_t i = 0; i < no; ++i) {
      const double e = act[nl][i] - y[s][i];
      g.loss += (lw.squared * e * e + lw.overshoot * std::max(e, 0.0)) * inv;
      delta[i] = (2.0 * lw.squared * e + (e > 0.0 ? lw.overshoot : 0.0)) * inv;
    }
    for (std::size_t l = nl; l-- > 0;) {
      const auto& L = net.layers[l];
      auto& gw = g.w[l];
      for (int i = 0; i < L.out; ++i) {
        const double d = delta[static_cast<std::size_t>(i)];
        g.b[l][static_cast<std::size_t>(i)] += d;
        if (d == 0.0) continue;
        double* row = &gw[static_cast<std::size_t>(i * L.in)];
        for (int j = 0; j < L.in; ++j) row[j] += d * act[l][static_cast<std::size_t>(j)];
      }
      if (l == 0) break;
      std::vector<double> prev(static_cast<std::size_t>(L.in), 0.0);
      for (int i = 0; i < L.out; ++i) {
        const double d = delta[static_cast<std::size_t>(i)];
        if (d == 0.0) continue;
        const double* row = &L.w[static_cast<std::size_t>(i * L.in)];
        for (int j = 0; j < L.in; ++j) prev[static_cast<std::size_t>(j)] += d * row[j];
      }
      for (int j = 0; j < L.in; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        double gate = pre[l - 1][uj] > 0.0 ? 1.0 : 0.0;
        if (dropout) gate *= (*dropout)[s][l - 1][uj];
        prev[uj] *= gate;
      }
      delta = std::move(prev);
    }
  }
  return g;
}

double f_decay(double t, double alpha, double t_end) {
  if (!(t_end > 0.0) || t < 0.0 || t > t_end) throw std::invalid_argument("f_decay: t must lie in [0, T_end]");
  return alpha / 2.0 * (1.0 + std::cos(t * 3.14159265358979323846 / t_end));
}

std::vector<std::size_t> arg_top_k(const std::vector<double>& values, std::size_t k) {
  if (k > values.size()) throw std::invalid_argument("arg_top_k: k exceeds the length");
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto better = [&](std::size_t a, std::size_t b) { return values[a] > values[b] || (values[a] == values[b] && a < b); };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), better);
  idx.resize(k);
  return idx;
}

std::vector<std::size_t> sparse_update(Network& net, const Gradients& g, long t, double alpha, long t_end) {
  std::vector<std::size_t> ks(net.layers.size(), 0);
  const double frac = f_decay(static_cast<double>(t), alpha, static_cast<double>(t_end));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& L = net.layers[l];
    if (!L.is_sparse()) continue;
    const std::size_t n = L.w.size();
    std::vector<std::size_t> on, off;
    for (std::size_t q = 0; q < n; ++q) (L.mask[q] ? on : off).push_back(q);
    auto k = static_cast<std::size_t>(std::floor(frac * (1.0 - L.sparsity) * static_cast<double>(n)));
    k = std::min(k, on.size());
    ks[l] = k;
    if (k == 0) continue;
    std::vector<double> score(on.size());
    for (std::size_t q = 0; q < on.size(); ++q) score[q] = -std::abs(L.w[on[q]]);
    for (auto r : arg_top_k(score, k)) {
      L.mask[on[r]] = 0;
      L.w[on[r]] = 0.0;
    }
    off.clear();
    for (std::size_t q = 0; q < n; ++q)
      if (!L.mask[q]) off.push_back(q);
    score.resize(off.size());
    for (std::size_t q = 0; q < off.size(); ++q) score[q] = std::abs(g.w[l][off[q]]);
    for (auto r : arg_top_k(score, k)) {
      L.mask[off[r]] = 1;
      L.w[off[r]] = 0.0;
    }
  }
  return ks;
}

void TrainConfig::validate() const {
  if (hidden.empty()) throw std::invalid_argument("train: need at least one hidden layer");
  if (batch_size < 1 || epochs < 1) throw std::invalid_argument("train: batch size and epochs must be positive");
  if (update_interval < 1) throw std::invalid_argument("train: update interval must be at least 1");
  if (!(drop_fraction > 0.0 && drop_fraction < 1.0)) throw std::invalid_argument("train: drop fraction must be in (0, 1)");
  if (!(update_end > 0.0 && update_end <= 1.0)) throw std::invalid_argument("train: update end must be in (0, 1]");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("train: dropout must be in [0, 1)");
  if (sparse && !(sparsity > 0.0 && sparsity < 1.0)) throw std::invalid_argument("train: sparsity must be in (0, 1)");
  if (!(learning_rate > 0.0) || !(final_learning_rate > 0.0))
    throw std::invalid_argument("train: learning rates must be positive");
}

long TrainConfig::total_steps(std::size_t rows) const {
  const long per_epoch = static_cast<long>((rows + static_cast<std::size_t>(batch_size) - 1) / static_cast<std::size_t>(batch_size));
  return per_epoch * epochs;
}

long TrainConfig::end_step(std::size_t rows) const {
  return std::max(1L, static_cast<long>(std::floor(update_end * static_cast<double>(total_steps(rows)))));
}

namespace {

struct Moments {
  std::vector<std::vector<double>> mw, vw, mb, vb;
};

}  // namespace

TrainResult train(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (x.empty() || x.size() != y.size()) throw std::invalid_argument("train: empty or mismatched dataset");
  const std::size_t no = y.front().size();
  std::vector<int> sizes{static_cast<int>(x.front().size())};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(static_cast<int>(no));

  TrainResult res;
  auto& net = res.net;
  net = make_network(sizes, cfg.sparse ? cfg.sparsity : 0.0, cfg.seed, cfg.sparse_output);
  for (std::size_t i = 0; i < no; ++i) {
    double m = 0.0;
    for (const auto& r : y) m += r[i];
    net.layers.back().b[i] = m / static_cast<double>(y.size());
  }

  Moments mo;
  for (const auto& L : net.layers) {
    mo.mw.emplace_back(L.w.size(), 0.0);
    mo.vw.emplace_back(L.w.size(), 0.0);
    mo.mb.emplace_back(L.b.size(), 0.0);
    mo.vb.emplace_back(L.b.size(), 0.0);
  }
  auto shuffle_rng = Rng::substream(cfg.seed, 2);
  auto drop_rng = Rng::substream(cfg.seed, 3);
  const long t_end = cfg.end_step(x.size());
  const long total = cfg.total_steps(x.size());
  const double keep = 1.0 - cfg.dropout;

  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  long t = 0, adam_t = 0;
  std::vector<std::vector<double>> bx, by;
  DropoutMasks dm;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    long batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      bx.clear();
      by.clear();
      for (std::size_t q = start; q < end; ++q) {
        bx.push_back(x[order[q]]);
        by.push_back(y[order[q]]);
      }
      const DropoutMasks* dp = nullptr;
      if (cfg.dropout > 0.0) {
        dm.assign(bx.size(), {});
        for (auto& sample : dm) {
          sample.resize(net.layers.size() - 1);
          for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) {
            sample[l].resize(static_cast<std::size_t>(net.layers[l].out));
            for (auto& v : sample[l]) v = drop_rng.uniform01() < cfg.dropout ? 0.0 : 1.0 / keep;
          }
        }
        dp = &dm;
      }
      ++t;
      const auto g = backward(net, bx, by, cfg.loss, dp);
      if (!std::isfinite(g.loss)) throw std::runtime_error("train: loss became non-finite at step " + std::to_string(t));
      loss_sum += g.loss;
      ++batches;

      if (cfg.sparse && t % cfg.update_interval == 0 && t <= t_end) {
        UpdateRecord rec;
        rec.step = t;
        rec.k = sparse_update(net, g, t, cfg.drop_fraction, t_end);
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
          rec.active.push_back(net.layers[l].active());
          for (std::size_t q = 0; q < net.layers[l].w.size(); ++q)
            if (!net.layers[l].mask[q] || net.layers[l].w[q] == 0.0) mo.mw[l][q] = mo.vw[l][q] = 0.0;
        }
        res.updates.push_back(std::move(rec));
        continue;
      }

      ++adam_t;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam_t));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam_t));
      const double lr = cfg.final_learning_rate +
                        0.5 * (cfg.learning_rate - cfg.final_learning_rate) *
                            (1.0 + std::cos(3.14159265358979323846 * static_cast<double>(t - 1) / static_cast<double>(total)));
      auto step = [&](double& p, double gr, double& m, double& v) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * gr;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * gr * gr;
        p -= lr * (m / c1) / (std::sqrt(v / c2) + cfg.epsilon);
      };
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto& L = net.layers[l];
        for (std::size_t q = 0; q < L.w.size(); ++q)
          if (L.mask[q]) step(L.w[q], g.w[l][q], mo.mw[l][q], mo.vw[l][q]);
        for (std::size_t q = 0; q < L.b.size(); ++q) step(L.b[q], g.b[l][q], mo.mb[l][q], mo.vb[l][q]);
      }
    }
    const auto m = evaluate(net, x, y);
    res.history.push_back({epoch, loss_sum / static_cast<double>(batches), m.mape, m.negativeness});
  }
  res.steps = t;
  return res;
}

Metrics metrics(const std::vector<double>& pred, const std::vector<double>& target) {
  if (pred.size() != target.size() || pred.empty()) throw std::invalid_argument("metrics: need equal nonzero lengths");
  Metrics m;
  std::size_t neg = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (target[i] == 0.0) throw std::domain_error("metrics: MAPE undefined for a zero target");
    const double e = pred[i] - target[i];
    m.mse += e * e;
    m.mape += std::abs(e / target[i]);
    neg += e <= 0.0;
  }
  const auto n = static_cast<double>(pred.size());
  m.mse /= n;
  m.mape /= n;
  m.negativeness = static_cast<double>(neg) / n;
  return m;
}

Metrics evaluate(const Network& net, const std::vector<std::vector<double>>& x,
                 const std::vector<std::vector<double>>& y) {
  std::vector<double> p, t;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto o = net.forward(x[i]);
    p.insert(p.end(), o.begin(), o.end());
    t.insert(t.end(), y[i].begin(), y[i].end());
  }
  return metrics(p, t);
}

std::string to_json(const Network& net) {
  json j;
  j["format"] = "fcuc-network";
  j["version"] = 1;
  j["sizes"] = net.sizes();
  j["target"] = net.target;
  j["checkpoints"] = net.checkpoints;
  j["input_normalization"] = net.input_norm;
  j["dataset_hash"] = net.dataset_hash;
  j["train_hash"] = net.train_hash;
  j["layers"] = json::array();
  for (const auto& L : net.layers)
    j["layers"].push_back({{"in", L.in}, {"out", L.out}, {"sparsity", L.sparsity}, {"weights", L.w},
                           {"bias", L.b}, {"mask", L.mask}});
  return j.dump() + "\n";
}

Network from_json(const std::string& text) {
  const auto j = json::parse(text);
  if (j.value("format", "") != "fcuc-network") throw ArtifactMismatch("not a network file");
  Network net;
  net.target = j.at("target").get<std::string>();
  net.checkpoints = j.at("checkpoints").get<std::vector<double>>();
  net.input_norm = j.at("input_normalization").get<std::array<double, 4>>();
  net.dataset_hash = j.at("dataset_hash").get<std::string>();
  net.train_hash = j.at("train_hash").get<std::string>();
  for (const auto& l : j.at("layers")) {
    Layer L;
    L.in = l.at("in").get<int>();
    L.out = l.at("out").get<int>();
    L.sparsity = l.at("sparsity").get<double>();
    L.w = l.at("weights").get<std::vector<double>>();
    L.b = l.at("bias").get<std::vector<double>>();
    L.mask = l.at("mask").get<std::vector<std::uint8_t>>();
    const auto n = static_cast<std::size_t>(L.in) * static_cast<std::size_t>(L.out);
    if (L.w.size() != n || L.mask.size() != n || L.b.size() != static_cast<std::size_t>(L.out))
      throw ArtifactMismatch("network layer arrays have the wrong size");
    if (!net.layers.empty() && net.layers.back().out != L.in) throw ArtifactMismatch("network layers do not chain");
    net.layers.push_back(std::move(L));
  }
  if (net.layers.empty() || net.sizes() != j.at("sizes").get<std::vector<int>>())
    throw ArtifactMismatch("network sizes disagree with the layers");
  return net;
}

void save_network(const Network& net, const std::string& path) { write_file(path, to_json(net)); }

Network load_network(const std::string& path) { return from_json(read_file(path)); }

}  // namespace fcuc::csnn
