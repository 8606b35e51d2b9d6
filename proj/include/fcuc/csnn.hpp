#pragma once

// Feedforward ReLU network with a conservative loss and drop/grow sparse
// training.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace fcuc::csnn {

struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> w;          // out x in, row-major
  std::vector<double> b;          // out
  std::vector<std::uint8_t> mask; // out x in; 1 = active
  double sparsity = 0.0;          // 0 for dense layers

  [[nodiscard]] bool is_sparse() const { return sparsity > 0.0; }
  [[nodiscard]] std::size_t active() const;
  [[nodiscard]] double weight(int i, int j) const { return w[static_cast<std::size_t>(i * in + j)]; }
};

struct Network {
  std::vector<Layer> layers;  // hidden layers use ReLU, the last is affine
  std::array<double, 4> input_norm{1.0, 1.0, 1.0, 1.0};
  std::string target;              // "nadir" or "stepwise"
  std::vector<double> checkpoints; // seconds, one per output of a stepwise net
  std::string dataset_hash;
  std::string train_hash;

  [[nodiscard]] std::vector<int> sizes() const;
  [[nodiscard]] int inputs() const { return layers.front().in; }
  [[nodiscard]] int outputs() const { return layers.back().out; }
  [[nodiscard]] std::vector<double> forward(const std::vector<double>& x) const;
  // Pre-activations per layer (hidden and output).
  [[nodiscard]] std::vector<std::vector<double>> preactivations(const std::vector<double>& x) const;
  [[nodiscard]] std::size_t num_params() const;
  [[nodiscard]] std::size_t active_params() const;
};

// Active weight count for a sparse layer of n weights.
[[nodiscard]] std::size_t active_target(std::size_t n, double sparsity);

// Uniform fan-in initialisation; the first layer is dense, hidden-to-hidden
// layers (and the output layer when sparse_output) get `sparsity` with a
// uniformly random mask of fixed size.
[[nodiscard]] Network make_network(const std::vector<int>& sizes, double sparsity, std::uint64_t seed,
                                   bool sparse_output = false);

struct LossWeights {
  double squared = 0.5;
  double overshoot = 1.0;
};

struct LossValue {
  double value = 0.0;
  std::vector<double> grad;  // d loss / d pred
};

// Mean over elements of w_sq (p - y)^2 + w_over max(p - y, 0).
[[nodiscard]] LossValue conservative_loss(const std::vector<double>& pred, const std::vector<double>& target,
                                          const LossWeights& lw = {});

struct Gradients {
  std::vector<std::vector<double>> w;  // raw, including masked positions
  std::vector<std::vector<double>> b;
  double loss = 0.0;
};

// Per-sample hidden-unit keep masks with inverted scaling; empty means no dropout.
using DropoutMasks = std::vector<std::vector<std::vector<double>>>;  // [sample][hidden layer][unit]

[[nodiscard]] Gradients backward(const Network& net, const std::vector<std::vector<double>>& x,
                                 const std::vector<std::vector<double>>& y, const LossWeights& lw = {},
                                 const DropoutMasks* dropout = nullptr);

[[nodiscard]] double f_decay(double t, double alpha, double t_end);
// Indices of the k largest values, ties to the lower index, in rank order.
[[nodiscard]] std::vector<std::size_t> arg_top_k(const std::vector<double>& values, std::size_t k);

struct TrainConfig {
  std::vector<int> hidden{16, 16};
  bool sparse = true;
  double sparsity = 0.87;
  bool sparse_output = false;
  double learning_rate = 1e-3;
  double final_learning_rate = 1e-5;  // cosine schedule from learning_rate
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int epochs = 1000;
  long update_interval = 100;   // steps between topology updates
  double update_end = 0.75;     // fraction of total steps with topology updates
  double drop_fraction = 0.3;   // initial drop fraction
  double dropout = 0.05;
  LossWeights loss;
  std::uint64_t seed = 1;

  void validate() const;
  [[nodiscard]] long total_steps(std::size_t rows) const;
  [[nodiscard]] long end_step(std::size_t rows) const;
};

struct UpdateRecord {
  long step = 0;
  std::vector<std::size_t> k;       // per layer
  std::vector<std::size_t> active;  // per layer after the update
};

// One drop/grow round. Returns the per-layer k.
std::vector<std::size_t> sparse_update(Network& net, const Gradients& g, long t, double alpha, long t_end);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double mape = 0.0;
  double negativeness = 0.0;
};

struct TrainResult {
  Network net;
  std::vector<EpochRecord> history;
  std::vector<UpdateRecord> updates;
  long steps = 0;
};

// x are normalised features, y the targets (one vector per row).
[[nodiscard]] TrainResult train(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y,
                                const TrainConfig& cfg);

struct Metrics {
  double mse = 0.0;
  double mape = 0.0;          // fraction
  double negativeness = 0.0;  // fraction of pred - target <= 0
};
[[nodiscard]] Metrics metrics(const std::vector<double>& pred, const std::vector<double>& target);
[[nodiscard]] Metrics evaluate(const Network& net, const std::vector<std::vector<double>>& x,
                               const std::vector<std::vector<double>>& y);

[[nodiscard]] std::string to_json(const Network& net);
[[nodiscard]] Network from_json(const std::string& text);
void save_network(const Network& net, const std::string& path);
[[nodiscard]] Network load_network(const std::string& path);

}  // namespace fcuc::csnn
