#pragma once

// Big-M mixed-integer encoding of a trained ReLU network.

#include <string>
#include <vector>

#include "fcuc/csnn.hpp"
#include "fcuc/milp/model.hpp"

namespace fcuc::encode {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct NeuronBounds {
  std::vector<std::vector<Interval>> pre;  // pre-activation bounds per layer, output layer included
};

// Interval propagation from an input box.
[[nodiscard]] NeuronBounds propagate_bounds(const csnn::Network& net, const std::vector<Interval>& input_box);

struct EncodeOptions {
  bool presolve = true;  // fix stable-sign neurons and drop neurons with no path to an output
  std::string prefix = "nn";
};

struct NnHandles {
  std::vector<std::vector<milp::Var>> post;    // hidden post-activation vars; invalid when not materialised
  std::vector<std::vector<milp::Var>> active;  // binary indicators; invalid when fixed by presolve
  std::size_t binaries = 0;
  std::size_t fixed_inactive = 0;
  std::size_t fixed_active = 0;
  std::size_t unreachable = 0;
};

// Adds the constraints linking x_vars (normalised inputs) to out_vars.
// Pre-activations are kept as expressions rather than separate variables.
// Throws milp::ModelError on a shape mismatch.
NnHandles emit_nn_constraints(const csnn::Network& net, const NeuronBounds& bounds, milp::MilpModel& model,
                              const std::vector<milp::Var>& x_vars, const std::vector<milp::Var>& out_vars,
                              const EncodeOptions& opts = {});

}  // namespace fcuc::encode
