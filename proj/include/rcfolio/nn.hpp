#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rcfolio/types.hpp"

namespace rcfolio::nn {

// Output transform of the last layer.
enum class Head { Softmax, Softplus, Linear };

std::string_view to_string(Head head);
std::optional<Head> parse_head(std::string_view text);

/// Fully connected network shape: sizes = [input, hidden..., output], ReLU on
/// every hidden layer and `head` on the output.
struct LayerSpec {
  std::vector<std::size_t> sizes;
  Head head = Head::Softmax;

  void validate() const;
  std::size_t input_size() const { return sizes.front(); }
  std::size_t output_size() const { return sizes.back(); }
  std::size_t num_layers() const { return sizes.size() - 1; }
  std::size_t num_params() const;

  bool operator==(const LayerSpec&) const = default;
};

// Flat weights and biases. Layer l occupies sizes[l+1] * sizes[l] row-major
// weights followed by sizes[l+1] biases.
using ParamVector = Vector;
using Gradient = Vector;

struct Tape {
  std::vector<Vector> inputs;   // input of each layer
  std::vector<Vector> preacts;  // pre-activation of each layer
  Vector output;
};

struct ForwardResult {
  Vector output;
  Tape tape;
};

ParamVector init_params(const LayerSpec& spec, std::uint64_t seed);

ForwardResult forward(const ParamVector& params, const LayerSpec& spec, const Vector& input);

// forward() without keeping the tape.
Vector predict(const ParamVector& params, const LayerSpec& spec, const Vector& input);

// Gradient of <output_grad, output> with respect to params.
Gradient backward(const ParamVector& params, const LayerSpec& spec, const Tape& tape,
                  const Vector& output_grad);

Vector softmax(const Vector& logits);
double softplus(double x);
double sigmoid(double x);

struct ScalarEval {
  double value = 0.0;
  Vector output_grad;  // d value / d output
};
using ScalarFn = std::function<ScalarEval(const Vector& output)>;

// Max over parameters of |analytic - central difference| / max(|analytic|, |cd|, 1e-8)
// for scalar_fn(forward(params, input)).
double grad_check(const ParamVector& params, const LayerSpec& spec, const Vector& input,
                  const ScalarFn& scalar_fn, double step = 1e-5);

// Same error measure for an arbitrary objective f at point x.
double max_relative_error(const Vector& analytic, const std::function<double(const Vector&)>& f,
                          const Vector& x, double step = 1e-5);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Vector first_moment;
  Vector second_moment;
  long step = 0;
  AdamConfig config;

  static AdamState zeros(Eigen::Index size, const AdamConfig& config = {});
};

// One bias-corrected Adam update. With maximize the gradient is ascended.
std::pair<ParamVector, AdamState> adam_step(const ParamVector& params, const Gradient& grad,
                                            const AdamState& state, bool maximize);

struct Checkpoint {
  LayerSpec spec;
  ParamVector params;
};

// Header `layers <sizes...> head <head>`, then one parameter per line.
void write_checkpoint(const std::string& path, const LayerSpec& spec, const ParamVector& params);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace rcfolio::nn
