#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rcfolio/nn.hpp"
#include "test_util.hpp"

using namespace rcfolio;
using namespace rcfolio::nn;

namespace {

Vector random_vector(Eigen::Index n, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Vector v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

// 0.5 * |y - target|^2
ScalarFn quadratic(const Vector& target) {
  return [target](const Vector& y) { return ScalarEval{0.5 * (y - target).squaredNorm(), y - target}; };
}

// -log y[label] for a softmax output y
ScalarFn cross_entropy(Eigen::Index label) {
  return [label](const Vector& y) {
    Vector g = Vector::Zero(y.size());
    g[label] = -1.0 / y[label];
    return ScalarEval{-std::log(y[label]), g};
  };
}

}  // namespace

TEST(LayerSpec, ParamCountAndZeroBiases) {
  LayerSpec spec{{4, 3}, Head::Softmax};
  EXPECT_EQ(spec.num_params(), 15u);
  auto p = init_params(spec, 9);
  ASSERT_EQ(p.size(), 15);
  EXPECT_TRUE((p.tail(3).array() == 0.0).all());
  EXPECT_EQ(p, init_params(spec, 9));
  EXPECT_NE(p, init_params(spec, 10));

  LayerSpec deep{{5, 4, 3, 2}, Head::Linear};
  EXPECT_EQ(deep.num_params(), 6u * 4 + 5 * 3 + 4 * 2);
}

TEST(LayerSpec, Validation) {
  EXPECT_ERRC((LayerSpec{{4}, Head::Softmax}.validate()), InvalidSpec);
  EXPECT_ERRC((LayerSpec{{4, 0, 2}, Head::Softmax}.validate()), InvalidSpec);
  EXPECT_EQ(parse_head("softplus"), Head::Softplus);
  EXPECT_FALSE(parse_head("tanh").has_value());
}

TEST(Forward, ZeroWeightsGiveUniform) {
  LayerSpec spec{{3, 5, 4}, Head::Softmax};
  Vector p = Vector::Zero(static_cast<Eigen::Index>(spec.num_params()));
  auto y = predict(p, spec, Vector::Ones(3));
  for (auto v : y) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Forward, SoftmaxHandValue) {
  Vector logits(2);
  logits << std::log(2.0), 0.0;
  auto y = softmax(logits);
  EXPECT_NEAR(y[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(y[1], 1.0 / 3.0, 1e-15);
}

TEST(Forward, SoftmaxStableForLargeLogits) {
  Vector logits(3);
  logits << 1e308, -1e308, 800.0;
  auto y = softmax(logits);
  EXPECT_TRUE(on_simplex(y));
  EXPECT_EQ(y[0], 1.0);
}

TEST(Forward, OutputsOnSimplexAndPure) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    LayerSpec spec{{1 + rng() % 6, 1 + rng() % 8, 2 + rng() % 5}, Head::Softmax};
    auto p = random_vector(static_cast<Eigen::Index>(spec.num_params()), rng, 3.0);
    auto x = random_vector(static_cast<Eigen::Index>(spec.input_size()), rng, 10.0);
    auto a = forward(p, spec, x);
    EXPECT_TRUE(on_simplex(a.output));
    EXPECT_EQ(a.output, forward(p, spec, x).output);
    EXPECT_EQ(a.output, predict(p, spec, x));
  }
}

TEST(Forward, Heads) {
  LayerSpec spec{{1, 2}, Head::Softplus};
  Vector p(4);
  p << 1.0, -1.0, 0.0, 0.0;  // weights, then biases
  Vector x(1);
  x << 2.0;
  auto y = predict(p, spec, x);
  EXPECT_NEAR(y[0], std::log1p(std::exp(2.0)), 1e-15);
  EXPECT_NEAR(y[1], std::log1p(std::exp(-2.0)), 1e-15);
  spec.head = Head::Linear;
  y = predict(p, spec, x);
  EXPECT_EQ(y[0], 2.0);
  EXPECT_EQ(y[1], -2.0);
  EXPECT_NEAR(softplus(1000.0), 1000.0, 1e-12);
  EXPECT_NEAR(sigmoid(0.0), 0.5, 1e-15);
}

TEST(Forward, DimensionMismatch) {
  LayerSpec spec{{3, 2}, Head::Softmax};
  auto p = init_params(spec, 0);
  EXPECT_ERRC(forward(p, spec, Vector::Ones(4)), DimensionMismatch);
  EXPECT_ERRC(forward(Vector::Ones(3), spec, Vector::Ones(3)), DimensionMismatch);
}

TEST(Backward, ZeroOutputGradGivesZeroGradient) {
  LayerSpec spec{{3, 4, 2}, Head::Softmax};
  auto p = init_params(spec, 3);
  auto fr = forward(p, spec, Vector::Ones(3));
  auto g = backward(p, spec, fr.tape, Vector::Zero(2));
  EXPECT_EQ(g.size(), p.size());
  EXPECT_TRUE((g.array() == 0.0).all());
}

TEST(Backward, LinearLayerGradientIsInput) {
  LayerSpec spec{{3, 1}, Head::Linear};
  Vector p(4);
  p << 0.3, -0.2, 0.7, 0.1;
  Vector x(3);
  x << 1.5, -2.0, 0.25;
  auto fr = forward(p, spec, x);
  auto g = backward(p, spec, fr.tape, Vector::Ones(1));
  EXPECT_EQ(g.head(3), x);
  EXPECT_EQ(g[3], 1.0);
}

TEST(Backward, TapeMismatch) {
  LayerSpec spec{{3, 4, 2}, Head::Softmax};
  LayerSpec other{{3, 5, 2}, Head::Softmax};
  auto p = init_params(spec, 3);
  auto fr = forward(init_params(other, 3), other, Vector::Ones(3));
  EXPECT_ERRC(backward(p, spec, fr.tape, Vector::Ones(2)), TapeMismatch);
  auto good = forward(p, spec, Vector::Ones(3));
  EXPECT_ERRC(backward(p, spec, good.tape, Vector::Ones(3)), DimensionMismatch);
}

TEST(GradCheck, QuadraticOnThreeParameterNet) {
  LayerSpec spec{{2, 1}, Head::Linear};
  Vector p(3);
  p << 0.4, -0.7, 0.2;
  Vector x(2);
  x << 1.3, 0.6;
  EXPECT_LT(grad_check(p, spec, x, quadratic(Vector::Constant(1, 2.0))), 1e-6);
}

TEST(GradCheck, SoftmaxCrossEntropy) {
  std::mt19937_64 rng(4);
  LayerSpec spec{{4, 6, 3}, Head::Softmax};
  auto p = random_vector(static_cast<Eigen::Index>(spec.num_params()), rng, 0.5);
  auto x = random_vector(4, rng);
  EXPECT_LT(grad_check(p, spec, x, cross_entropy(1)), 1e-4);
}

TEST(GradCheck, ConstantFunctionBothZero) {
  LayerSpec spec{{3, 4, 2}, Head::Softplus};
  auto p = init_params(spec, 1);
  ScalarFn constant = [](const Vector& y) { return ScalarEval{7.0, Vector::Zero(y.size())}; };
  EXPECT_EQ(grad_check(p, spec, Vector::Ones(3), constant), 0.0);
}

// Backward agrees with central differences on random small nets, away from
// ReLU kinks (biases drawn nonzero).
TEST(GradCheck, RandomNetsProperty) {
  std::mt19937_64 rng(2024);
  const Head heads[] = {Head::Softmax, Head::Softplus, Head::Linear};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> sizes{1 + rng() % 8};
    for (auto l = rng() % 3; l > 0; --l) sizes.push_back(1 + rng() % 8);
    sizes.push_back(2 + rng() % 7);
    LayerSpec spec{sizes, heads[trial % 3]};
    auto p = random_vector(static_cast<Eigen::Index>(spec.num_params()), rng, 0.7);
    auto x = random_vector(static_cast<Eigen::Index>(spec.input_size()), rng);
    auto target = random_vector(static_cast<Eigen::Index>(spec.output_size()), rng);
    EXPECT_LT(grad_check(p, spec, x, quadratic(target)), 1e-4) << "trial " << trial;
  }
}

TEST(Adam, ZeroGradientLeavesParams) {
  Vector p(3);
  p << 1, 2, 3;
  auto [next, state] = adam_step(p, Vector::Zero(3), AdamState::zeros(3), false);
  EXPECT_EQ(next, p);
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  Vector p = Vector::Zero(3);
  Vector g(3);
  g << 0.5, -2.0, 1e-3;
  AdamConfig cfg;
  cfg.learning_rate = 0.01;
  auto [down, s1] = adam_step(p, g, AdamState::zeros(3, cfg), false);
  auto [up, s2] = adam_step(p, g, AdamState::zeros(3, cfg), true);
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double sign = g[i] > 0 ? 1.0 : -1.0;
    EXPECT_NEAR(down[i], -sign * 0.01, 1e-6);
    EXPECT_EQ(up[i], -down[i]);
  }
}

TEST(Adam, ShapeMismatch) {
  EXPECT_ERRC(adam_step(Vector::Zero(3), Vector::Zero(2), AdamState::zeros(3), false), ShapeMismatch);
  EXPECT_ERRC(adam_step(Vector::Zero(3), Vector::Zero(3), AdamState::zeros(4), false), ShapeMismatch);
}

TEST(Adam, MinimizesQuadratic) {
  Vector p = Vector::Constant(2, 3.0);
  AdamConfig cfg;
  cfg.learning_rate = 0.05;
  auto state = AdamState::zeros(2, cfg);
  for (int i = 0; i < 2000; ++i) std::tie(p, state) = adam_step(p, p, state, false);
  EXPECT_LT(p.norm(), 1e-2);
}

TEST(Checkpoint, RoundTripIsExact) {
  std::mt19937_64 rng(8);
  LayerSpec spec{{6, 4, 3}, Head::Softplus};
  auto p = random_vector(static_cast<Eigen::Index>(spec.num_params()), rng);
  auto path = (test::scratch_dir() / "ckpt.txt").string();
  write_checkpoint(path, spec, p);
  auto back = read_checkpoint(path);
  EXPECT_EQ(back.spec, spec);
  EXPECT_EQ(back.params, p);
  auto lines = test::read_lines(path);
  EXPECT_EQ(lines.front(), "layers 6 4 3 head softplus");
  EXPECT_EQ(lines.size(), 1 + spec.num_params());
}

TEST(Checkpoint, Errors) {
  EXPECT_ERRC(read_checkpoint("/nonexistent/ckpt.txt"), MissingCheckpoint);
  auto path = test::scratch_dir() / "bad.txt";
  test::write_text(path, "layers 2 1 head linear\n0.5\n");
  EXPECT_ERRC(read_checkpoint(path.string()), CheckpointMismatch);
  test::write_text(path, "layers 2 1 head tanh\n0.5\n0.5\n0.5\n");
  EXPECT_ERRC(read_checkpoint(path.string()), ParseError);
  test::write_text(path, "layers 2 1 head linear\n0.5\nabc\n0.5\n");
  EXPECT_ERRC(read_checkpoint(path.string()), ParseError);
}
