#include "rcfolio/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "rcfolio/error.hpp"
#include "rcfolio/rng.hpp"

namespace rcfolio::nn {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> weights(const ParamVector& p, std::size_t offset, std::size_t out,
                                   std::size_t in) {
  return {p.data() + offset, static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)};
}

Eigen::Map<RowMajor> weights(Gradient& g, std::size_t offset, std::size_t out, std::size_t in) {
  return {g.data() + offset, static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)};
}

void check_params(const ParamVector& params, const LayerSpec& spec) {
  spec.validate();
  if (static_cast<std::size_t>(params.size()) != spec.num_params()) {
    throw Error(Errc::DimensionMismatch, fmt::format("{} parameters, layer spec needs {}",
                                                     params.size(), spec.num_params()));
  }
}

Vector apply_head(Head head, const Vector& z) {
  switch (head) {
    case Head::Softmax: return softmax(z);
    case Head::Softplus: return z.unaryExpr([](double x) { return softplus(x); });
    case Head::Linear: return z;
  }
  return z;
}

}  // namespace

std::string_view to_string(Head head) {
  switch (head) {
    case Head::Softmax: return "softmax";
    case Head::Softplus: return "softplus";
    case Head::Linear: return "linear";
  }
  return "linear";
}

std::optional<Head> parse_head(std::string_view text) {
  for (Head h : {Head::Softmax, Head::Softplus, Head::Linear}) {
    if (to_string(h) == text) return h;
  }
  return std::nullopt;
}

void LayerSpec::validate() const {
  if (sizes.size() < 2) throw Error(Errc::InvalidSpec, "need at least input and output layers");
  for (auto s : sizes) {
    if (s == 0) throw Error(Errc::InvalidSpec, "layer widths must be positive");
  }
}

std::size_t LayerSpec::num_params() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) n += (sizes[l] + 1) * sizes[l + 1];
  return n;
}

Vector softmax(const Vector& logits) {
  const double m = logits.maxCoeff();
  Vector e = (logits.array() - m).exp();
  return e / e.sum();
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

ParamVector init_params(const LayerSpec& spec, std::uint64_t seed) {
  spec.validate();
  auto rng = make_stream(seed, "init");
  ParamVector p = ParamVector::Zero(static_cast<Eigen::Index>(spec.num_params()));
  std::size_t offset = 0;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t in = spec.sizes[l];
    const std::size_t out = spec.sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    for (std::size_t k = 0; k < in * out; ++k) p[static_cast<Eigen::Index>(offset + k)] = uniform(rng);
    offset += in * out + out;  // biases stay zero
  }
  return p;
}

ForwardResult forward(const ParamVector& params, const LayerSpec& spec, const Vector& input) {
  check_params(params, spec);
  if (static_cast<std::size_t>(input.size()) != spec.input_size()) {
    throw Error(Errc::DimensionMismatch, fmt::format("input has {} entries, network expects {}",
                                                     input.size(), spec.input_size()));
  }
  ForwardResult r;
  r.tape.inputs.reserve(spec.num_layers());
  r.tape.preacts.reserve(spec.num_layers());
  Vector a = input;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t in = spec.sizes[l];
    const std::size_t out = spec.sizes[l + 1];
    const auto W = weights(params, offset, out, in);
    const auto b = params.segment(static_cast<Eigen::Index>(offset + in * out),
                                  static_cast<Eigen::Index>(out));
    Vector z = W * a + b;
    r.tape.inputs.push_back(std::move(a));
    if (l + 1 < spec.num_layers()) {
      a = z.cwiseMax(0.0);
    } else {
      a = apply_head(spec.head, z);
    }
    r.tape.preacts.push_back(std::move(z));
    offset += in * out + out;
  }
  r.output = a;
  r.tape.output = std::move(a);
  return r;
}

Vector predict(const ParamVector& params, const LayerSpec& spec, const Vector& input) {
  return forward(params, spec, input).output;
}

Gradient backward(const ParamVector& params, const LayerSpec& spec, const Tape& tape,
                  const Vector& output_grad) {
  check_params(params, spec);
  const std::size_t L = spec.num_layers();
  if (tape.inputs.size() != L || tape.preacts.size() != L) {
    throw Error(Errc::TapeMismatch, fmt::format("tape has {} layers, spec {}", tape.preacts.size(), L));
  }
  for (std::size_t l = 0; l < L; ++l) {
    if (static_cast<std::size_t>(tape.inputs[l].size()) != spec.sizes[l] ||
        static_cast<std::size_t>(tape.preacts[l].size()) != spec.sizes[l + 1]) {
      throw Error(Errc::TapeMismatch, fmt::format("tape layer {} does not match spec", l));
    }
  }
  if (static_cast<std::size_t>(output_grad.size()) != spec.output_size()) {
    throw Error(Errc::DimensionMismatch, "output gradient size does not match network output");
  }

  Vector delta;
  const Vector& z_out = tape.preacts.back();
  switch (spec.head) {
    case Head::Softmax: {
      const Vector& y = tape.output;
      delta = y.cwiseProduct((output_grad.array() - output_grad.dot(y)).matrix());
      break;
    }
    case Head::Softplus:
      delta = output_grad.cwiseProduct(z_out.unaryExpr([](double x) { return sigmoid(x); }));
      break;
    case Head::Linear:
      delta = output_grad;
      break;
  }

  std::vector<std::size_t> offsets(L);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < L; ++l) {
    offsets[l] = offset;
    offset += (spec.sizes[l] + 1) * spec.sizes[l + 1];
  }

  Gradient grad = Gradient::Zero(params.size());
  for (std::size_t l = L; l-- > 0;) {
    const std::size_t in = spec.sizes[l];
    const std::size_t out = spec.sizes[l + 1];
    weights(grad, offsets[l], out, in).noalias() = delta * tape.inputs[l].transpose();
    grad.segment(static_cast<Eigen::Index>(offsets[l] + in * out), static_cast<Eigen::Index>(out)) =
        delta;
    if (l > 0) {
      Vector back = weights(params, offsets[l], out, in).transpose() * delta;
      const Vector& z = tape.preacts[l - 1];
      for (Eigen::Index k = 0; k < back.size(); ++k) {
        if (!(z[k] > 0.0)) back[k] = 0.0;
      }
      delta = std::move(back);
    }
  }
  return grad;
}

double max_relative_error(const Vector& analytic, const std::function<double(const Vector&)>& f,
                          const Vector& x, double step) {
  if (analytic.size() != x.size()) {
    throw Error(Errc::DimensionMismatch, "analytic gradient and point differ in size");
  }
  double worst = 0.0;
  Vector probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + step;
    const double up = f(probe);
    probe[k] = x[k] - step;
    const double down = f(probe);
    probe[k] = x[k];
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[k]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[k] - numeric) / denom);
  }
  return worst;
}

double grad_check(const ParamVector& params, const LayerSpec& spec, const Vector& input,
                  const ScalarFn& scalar_fn, double step) {
  const auto fwd = forward(params, spec, input);
  const auto eval = scalar_fn(fwd.output);
  const Gradient analytic = backward(params, spec, fwd.tape, eval.output_grad);
  return max_relative_error(
      analytic, [&](const Vector& p) { return scalar_fn(predict(p, spec, input)).value; }, params,
      step);
}

AdamState AdamState::zeros(Eigen::Index size, const AdamConfig& config) {
  return AdamState{Vector::Zero(size), Vector::Zero(size), 0, config};
}

std::pair<ParamVector, AdamState> adam_step(const ParamVector& params, const Gradient& grad,
                                            const AdamState& state, bool maximize) {
  if (grad.size() != params.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw Error(Errc::ShapeMismatch, "parameter, gradient and moment sizes differ");
  }
  const auto& c = state.config;
  AdamState next = state;
  next.step = state.step + 1;
  const Vector g = maximize ? Vector(-grad) : grad;
  next.first_moment = c.beta1 * state.first_moment + (1.0 - c.beta1) * g;
  next.second_moment = c.beta2 * state.second_moment + (1.0 - c.beta2) * g.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(next.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(next.step));
  ParamVector out = params;
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    const double m_hat = next.first_moment[k] / bc1;
    const double v_hat = next.second_moment[k] / bc2;
    out[k] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
  return {std::move(out), std::move(next)};
}

void write_checkpoint(const std::string& path, const LayerSpec& spec, const ParamVector& params) {
  check_params(params, spec);
  std::ofstream out(path);
  if (!out) throw Error(Errc::FileNotFound, path);
  out << "layers";
  for (auto s : spec.sizes) out << ' ' << s;
  out << " head " << to_string(spec.head) << '\n';
  for (Eigen::Index k = 0; k < params.size(); ++k) out << fmt::format("{}\n", params[k]);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingCheckpoint, path);
  std::string header;
  if (!std::getline(in, header)) throw Error(Errc::ParseError, path + ": empty checkpoint");
  std::istringstream hs(header);
  std::string word;
  hs >> word;
  if (word != "layers") throw Error(Errc::ParseError, path + ": missing 'layers' header");
  Checkpoint ckpt;
  while (hs >> word && word != "head") {
    try {
      ckpt.spec.sizes.push_back(static_cast<std::size_t>(std::stoull(word)));
    } catch (const std::exception&) {
      throw Error(Errc::ParseError, fmt::format("{}: bad layer size '{}'", path, word));
    }
  }
  if (word != "head" || !(hs >> word)) throw Error(Errc::ParseError, path + ": missing head");
  const auto head = parse_head(word);
  if (!head) throw Error(Errc::ParseError, fmt::format("{}: unknown head '{}'", path, word));
  ckpt.spec.head = *head;
  ckpt.spec.validate();

  std::vector<double> values;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(line, &used));
      if (used != line.size()) throw std::invalid_argument(line);
    } catch (const std::exception&) {
      throw Error(Errc::ParseError, fmt::format("{}:{}: bad parameter '{}'", path, line_no, line));
    }
  }
  if (values.size() != ckpt.spec.num_params()) {
    throw Error(Errc::CheckpointMismatch, fmt::format("{}: {} parameters, header implies {}", path,
                                                      values.size(), ckpt.spec.num_params()));
  }
  ckpt.params = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  return ckpt;
}

}  // namespace rcfolio::nn
