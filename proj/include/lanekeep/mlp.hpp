#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lanekeep/control.hpp"
#include "lanekeep/error.hpp"

namespace lanekeep
{

// Fully connected tanh network; the single tanh output o maps to servo 45 + 45 o.
struct DenseLayer
{
  int inputs = 0;
  int outputs = 0;
  std::vector<double> weights; // outputs x inputs, row-major
  std::vector<double> bias;    // outputs

  bool operator==(const DenseLayer &) const = default;
};

struct MlpPolicy
{
  std::vector<int> sizes; // e.g. {3, 16, 1}
  std::vector<DenseLayer> layers;
  std::uint64_t seed = 0;

  bool operator==(const MlpPolicy &) const = default;

  std::size_t parameter_count() const
  {
    std::size_t n = 0;
    for (const auto &l : layers)
      n += l.weights.size() + l.bias.size();
    return n;
  }

  void validate() const
  {
    if (sizes.size() < 2 || sizes.front() != 3 || sizes.back() != 1)
      throw ConfigError("mlp policy must map 3 features to 1 output");
    if (layers.size() + 1 != sizes.size())
      throw ConfigError("mlp policy has " + std::to_string(layers.size()) + " layers for " +
                        std::to_string(sizes.size()) + " sizes");
    for (std::size_t i = 0; i < layers.size(); ++i)
    {
      const auto &l = layers[i];
      if (sizes[i] <= 0 || l.inputs != sizes[i] || l.outputs != sizes[i + 1] ||
          l.weights.size() != static_cast<std::size_t>(l.inputs) * l.outputs ||
          l.bias.size() != static_cast<std::size_t>(l.outputs))
        throw ConfigError("mlp layer " + std::to_string(i) + " shape mismatch");
      for (double w : l.weights)
        if (!std::isfinite(w))
          throw ConfigError("mlp layer " + std::to_string(i) + " has a non-finite weight");
      for (double b : l.bias)
        if (!std::isfinite(b))
          throw ConfigError("mlp layer " + std::to_string(i) + " has a non-finite bias");
    }
  }

  // Flattened in file order: per layer the weights (row-major), then its biases.
  std::vector<double> parameters() const
  {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (const auto &l : layers)
    {
      out.insert(out.end(), l.weights.begin(), l.weights.end());
      out.insert(out.end(), l.bias.begin(), l.bias.end());
    }
    return out;
  }

  void set_parameters(const std::vector<double> &p)
  {
    if (p.size() != parameter_count())
      throw ConfigError("mlp parameter vector has " + std::to_string(p.size()) + " values, expected " +
                        std::to_string(parameter_count()));
    std::size_t k = 0;
    for (auto &l : layers)
    {
      for (double &w : l.weights)
        w = p[k++];
      for (double &b : l.bias)
        b = p[k++];
    }
  }
};

inline MlpPolicy make_mlp(const std::vector<int> &sizes, std::uint64_t seed = 0)
{
  MlpPolicy policy;
  policy.sizes = sizes;
  policy.seed = seed;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i)
  {
    DenseLayer l;
    l.inputs = sizes[i];
    l.outputs = sizes[i + 1];
    l.weights.assign(static_cast<std::size_t>(l.inputs) * l.outputs, 0.0);
    l.bias.assign(static_cast<std::size_t>(l.outputs), 0.0);
    policy.layers.push_back(std::move(l));
  }
  policy.validate();
  return policy;
}

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
inline MlpPolicy init_mlp(const std::vector<int> &sizes, std::uint64_t seed)
{
  MlpPolicy policy = make_mlp(sizes, seed);
  std::mt19937_64 rng(seed);
  for (auto &l : policy.layers)
  {
    const double bound = 1.0 / std::sqrt(double(l.inputs));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double &w : l.weights)
      w = dist(rng);
    for (double &b : l.bias)
      b = dist(rng);
  }
  return policy;
}

using FeatureVector = std::array<double, 3>;

namespace detail
{
// Per-layer activations; activations[0] is the input.
inline std::vector<std::vector<double>> forward_activations(const MlpPolicy &policy, const FeatureVector &x)
{
  std::vector<std::vector<double>> act;
  act.reserve(policy.layers.size() + 1);
  act.emplace_back(x.begin(), x.end());
  for (const auto &l : policy.layers)
  {
    const auto &in = act.back();
    std::vector<double> out(static_cast<std::size_t>(l.outputs));
    for (int o = 0; o < l.outputs; ++o)
    {
      double z = l.bias[o];
      for (int i = 0; i < l.inputs; ++i)
        z += l.weights[static_cast<std::size_t>(o) * l.inputs + i] * in[i];
      out[o] = std::tanh(z);
    }
    act.push_back(std::move(out));
  }
  return act;
}
} // namespace detail

inline double mlp_servo(const MlpPolicy &policy, const FeatureVector &features)
{
  return servo_center + servo_center * detail::forward_activations(policy, features).back()[0];
}

inline SteeringCmd mlp_forward(const MlpPolicy &policy, const FeatureVector &features)
{
  if (policy.layers.empty() || policy.layers.front().inputs != 3 || policy.layers.back().outputs != 1)
    throw ConfigError("mlp policy must map 3 features to 1 output");
  for (double f : features)
    if (!std::isfinite(f))
      throw ControllerFault("non-finite mlp feature");
  return SteeringCmd::clamped(mlp_servo(policy, features));
}

struct Sample
{
  FeatureVector features{};
  double servo = servo_center;
};

// Mean squared servo error (degrees^2) over the batch and its gradient in parameters() order.
inline double mlp_loss_and_gradient(const MlpPolicy &policy, const std::vector<Sample> &data,
                                    const std::vector<std::size_t> &batch, std::vector<double> &grad)
{
  grad.assign(policy.parameter_count(), 0.0);
  std::vector<std::size_t> offset(policy.layers.size());
  for (std::size_t li = 0, k = 0; li < policy.layers.size(); ++li)
  {
    offset[li] = k;
    k += policy.layers[li].weights.size() + policy.layers[li].bias.size();
  }
  double loss = 0.0;
  const double scale = 1.0 / double(batch.size());
  for (std::size_t idx : batch)
  {
    const Sample &s = data[idx];
    const auto act = detail::forward_activations(policy, s.features);
    const double out = act.back()[0];
    const double err = servo_center + servo_center * out - s.servo;
    loss += err * err * scale;
    // delta = dLoss/dz for the current layer.
    std::vector<double> delta{2.0 * err * scale * servo_center * (1.0 - out * out)};
    for (std::size_t li = policy.layers.size(); li-- > 0;)
    {
      const auto &l = policy.layers[li];
      const auto &in = act[li];
      const std::size_t base = offset[li];
      for (int o = 0; o < l.outputs; ++o)
      {
        for (int i = 0; i < l.inputs; ++i)
          grad[base + static_cast<std::size_t>(o) * l.inputs + i] += delta[o] * in[i];
        grad[base + l.weights.size() + o] += delta[o];
      }
      if (li == 0)
        break;
      std::vector<double> prev(static_cast<std::size_t>(l.inputs), 0.0);
      for (int i = 0; i < l.inputs; ++i)
      {
        double g = 0;
        for (int o = 0; o < l.outputs; ++o)
          g += l.weights[static_cast<std::size_t>(o) * l.inputs + i] * delta[o];
        prev[i] = g * (1.0 - in[i] * in[i]);
      }
      delta = std::move(prev);
    }
  }
  return loss;
}

inline double mlp_rmse(const MlpPolicy &policy, const std::vector<Sample> &data, const std::vector<std::size_t> &idx)
{
  if (idx.empty())
    return 0.0;
  double s = 0;
  for (std::size_t i : idx)
  {
    const double e = mlp_servo(policy, data[i].features) - data[i].servo;
    s += e * e;
  }
  return std::sqrt(s / double(idx.size()));
}

struct TrainConfig
{
  int hidden = 16;
  double learning_rate = 2e-4;
  int epochs = 300;
  int batch_size = 32;
  std::uint64_t seed = 7;

  void validate() const
  {
    if (hidden < 1 || epochs < 1 || batch_size < 1 || !(learning_rate > 0))
      throw ConfigError("training needs hidden, epochs, batch_size >= 1 and learning_rate > 0");
  }
};

struct TrainResult
{
  MlpPolicy policy;
  double heldout_rmse = 0.0;
  double train_rmse = 0.0;
  int best_epoch = 0;
  std::size_t train_size = 0;
  std::size_t heldout_size = 0;
};

// Mini-batch gradient descent on the servo MSE; keeps the epoch with the lowest held-out RMSE
// (20% of the samples, chosen by the seed).
inline TrainResult mlp_train_clone(const std::vector<Sample> &data, const TrainConfig &cfg)
{
  cfg.validate();
  if (data.empty())
    throw ArityError("behaviour cloning needs a non-empty dataset");
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_held = data.size() >= 5 ? data.size() / 5 : 0;
  std::vector<std::size_t> held(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_held));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_held), order.end());
  const auto &validation = held.empty() ? train : held;

  TrainResult result;
  result.policy = init_mlp({3, cfg.hidden, 1}, cfg.seed);
  result.train_size = train.size();
  result.heldout_size = held.size();
  result.heldout_rmse = mlp_rmse(result.policy, data, validation);

  MlpPolicy current = result.policy;
  std::vector<double> params = current.parameters();
  std::vector<double> grad;
  std::vector<std::size_t> batch;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch)
  {
    std::shuffle(train.begin(), train.end(), rng);
    for (std::size_t start = 0; start < train.size(); start += static_cast<std::size_t>(cfg.batch_size))
    {
      const std::size_t stop = std::min(train.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.assign(train.begin() + static_cast<std::ptrdiff_t>(start), train.begin() + static_cast<std::ptrdiff_t>(stop));
      const double loss = mlp_loss_and_gradient(current, data, batch, grad);
      if (!std::isfinite(loss))
        throw DivergenceError(epoch, "training loss became non-finite");
      for (std::size_t k = 0; k < params.size(); ++k)
        params[k] -= cfg.learning_rate * grad[k];
      current.set_parameters(params);
    }
    const double rmse = mlp_rmse(current, data, validation);
    if (!std::isfinite(rmse))
      throw DivergenceError(epoch, "held-out error became non-finite");
    if (rmse < result.heldout_rmse)
    {
      result.heldout_rmse = rmse;
      result.policy = current;
      result.best_epoch = epoch;
    }
  }
  result.train_rmse = mlp_rmse(result.policy, data, train);
  return result;
}

// Header "mlp <n_sizes> <sizes...> <seed>", then one decimal per line: each layer's weights
// (row-major) followed by its biases.
inline std::string format_policy(const MlpPolicy &policy)
{
  std::ostringstream out;
  out << "mlp " << policy.sizes.size();
  for (int s : policy.sizes)
    out << ' ' << s;
  out << ' ' << policy.seed << '\n' << std::setprecision(17);
  for (double p : policy.parameters())
    out << p << '\n';
  return out.str();
}

inline MlpPolicy parse_policy(std::istream &in)
{
  std::string tag;
  std::size_t n = 0;
  if (!(in >> tag) || tag != "mlp" || !(in >> n) || n < 2 || n > 64)
    throw FormatError("policy file must start with 'mlp <n_layers> <sizes...> <seed>'");
  std::vector<int> sizes(n);
  for (auto &s : sizes)
    if (!(in >> s) || s <= 0 || s > 4096)
      throw FormatError("policy file has a bad layer size");
  std::uint64_t seed = 0;
  if (!(in >> seed))
    throw FormatError("policy file is missing its seed");
  MlpPolicy policy = make_mlp(sizes, seed);
  std::vector<double> params(policy.parameter_count());
  for (std::size_t k = 0; k < params.size(); ++k)
  {
    std::string tok;
    if (!(in >> tok))
      throw FormatError("policy file ends after " + std::to_string(k) + " of " + std::to_string(params.size()) +
                        " parameters");
    try
    {
      params[k] = std::stod(tok);
    }
    catch (const std::exception &)
    {
      throw FormatError("policy file has a bad number '" + tok + "'");
    }
  }
  std::string extra;
  if (in >> extra)
    throw FormatError("policy file has trailing data");
  policy.set_parameters(params);
  policy.validate();
  return policy;
}

inline MlpPolicy read_policy_file(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open " + path);
  return parse_policy(in);
}

inline void write_policy_file(const std::string &path, const MlpPolicy &policy)
{
  std::ofstream out(path);
  if (!out)
    throw Error("cannot write " + path);
  out << format_policy(policy);
}

} // namespace lanekeep
