#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "lanekeep/control.hpp"
#include "lanekeep/mlp.hpp"

using namespace lanekeep;

namespace
{
std::vector<Sample> pure_p_samples(std::size_t n, double kp, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1000.0, 1000.0), jitter(-50.0, 50.0), integ(-2000.0, 2000.0);
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i)
  {
    const double e = d(rng);
    const ErrorFeatures f{e, std::clamp(e + jitter(rng), -1000.0, 1000.0), integ(rng)};
    out.push_back({f.scaled(), SteeringCmd::clamped(servo_center + kp * e).servo});
  }
  return out;
}
} // namespace

TEST(OpenLoop, Examples)
{
  EXPECT_EQ(openloop_step(0).servo, 45.0);
  EXPECT_EQ(openloop_step(600).servo, 90.0);
  EXPECT_EQ(openloop_step(-600).servo, 0.0);
  EXPECT_EQ(openloop_step(50).servo, 45.0);
  EXPECT_EQ(openloop_step(50.001).servo, 90.0);
  EXPECT_EQ(openloop_step(10, 5).servo, 90.0);
}

TEST(OpenLoop, Antisymmetric)
{
  for (double d = 51; d <= 1000; d += 37)
    EXPECT_EQ(openloop_step(-d).servo, 90.0 - openloop_step(d).servo);
}

TEST(Pid, Examples)
{
  const PidGains p45{0.045, 0.0, 0.0, 2000};
  EXPECT_DOUBLE_EQ(pid_step({}, 1000, 0.05, p45).first.servo, 90.0);
  const PidGains p02{0.02, 0.0, 0.0, 2000};
  EXPECT_DOUBLE_EQ(pid_step({}, -500, 0.05, p02).first.servo, 35.0);

  PidState s;
  for (int k = 0; k < 100; ++k)
  {
    const auto [cmd, next] = pid_step(s, 0.0, 0.05, PidGains{0.1, 0.5, 0.2, 2000});
    EXPECT_EQ(cmd.servo, 45.0);
    s = next;
  }
}

TEST(Pid, TermsAndFirstCallDerivative)
{
  const PidGains g{0.01, 0.1, 0.02, 2000};
  const auto [c1, s1] = pid_step({}, 100, 0.1, g);
  // integral 10, no derivative on the first call
  EXPECT_DOUBLE_EQ(c1.servo, 45.0 + 1.0 + 1.0);
  EXPECT_TRUE(s1.initialized);
  const auto [c2, s2] = pid_step(s1, 200, 0.1, g);
  // integral 30, derivative 1000
  EXPECT_NEAR(c2.servo, 45.0 + 2.0 + 3.0 + 20.0, 1e-12);
  EXPECT_DOUBLE_EQ(s2.previous, 200.0);
}

TEST(Pid, IntegralClamped)
{
  const PidGains g{0.0, 0.01, 0.0, 300};
  PidState s;
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> d(-1000, 1000);
  for (int k = 0; k < 2000; ++k)
  {
    s = pid_step(s, k < 500 ? 1000.0 : d(rng), 0.05, g).second;
    ASSERT_LE(std::abs(s.integral), 300.0);
  }
  PidState t;
  for (int k = 0; k < 100; ++k)
    t = pid_step(t, 1000.0, 0.05, g).second;
  EXPECT_EQ(t.integral, 300.0);
}

TEST(Pid, AntisymmetricFreshState)
{
  const PidGains g{0.03, 0.002, 0.01, 2000};
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> d(-1000, 1000);
  PidState a, b;
  for (int k = 0; k < 200; ++k)
  {
    const double e = d(rng);
    const auto [ca, na] = pid_step(a, e, 0.05, g);
    const auto [cb, nb] = pid_step(b, -e, 0.05, g);
    ASSERT_NEAR(cb.servo, 90.0 - ca.servo, 1e-9);
    a = na;
    b = nb;
  }
}

TEST(Pid, OutputsAlwaysInRange)
{
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-1e6, 1e6), gain(-5, 5);
  for (int k = 0; k < 10000; ++k)
  {
    const PidGains g{gain(rng), gain(rng), gain(rng), 2000};
    PidState s{std::clamp(d(rng), -2000.0, 2000.0), d(rng), true};
    const double servo = pid_step(s, d(rng), 0.05, g).first.servo;
    ASSERT_GE(servo, 0.0);
    ASSERT_LE(servo, 90.0);
  }
}

TEST(Pid, Faults)
{
  EXPECT_THROW(pid_step({}, NAN, 0.05), ControllerFault);
  EXPECT_THROW(pid_step({}, INFINITY, 0.05), ControllerFault);
  EXPECT_THROW(pid_step({}, 1.0, 0.0), DomainError);
  EXPECT_THROW((PidGains{1, 0, 0, 0}.validate()), ConfigError);
  EXPECT_THROW((PidGains{NAN, 0, 0, 1}.validate()), ConfigError);
}

TEST(SpeedLaw, Examples)
{
  EXPECT_DOUBLE_EQ(speed_law(0, 0.3, 0.7), 0.7);
  EXPECT_DOUBLE_EQ(speed_law(1000, 0.3, 0.7), 0.3);
  EXPECT_DOUBLE_EQ(speed_law(-1000, 0.3, 0.7), 0.3);
  EXPECT_NEAR(speed_law(500, 0.3, 0.7), 0.5, 1e-15);
  EXPECT_NEAR(speed_law(-500, 0.3, 0.7), 0.5, 1e-15);
  EXPECT_THROW(speed_law(0, 0.8, 0.7), DomainError);
  EXPECT_THROW(speed_law(0, -0.1, 0.7), DomainError);
}

TEST(Mlp, ZeroWeightsGiveCentre)
{
  const MlpPolicy p = make_mlp({3, 16, 1});
  EXPECT_EQ(mlp_forward(p, {0.3, -0.2, 0.9}).servo, 45.0);
}

TEST(Mlp, SaturatedBias)
{
  MlpPolicy p = make_mlp({3, 4, 1});
  p.layers.back().bias[0] = 10.0;
  EXPECT_NEAR(mlp_forward(p, {0.1, 0.2, 0.3}).servo, 90.0, 1e-3);
  p.layers.back().bias[0] = -10.0;
  EXPECT_NEAR(mlp_forward(p, {0.1, 0.2, 0.3}).servo, 0.0, 1e-3);
}

TEST(Mlp, RandomPolicyStaysInRange)
{
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> x(-100, 100);
  const MlpPolicy p = init_mlp({3, 16, 1}, 99);
  for (int k = 0; k < 10000; ++k)
  {
    const double s = mlp_forward(p, {x(rng), x(rng), x(rng)}).servo;
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 90.0);
  }
}

TEST(Mlp, ShapeAndInputErrors)
{
  MlpPolicy p = make_mlp({3, 4, 1});
  p.layers[0].weights.pop_back();
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_THROW(make_mlp({2, 4, 1}), ConfigError);
  EXPECT_THROW(mlp_forward(make_mlp({3, 4, 1}), {NAN, 0, 0}), ControllerFault);
  EXPECT_THROW(p.set_parameters({1.0}), ConfigError);
}

TEST(Mlp, InitBoundsAndSeed)
{
  const MlpPolicy a = init_mlp({3, 16, 1}, 5);
  EXPECT_EQ(a, init_mlp({3, 16, 1}, 5));
  EXPECT_NE(a, init_mlp({3, 16, 1}, 6));
  for (double w : a.layers[0].weights)
    EXPECT_LE(std::abs(w), 1.0 / std::sqrt(3.0));
  for (double w : a.layers[1].weights)
    EXPECT_LE(std::abs(w), 0.25);
}

TEST(Mlp, GradientMatchesFiniteDifferences)
{
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> x(-1, 1), servo(0, 90);
  std::vector<Sample> data;
  for (int i = 0; i < 40; ++i)
    data.push_back({{x(rng), x(rng), x(rng)}, servo(rng)});
  for (std::uint64_t seed : {1u, 2u, 3u})
  {
    const MlpPolicy p = init_mlp({3, 8, 1}, seed);
    std::vector<std::size_t> batch;
    for (std::size_t i = seed; i < data.size(); i += 2)
      batch.push_back(i);
    std::vector<double> grad, unused;
    mlp_loss_and_gradient(p, data, batch, grad);
    const auto params = p.parameters();
    double worst = 0;
    for (std::size_t k = 0; k < params.size(); ++k)
    {
      const double h = 1e-5;
      MlpPolicy plus = p, minus = p;
      auto pp = params, pm = params;
      pp[k] += h;
      pm[k] -= h;
      plus.set_parameters(pp);
      minus.set_parameters(pm);
      const double fd = (mlp_loss_and_gradient(plus, data, batch, unused) -
                         mlp_loss_and_gradient(minus, data, batch, unused)) /
                        (2 * h);
      const double rel = std::abs(fd - grad[k]) / std::max({std::abs(fd), std::abs(grad[k]), 1e-3});
      worst = std::max(worst, rel);
    }
    EXPECT_LT(worst, 1e-4) << "seed " << seed;
  }
}

TEST(MlpTrain, ConstantFunction)
{
  const std::vector<Sample> data(50, Sample{{0.2, 0.1, -0.3}, 45.0});
  TrainConfig cfg;
  cfg.epochs = 500;
  const auto res = mlp_train_clone(data, cfg);
  EXPECT_NEAR(mlp_forward(res.policy, {0.2, 0.1, -0.3}).servo, 45.0, 0.5);
}

TEST(MlpTrain, ClonesPureProportional)
{
  const auto data = pure_p_samples(5000, 0.03, 17);
  TrainConfig cfg;
  cfg.epochs = 100;
  const auto res = mlp_train_clone(data, cfg);
  EXPECT_EQ(res.heldout_size, 1000u);
  EXPECT_EQ(res.train_size, 4000u);
  EXPECT_LT(res.heldout_rmse, 3.0);
  EXPECT_GT(res.best_epoch, 0);
}

TEST(MlpTrain, BitReproducible)
{
  const auto data = pure_p_samples(600, 0.03, 3);
  TrainConfig cfg;
  cfg.epochs = 10;
  const auto a = mlp_train_clone(data, cfg);
  const auto b = mlp_train_clone(data, cfg);
  EXPECT_EQ(a.policy, b.policy);
  EXPECT_EQ(a.heldout_rmse, b.heldout_rmse);
  EXPECT_EQ(format_policy(a.policy), format_policy(b.policy));
  cfg.seed = 8;
  EXPECT_NE(mlp_train_clone(data, cfg).policy, a.policy);
}

TEST(MlpTrain, Errors)
{
  EXPECT_THROW(mlp_train_clone({}, TrainConfig{}), ArityError);
  TrainConfig bad;
  bad.hidden = 0;
  EXPECT_THROW(mlp_train_clone(pure_p_samples(10, 0.03, 1), bad), ConfigError);
  TrainConfig wild;
  wild.learning_rate = 1e308;
  wild.epochs = 5;
  EXPECT_THROW(mlp_train_clone(pure_p_samples(200, 0.03, 1), wild), DivergenceError);
}

TEST(PolicyFile, RoundTripExact)
{
  const MlpPolicy p = init_mlp({3, 16, 1}, 42);
  std::istringstream in(format_policy(p));
  EXPECT_EQ(parse_policy(in), p);
}

TEST(PolicyFile, MalformedRejected)
{
  for (const char *text : {"", "mlp", "nope 3 3 16 1 0", "mlp 3 3 16 1", "mlp 3 3 2 1 0\n1\n2\n",
                           "mlp 2 3 1 0\n1\n2\n3\nx\n", "mlp 2 3 1 0\n1\n2\n3\n4\n5\n"})
  {
    std::istringstream in(text);
    EXPECT_THROW(parse_policy(in), FormatError) << text;
  }
  std::istringstream wrong_io("mlp 2 2 1 0\n1\n2\n3\n");
  EXPECT_THROW(parse_policy(wrong_io), ConfigError);
}
