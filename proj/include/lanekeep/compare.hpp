#pragma once

#include <array>
#include <optional>
#include <string>

#include "lanekeep/config.hpp"
#include "lanekeep/episode.hpp"
#include "lanekeep/mlp.hpp"
#include "lanekeep/stats.hpp"
#include "lanekeep/svg.hpp"

namespace lanekeep
{

struct TrainingOutcome
{
  TrainResult result;
  std::size_t samples = 0;
};

inline TrainingOutcome train_policy(const RunConfig &cfg, int episodes, double sigma)
{
  const DemonstrationSet demo = collect_demonstrations(cfg, episodes, cfg.training.expert, sigma);
  return {mlp_train_clone(demo.samples, cfg.training.train), demo.samples.size()};
}

struct CompareOutcome
{
  std::array<EpisodeLog, 3> logs; // normal, pid, neural
  ComparisonReport report;
  MlpPolicy policy;
  std::optional<TrainingOutcome> training; // set when the policy was trained here
};

// Runs the three controllers on one world; the network comes from the policy file or is
// cloned from the configured demonstrations.
inline CompareOutcome run_compare(const RunConfig &cfg)
{
  cfg.validate();
  CompareOutcome out;
  if (!cfg.controller.policy_file.empty())
    out.policy = read_policy_file(cfg.controller.policy_file);
  else
  {
    out.training = train_policy(cfg, cfg.training.episodes, cfg.training.sigma);
    out.policy = out.training->result.policy;
  }
  const std::array<ControllerType, 3> types{ControllerType::normal, ControllerType::pid, ControllerType::nn};
  for (std::size_t i = 0; i < types.size(); ++i)
  {
    RunConfig run = cfg;
    run.controller.type = types[i];
    out.logs[i] = run_episode(run, types[i] == ControllerType::nn ? std::optional<MlpPolicy>(out.policy)
                                                                   : std::nullopt);
  }
  out.report = compare_report(out.logs[0], out.logs[1], out.logs[2]);
  return out;
}

inline std::string compare_svg(const CompareOutcome &c)
{
  return emit_svg_plot({{"normal", &c.logs[0]}, {"pid", &c.logs[1]}, {"neural", &c.logs[2]}});
}

} // namespace lanekeep
