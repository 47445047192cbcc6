#ifndef EIPOLAB_CONFIG_HPP_
#define EIPOLAB_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "eipolab/baselines.hpp"
#include "eipolab/gridworld.hpp"

namespace eipolab::config {

struct EnvironmentConfig {
  std::string kind = "corridor";  // corridor | chain
  int height = 11;
  int width = 11;
  int n_distractors = 3;
  int max_episode_steps = 100;
  int chain_length = 10;
  double terminal_reward = 1.0;

  gridworld::GridSpec make_spec() const;
  bool operator==(const EnvironmentConfig&) const = default;
};

struct PpoConfig {
  int workers = 16;
  int horizon = 128;
  double learning_rate = 1e-4;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  int epochs = 4;
  int minibatches = 4;
  double clip_ratio = 0.1;
  double value_weight = 1.0;
  double entropy_weight = 0.001;
  double max_grad_norm = 1.0;
  bool standardize_advantages = false;
  int hidden = 64;
  bool operator==(const PpoConfig&) const = default;
};

struct IntrinsicConfig {
  double drop_probability = 0.25;
  double learning_rate = 1e-4;
  int hidden = 64;
  int embedding = 32;
  int obs_warmup_steps = 1000;
  bool normalize = true;
  bool episodic = true;
  bool operator==(const IntrinsicConfig&) const = default;
};

struct EipoConfig {
  double alpha_init = 0.5;
  double alpha_step = 0.005;
  double alpha_clip = 0.05;
  bool clamp_nonnegative = false;
  int min_stage_length = 0;
  bool operator==(const EipoConfig&) const = default;
};

struct RunConfig {
  std::string name = "run";
  std::string output_dir = "runs";
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  int iterations = 400;
  int checkpoint_every = 50;
  baselines::AlgorithmConfig algorithm;
  EnvironmentConfig environment;
  PpoConfig ppo;
  IntrinsicConfig intrinsic;
  EipoConfig eipo;

  // Throws ConfigError naming the offending field.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

// Parses the sectioned key = value format. Unknown sections or keys,
// malformed values and missing required keys (run.variant is not one:
// algorithm.variant and environment.kind are) raise ConfigError naming the
// key and line. The result has defaults filled and is validated.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

// Canonical text of a resolved config; parse_config(write_config(c)) == c.
// With comments, each default names its source.
std::string write_config(const RunConfig& cfg, bool with_comments = false);
void save_config(const RunConfig& cfg, const std::filesystem::path& path,
                 bool with_comments = false);

// Shortest text that parses back to exactly the same double.
std::string format_double(double x);

}  // namespace eipolab::config

#endif  // EIPOLAB_CONFIG_HPP_
