#ifndef EIPOLAB_TRAINER_HPP_
#define EIPOLAB_TRAINER_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eipolab/baselines.hpp"
#include "eipolab/checkpoint.hpp"
#include "eipolab/config.hpp"
#include "eipolab/eipo.hpp"
#include "eipolab/gridworld.hpp"
#include "eipolab/intrinsic.hpp"

namespace eipolab {

inline constexpr int kMetricsSchemaVersion = 1;

struct MetricsRow {
  int iteration = 0;
  std::string variant;
  std::uint64_t frames = 0;
  std::string behavior;
  // EIPO variants only.
  bool max_stage = false;
  double alpha = 0.0;
  bool alpha_updated = false;
  double gap = 0.0;  // L(pi_E, pi_EI); NaN unless alpha_updated
  double j = 0.0;
  // Episodes finished during this iteration.
  int episodes = 0;
  double mean_ext_return = 0.0;    // NaN when no episode finished
  double median_ext_return = 0.0;  // over the last 100 episodes so far
  double mean_raw_intrinsic = 0.0;
  double mean_intrinsic = 0.0;     // after normalization and scaling
  double lambda = 0.0;
  double primary = 0.0;
  double auxiliary = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double mean_ratio = 0.0;
  double grad_norm = 0.0;
  double rnd_loss = 0.0;
  double ext_divisor = 1.0;
  double mean_kl = 0.0;

  void save(ByteWriter& w) const;
  void load(ByteReader& r);
};

struct EpisodeRecord {
  int iteration = 0;
  int worker = 0;
  std::string behavior;
  double extrinsic_return = 0.0;
  int length = 0;
};

// Column names of metrics.csv for a variant; the EIPO columns are present
// only for the EIPO variants.
std::vector<std::string> metrics_header(baselines::Variant variant);
std::vector<std::string> metrics_fields(const MetricsRow& row, baselines::Variant variant);
std::vector<std::string> episodes_header();
std::vector<std::string> episode_fields(const EpisodeRecord& e);

// Runs one training run (one seed) of any variant. Holds every piece of
// mutable state so a checkpoint taken between iterations resumes exactly.
class Trainer {
 public:
  Trainer(const config::RunConfig& cfg, std::uint64_t seed);
  ~Trainer();
  Trainer(Trainer&&) noexcept;
  Trainer& operator=(Trainer&&) noexcept;

  // Collects one rollout, updates every learner and appends a metrics row.
  // Throws NumericError when a loss turns non-finite.
  const MetricsRow& iterate();

  int iteration() const;
  std::uint64_t seed() const;
  const config::RunConfig& config() const;
  const std::vector<MetricsRow>& metrics() const;
  const std::vector<EpisodeRecord>& episodes() const;
  const funcapprox::PolicyPair& policy() const;
  const eipo::AlphaState& alpha() const;
  const eipo::StageState& stage() const;

  // Median extrinsic return of the last `window` episodes (all episodes if
  // fewer). NaN when none finished.
  double final_score(std::size_t window = 100) const;

  Checkpoint checkpoint() const;
  // Throws UsageError when the checkpoint belongs to another architecture
  // or configuration.
  void restore(const Checkpoint& ckpt);

 private:
  struct State;
  std::unique_ptr<State> s_;
};

// Trainer for a validated config; the variant decides the update rule.
Trainer make_trainer(const config::RunConfig& cfg, std::uint64_t seed);

}  // namespace eipolab

#endif  // EIPOLAB_TRAINER_HPP_
