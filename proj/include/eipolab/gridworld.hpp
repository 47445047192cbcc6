#ifndef EIPOLAB_GRIDWORLD_HPP_
#define EIPOLAB_GRIDWORLD_HPP_

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "eipolab/checkpoint.hpp"
#include "eipolab/common.hpp"

namespace eipolab::gridworld {

struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

enum class Action : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kNoop = 4 };
inline constexpr int kNumActions = 5;

// Egocentric crop: 4 one-hot planes over a 5x5 window centred on the agent.
inline constexpr int kCropRadius = 2;
inline constexpr int kCropSide = 2 * kCropRadius + 1;
inline constexpr int kNumPlanes = 4;
inline constexpr int kObsSize = kCropSide * kCropSide * kNumPlanes;

enum Plane : int { kWallPlane = 0, kAgentPlane = 1, kGoalPlane = 2, kDistractorPlane = 3 };

using Observation = std::array<double, kObsSize>;

constexpr int obs_index(Plane plane, int crop_row, int crop_col) {
  return plane * kCropSide * kCropSide + crop_row * kCropSide + crop_col;
}

struct GridSpec {
  int height = 0;
  int width = 0;
  // Cells outside the grid are rendered and treated as walls.
  std::vector<Cell> walls;
  std::vector<Cell> goal_cells;
  // Cells eligible for distractor placement; resampled at every reset.
  std::vector<Cell> corridor_cells;
  // Static markers drawn on the distractor plane; never resampled.
  std::vector<Cell> landmark_cells;
  int n_distractors = 0;
  int max_episode_steps = 1;
  Cell start;
  double goal_reward = 1.0;
  // false: goal_reward is paid on every step the agent occupies a goal cell.
  // true: paid once on arrival, and the episode ends.
  bool goal_terminates = false;
  std::uint64_t seed = 0;

  // Throws ConfigError naming the violated invariant.
  void validate() const;
};

// 11x11 room with a bottom corridor that hosts distractors, separated from
// the goal room by a wall with a single opening.
struct CorridorParams {
  int height = 11;
  int width = 11;
  int n_distractors = 3;
  int max_episode_steps = 100;
};
GridSpec make_corridor(const CorridorParams& params = {});

// 1 x length corridor, start at column 0, goal at column length-1 paying
// terminal_reward once and ending the episode. Landmarks on the distractor
// plane give each position a distinct local view.
GridSpec make_sparse_chain(int length, double terminal_reward,
                           int max_episode_steps = 200);

struct Transition {
  Observation observation{};
  int action = 0;
  double extrinsic_reward = 0.0;
  bool done = false;
  Observation next_observation{};
  // Populated on the terminal transition.
  double episode_return = 0.0;
  int episode_length = 0;
};

class GridEnv {
 public:
  GridEnv(GridSpec spec, std::uint64_t rng_seed);

  // Places the agent at the start cell and resamples distractors.
  const Observation& reset();
  // Throws UsageError after the episode terminated.
  Transition step(int action);

  const Observation& observation() const { return obs_; }
  bool done() const { return done_; }
  int steps() const { return steps_; }
  double episode_return() const { return return_; }
  Cell agent() const { return agent_; }
  const std::vector<Cell>& distractors() const { return distractors_; }
  const GridSpec& spec() const { return spec_; }

  // Full-grid ASCII: '#' wall, 'A' agent, 'G' goal, 'd' distractor,
  // 'l' landmark, '.' empty. The agent glyph wins on overlap.
  std::string dump() const;

  void save(ByteWriter& w) const;
  void load(ByteReader& r);

 private:
  enum CellBits : std::uint8_t { kWall = 1, kGoal = 2, kLandmark = 4 };

  bool in_bounds(int r, int c) const {
    return r >= 0 && r < spec_.height && c >= 0 && c < spec_.width;
  }
  bool is_wall(int r, int c) const {
    return !in_bounds(r, c) || (static_cast<std::uint8_t>(cells_[r * spec_.width + c]) & kWall);
  }
  void render();

  GridSpec spec_;
  std::vector<std::uint8_t> cells_;
  std::vector<std::uint8_t> distractor_mask_;
  Rng rng_;
  Cell agent_;
  std::vector<Cell> distractors_;
  int steps_ = 0;
  double return_ = 0.0;
  bool done_ = false;
  Observation obs_{};
};

// Convenience form: a fresh environment seeded with rng_seed, reset once.
Observation reset(const GridSpec& spec, std::uint64_t rng_seed);

// W independent workers. Worker w draws from the stream
// derive_seed(master_seed, Stream::kEnvironment, w).
class VecEnv {
 public:
  VecEnv(const GridSpec& spec, int workers, std::uint64_t master_seed);

  int size() const { return static_cast<int>(envs_.size()); }
  std::vector<Observation> observations() const;
  const GridEnv& worker(int w) const { return envs_.at(w); }

  // Steps every worker; a worker whose episode ends is reset and reports
  // done=true on the terminal transition. Throws UsageError on a length
  // mismatch.
  std::vector<Transition> step(std::span<const int> actions);

  void save(ByteWriter& w) const;
  void load(ByteReader& r);

 private:
  std::vector<GridEnv> envs_;
};

}  // namespace eipolab::gridworld

#endif  // EIPOLAB_GRIDWORLD_HPP_
