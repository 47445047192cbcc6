#include "eipolab/gridworld.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace eipolab::gridworld {

namespace {

std::string cell_str(const Cell& c) {
  return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
}

// Binary de Bruijn sequence of order n (length 2^n): every n-bit window of
// the cyclic sequence occurs exactly once.
std::vector<int> de_bruijn_bits(int n) {
  std::vector<int> a(2 * n + 1, 0);
  std::vector<int> seq;
  auto db = [&](auto&& self, int t, int p) -> void {
    if (t > n) {
      if (n % p == 0) {
        for (int j = 1; j <= p; ++j) seq.push_back(a[j]);
      }
      return;
    }
    a[t] = a[t - p];
    self(self, t + 1, p);
    for (int j = a[t - p] + 1; j < 2; ++j) {
      a[t] = j;
      self(self, t + 1, t);
    }
  };
  db(db, 1, 1);
  return seq;
}

}  // namespace

void GridSpec::validate() const {
  if (height < 1 || width < 1) {
    throw ConfigError("grid dimensions must be positive");
  }
  if (max_episode_steps <= 0) {
    throw ConfigError("max_episode_steps must be > 0");
  }
  auto inside = [&](const Cell& c) {
    return c.row >= 0 && c.row < height && c.col >= 0 && c.col < width;
  };
  auto check_all = [&](const std::vector<Cell>& cells, const char* what) {
    for (const auto& c : cells) {
      if (!inside(c)) {
        throw ConfigError(std::string(what) + " cell " + cell_str(c) +
                          " out of bounds");
      }
    }
  };
  check_all(walls, "wall");
  check_all(goal_cells, "goal");
  check_all(corridor_cells, "corridor");
  check_all(landmark_cells, "landmark");
  if (!inside(start)) throw ConfigError("start cell out of bounds");
  std::set<Cell> wall_set(walls.begin(), walls.end());
  if (wall_set.contains(start)) throw ConfigError("start cell is a wall");
  std::set<Cell> goals(goal_cells.begin(), goal_cells.end());
  std::set<Cell> corridor(corridor_cells.begin(), corridor_cells.end());
  if (corridor.size() != corridor_cells.size()) {
    throw ConfigError("corridor cells contain duplicates");
  }
  for (const auto& c : corridor) {
    if (goals.contains(c)) {
      throw ConfigError("goal and corridor cells overlap at " + cell_str(c));
    }
  }
  if (n_distractors < 0 ||
      static_cast<std::size_t>(n_distractors) > corridor_cells.size()) {
    throw ConfigError("n_distractors must be in [0, |corridor_cells|]");
  }
}

GridSpec make_corridor(const CorridorParams& params) {
  const int h = params.height;
  const int w = params.width;
  if (h < 5 || w < 4) {
    throw ConfigError("corridor map needs height >= 5 and width >= 4");
  }
  GridSpec spec;
  spec.height = h;
  spec.width = w;
  for (int c = 0; c < w; ++c) {
    spec.walls.push_back({0, c});
    spec.walls.push_back({h - 1, c});
  }
  for (int r = 1; r < h - 1; ++r) {
    spec.walls.push_back({r, 0});
    spec.walls.push_back({r, w - 1});
  }
  // Divider above the corridor, open only above the start cell.
  const int divider = h - 3;
  for (int c = 2; c < w - 1; ++c) spec.walls.push_back({divider, c});
  for (int c = 1; c < w - 1; ++c) spec.corridor_cells.push_back({h - 2, c});
  spec.start = {h - 2, 1};
  spec.goal_cells = {{1, w - 2}};
  spec.n_distractors = params.n_distractors;
  spec.max_episode_steps = params.max_episode_steps;
  spec.goal_reward = 1.0;
  spec.goal_terminates = false;
  spec.validate();
  return spec;
}

GridSpec make_sparse_chain(int length, double terminal_reward,
                           int max_episode_steps) {
  if (length < 2) throw ConfigError("sparse chain length must be >= 2");
  GridSpec spec;
  spec.height = 1;
  spec.width = length;
  spec.start = {0, 0};
  spec.goal_cells = {{0, length - 1}};
  spec.goal_reward = terminal_reward;
  spec.goal_terminates = true;
  spec.max_episode_steps = max_episode_steps;
  const auto bits = de_bruijn_bits(5);
  for (int c = 1; c + 1 < length; ++c) {
    if (bits[static_cast<std::size_t>(c - 1) % bits.size()] == 0) {
      spec.landmark_cells.push_back({0, c});
    }
  }
  spec.validate();
  return spec;
}

GridEnv::GridEnv(GridSpec spec, std::uint64_t rng_seed)
    : spec_(std::move(spec)), rng_(rng_seed) {
  spec_.validate();
  cells_.assign(static_cast<std::size_t>(spec_.height * spec_.width), 0);
  distractor_mask_.assign(cells_.size(), 0);
  auto mark = [&](const std::vector<Cell>& cs, std::uint8_t bit) {
    for (const auto& c : cs) cells_[c.row * spec_.width + c.col] |= bit;
  };
  mark(spec_.walls, kWall);
  mark(spec_.goal_cells, kGoal);
  mark(spec_.landmark_cells, kLandmark);
  done_ = true;
}

const Observation& GridEnv::reset() {
  agent_ = spec_.start;
  steps_ = 0;
  return_ = 0.0;
  done_ = false;
  // Partial Fisher-Yates draw without replacement.
  std::vector<std::size_t> idx(spec_.corridor_cells.size());
  std::iota(idx.begin(), idx.end(), 0);
  distractors_.clear();
  for (int k = 0; k < spec_.n_distractors; ++k) {
    const std::size_t j =
        static_cast<std::size_t>(k) +
        uniform_index(idx.size() - static_cast<std::size_t>(k), rng_);
    std::swap(idx[static_cast<std::size_t>(k)], idx[j]);
    distractors_.push_back(spec_.corridor_cells[idx[static_cast<std::size_t>(k)]]);
  }
  std::fill(distractor_mask_.begin(), distractor_mask_.end(), 0);
  for (const auto& d : distractors_) {
    distractor_mask_[d.row * spec_.width + d.col] = 1;
  }
  render();
  return obs_;
}

void GridEnv::render() {
  obs_.fill(0.0);
  for (int dr = -kCropRadius; dr <= kCropRadius; ++dr) {
    for (int dc = -kCropRadius; dc <= kCropRadius; ++dc) {
      const int r = agent_.row + dr;
      const int c = agent_.col + dc;
      const int cr = dr + kCropRadius;
      const int cc = dc + kCropRadius;
      if (is_wall(r, c)) {
        obs_[obs_index(kWallPlane, cr, cc)] = 1.0;
        continue;
      }
      const auto bits = cells_[r * spec_.width + c];
      if (bits & kGoal) obs_[obs_index(kGoalPlane, cr, cc)] = 1.0;
      if ((bits & kLandmark) || distractor_mask_[r * spec_.width + c]) {
        obs_[obs_index(kDistractorPlane, cr, cc)] = 1.0;
      }
    }
  }
  obs_[obs_index(kAgentPlane, kCropRadius, kCropRadius)] = 1.0;
}

Transition GridEnv::step(int action) {
  if (done_) throw UsageError("step called on a terminated episode");
  if (action < 0 || action >= kNumActions) {
    throw UsageError("action index " + std::to_string(action) +
                     " outside [0, 5)");
  }
  Transition t;
  t.observation = obs_;
  t.action = action;
  int r = agent_.row;
  int c = agent_.col;
  switch (static_cast<Action>(action)) {
    case Action::kUp: --r; break;
    case Action::kDown: ++r; break;
    case Action::kLeft: --c; break;
    case Action::kRight: ++c; break;
    case Action::kNoop: break;
  }
  if (!is_wall(r, c)) agent_ = {r, c};
  ++steps_;
  const bool on_goal = cells_[agent_.row * spec_.width + agent_.col] & kGoal;
  if (on_goal) t.extrinsic_reward = spec_.goal_reward;
  return_ += t.extrinsic_reward;
  done_ = steps_ >= spec_.max_episode_steps || (on_goal && spec_.goal_terminates);
  render();
  t.done = done_;
  t.next_observation = obs_;
  if (done_) {
    t.episode_return = return_;
    t.episode_length = steps_;
  }
  return t;
}

std::string GridEnv::dump() const {
  std::string out;
  for (int r = 0; r < spec_.height; ++r) {
    for (int c = 0; c < spec_.width; ++c) {
      const auto bits = cells_[r * spec_.width + c];
      char ch = '.';
      if (bits & kWall) ch = '#';
      else if (bits & kGoal) ch = 'G';
      else if (distractor_mask_[r * spec_.width + c]) ch = 'd';
      else if (bits & kLandmark) ch = 'l';
      if (agent_.row == r && agent_.col == c) ch = 'A';
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  return out;
}

void GridEnv::save(ByteWriter& w) const {
  w.rng(rng_);
  w.i64(agent_.row);
  w.i64(agent_.col);
  w.u64(distractors_.size());
  for (const auto& d : distractors_) {
    w.i64(d.row);
    w.i64(d.col);
  }
  w.i64(steps_);
  w.f64(return_);
  w.boolean(done_);
}

void GridEnv::load(ByteReader& r) {
  r.rng(rng_);
  agent_.row = static_cast<int>(r.i64());
  agent_.col = static_cast<int>(r.i64());
  distractors_.resize(r.u64());
  std::fill(distractor_mask_.begin(), distractor_mask_.end(), 0);
  for (auto& d : distractors_) {
    d.row = static_cast<int>(r.i64());
    d.col = static_cast<int>(r.i64());
    distractor_mask_[d.row * spec_.width + d.col] = 1;
  }
  steps_ = static_cast<int>(r.i64());
  return_ = r.f64();
  done_ = r.boolean();
  render();
}

Observation reset(const GridSpec& spec, std::uint64_t rng_seed) {
  GridEnv env(spec, rng_seed);
  return env.reset();
}

VecEnv::VecEnv(const GridSpec& spec, int workers, std::uint64_t master_seed) {
  if (workers < 1) throw ConfigError("worker count must be >= 1");
  envs_.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    envs_.emplace_back(spec, derive_seed(master_seed, Stream::kEnvironment,
                                         static_cast<std::uint64_t>(w)));
    envs_.back().reset();
  }
}

std::vector<Observation> VecEnv::observations() const {
  std::vector<Observation> out;
  out.reserve(envs_.size());
  for (const auto& e : envs_) out.push_back(e.observation());
  return out;
}

std::vector<Transition> VecEnv::step(std::span<const int> actions) {
  if (actions.size() != envs_.size()) {
    throw UsageError("vec_step got " + std::to_string(actions.size()) +
                     " actions for " + std::to_string(envs_.size()) +
                     " workers");
  }
  std::vector<Transition> out;
  out.reserve(envs_.size());
  for (std::size_t w = 0; w < envs_.size(); ++w) {
    out.push_back(envs_[w].step(actions[w]));
    if (out.back().done) envs_[w].reset();
  }
  return out;
}

void VecEnv::save(ByteWriter& w) const {
  w.u64(envs_.size());
  for (const auto& e : envs_) e.save(w);
}

void VecEnv::load(ByteReader& r) {
  if (r.u64() != envs_.size()) {
    throw ConfigError("checkpoint worker count differs from configuration");
  }
  for (auto& e : envs_) e.load(r);
}

}  // namespace eipolab::gridworld
