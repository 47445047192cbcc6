#include "eipolab/config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace eipolab::config {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* what) {
  throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as " + what);
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad_value(key, v, "an unsigned integer");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad_value(key, v, "true/false");
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

struct Field {
  std::string section;
  std::string key;
  std::string comment;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
  // Optional fields are written only when present.
  std::function<bool(const RunConfig&)> present = [](const RunConfig&) { return true; };
  bool required = false;

  std::string full() const { return section + "." + key; }
};

#define EIPO_INT(sec, member, path, comment)                                       \
  Field{sec, member, comment, [](const RunConfig& c) { return std::to_string(c.path); }, \
        [](RunConfig& c, const std::string& v) { c.path = to_int(sec "." member, v); }}
#define EIPO_DBL(sec, member, path, comment)                                        \
  Field{sec, member, comment, [](const RunConfig& c) { return format_double(c.path); }, \
        [](RunConfig& c, const std::string& v) { c.path = to_double(sec "." member, v); }}
#define EIPO_BOOL(sec, member, path, comment)                                     \
  Field{sec, member, comment, [](const RunConfig& c) { return from_bool(c.path); }, \
        [](RunConfig& c, const std::string& v) { c.path = to_bool(sec "." member, v); }}
#define EIPO_OPT_DBL(sec, member, path, comment)                                           \
  Field{sec, member, comment, [](const RunConfig& c) { return format_double(*c.path); },      \
        [](RunConfig& c, const std::string& v) { c.path = to_double(sec "." member, v); },    \
        [](const RunConfig& c) { return c.path.has_value(); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(Field{"run", "name", "label used in run directory names",
                      [](const RunConfig& c) { return c.name; },
                      [](RunConfig& c, const std::string& v) { c.name = v; }});
    f.push_back(Field{"run", "output_dir", "root for run directories; EIPOLAB_OUTPUT_ROOT overrides",
                      [](const RunConfig& c) { return c.output_dir; },
                      [](RunConfig& c, const std::string& v) { c.output_dir = v; }});
    f.push_back(Field{
        "run", "seeds", "at least 5 seeds per comparison (evaluation protocol)",
        [](const RunConfig& c) {
          std::string s;
          for (std::size_t i = 0; i < c.seeds.size(); ++i) {
            if (i) s += ", ";
            s += std::to_string(c.seeds[i]);
          }
          return s;
        },
        [](RunConfig& c, const std::string& v) {
          c.seeds.clear();
          std::stringstream ss(v);
          std::string item;
          while (std::getline(ss, item, ',')) c.seeds.push_back(to_u64("run.seeds", trim(item)));
        }});
    f.push_back(EIPO_INT("run", "iterations", iterations,
                         "desk scale: 400 x 16 x 128 ~ 800k frames (full scale 1563)"));
    f.push_back(EIPO_INT("run", "checkpoint_every", checkpoint_every,
                         "iterations between checkpoints (implementation choice)"));

    Field variant{"algorithm", "variant",
                  "EO | RND | EXT_NORM_RND | DECAY_RND | DECOUPLED_RND | EIPO_RND | EIPO_COUNT",
                  [](const RunConfig& c) { return std::string(baselines::to_string(c.algorithm.variant)); },
                  [](RunConfig& c, const std::string& v) { c.algorithm.variant = baselines::parse_variant(v); }};
    variant.required = true;
    f.push_back(variant);
    f.push_back(EIPO_OPT_DBL("algorithm", "lambda", algorithm.lambda,
                             "intrinsic reward scale, RND default (1.0)"));
    f.push_back(EIPO_OPT_DBL("algorithm", "lambda_min", algorithm.lambda_min,
                             "decay floor (default 0)"));
    f.push_back(EIPO_OPT_DBL("algorithm", "lambda_max", algorithm.lambda_max,
                             "decay start, RND default lambda (1.0)"));
    f.push_back(Field{"algorithm", "decay_iterations", "decay horizon I (default iterations / 2)",
                      [](const RunConfig& c) { return std::to_string(*c.algorithm.decay_iterations); },
                      [](RunConfig& c, const std::string& v) {
                        c.algorithm.decay_iterations = to_int("algorithm.decay_iterations", v);
                      },
                      [](const RunConfig& c) { return c.algorithm.decay_iterations.has_value(); }});
    f.push_back(Field{"algorithm", "decay_printed_formula",
                      "use the increasing clip(i / I * (max - min)) schedule instead of the decreasing one",
                      [](const RunConfig& c) { return from_bool(c.algorithm.decay_printed_formula); },
                      [](RunConfig& c, const std::string& v) {
                        c.algorithm.decay_printed_formula = to_bool("algorithm.decay_printed_formula", v);
                      },
                      [](const RunConfig& c) {
                        return c.algorithm.variant == baselines::Variant::kDecayRND;
                      }});
    f.push_back(EIPO_OPT_DBL("algorithm", "kl_weight", algorithm.kl_weight,
                             "reward-level KL penalty weight (default 1.0)"));

    Field kind{"environment", "kind", "corridor | chain",
               [](const RunConfig& c) { return c.environment.kind; },
               [](RunConfig& c, const std::string& v) { c.environment.kind = v; }};
    kind.required = true;
    f.push_back(kind);
    f.push_back(EIPO_INT("environment", "height", environment.height, "corridor map, desk scale 11x11"));
    f.push_back(EIPO_INT("environment", "width", environment.width, "corridor map, desk scale 11x11"));
    f.push_back(EIPO_INT("environment", "n_distractors", environment.n_distractors,
                         "distractors resampled in the corridor each episode"));
    f.push_back(EIPO_INT("environment", "max_episode_steps", environment.max_episode_steps,
                         "episode time limit (implementation choice)"));
    f.push_back(EIPO_INT("environment", "chain_length", environment.chain_length,
                         "sparse chain length"));
    f.push_back(EIPO_DBL("environment", "terminal_reward", environment.terminal_reward,
                         "sparse chain terminal reward"));

    f.push_back(EIPO_INT("ppo", "workers", ppo.workers, "PPO default 128; desk scale 16"));
    f.push_back(EIPO_INT("ppo", "horizon", ppo.horizon, "PPO default (128)"));
    f.push_back(EIPO_DBL("ppo", "learning_rate", ppo.learning_rate, "PPO default (0.0001)"));
    f.push_back(EIPO_DBL("ppo", "gamma", ppo.gamma, "PPO default (0.99)"));
    f.push_back(EIPO_DBL("ppo", "gae_lambda", ppo.gae_lambda, "PPO default (0.95)"));
    f.push_back(EIPO_INT("ppo", "epochs", ppo.epochs, "PPO default (4)"));
    f.push_back(EIPO_INT("ppo", "minibatches", ppo.minibatches, "PPO default (4)"));
    f.push_back(EIPO_DBL("ppo", "clip_ratio", ppo.clip_ratio, "PPO default (0.1)"));
    f.push_back(EIPO_DBL("ppo", "value_weight", ppo.value_weight, "PPO default (1.0)"));
    f.push_back(EIPO_DBL("ppo", "entropy_weight", ppo.entropy_weight, "PPO default (0.001)"));
    f.push_back(EIPO_DBL("ppo", "max_grad_norm", ppo.max_grad_norm, "PPO default (1.0)"));
    f.push_back(EIPO_BOOL("ppo", "standardize_advantages", ppo.standardize_advantages,
                          "off: payoffs enter the surrogates unscaled"));
    f.push_back(EIPO_INT("ppo", "hidden", ppo.hidden, "MLP backbone width, desk scale"));

    f.push_back(EIPO_DBL("intrinsic", "drop_probability", intrinsic.drop_probability,
                         "RND default (0.25)"));
    f.push_back(EIPO_DBL("intrinsic", "learning_rate", intrinsic.learning_rate, "RND default (0.0001)"));
    f.push_back(EIPO_INT("intrinsic", "hidden", intrinsic.hidden, "RND MLP width, desk scale"));
    f.push_back(EIPO_INT("intrinsic", "embedding", intrinsic.embedding,
                         "RND embedding, 32 instead of 512 at desk scale"));
    f.push_back(EIPO_INT("intrinsic", "obs_warmup_steps", intrinsic.obs_warmup_steps,
                         "random-policy observation-normalizer warmup (standard RND practice)"));
    f.push_back(EIPO_BOOL("intrinsic", "normalize", intrinsic.normalize,
                          "divide bonuses by running std of intrinsic returns"));
    f.push_back(EIPO_BOOL("intrinsic", "episodic", intrinsic.episodic,
                          "intrinsic returns cut at episode end"));

    f.push_back(EIPO_DBL("eipo", "alpha_init", eipo.alpha_init, "EIPO default (0.5)"));
    f.push_back(EIPO_DBL("eipo", "alpha_step", eipo.alpha_step, "EIPO default (0.005)"));
    f.push_back(EIPO_DBL("eipo", "alpha_clip", eipo.alpha_clip, "EIPO default (0.05)"));
    f.push_back(EIPO_BOOL("eipo", "clamp_nonnegative", eipo.clamp_nonnegative,
                          "project alpha onto [0, inf); off by default"));
    f.push_back(EIPO_INT("eipo", "min_stage_length", eipo.min_stage_length,
                         "stage-length guard; 0 disables"));
    return f;
  }();
  return table;
}

#undef EIPO_INT
#undef EIPO_DBL
#undef EIPO_BOOL
#undef EIPO_OPT_DBL

}  // namespace

std::string format_double(double x) { return fmt::format("{}", x); }

gridworld::GridSpec EnvironmentConfig::make_spec() const {
  if (kind == "corridor") {
    return gridworld::make_corridor({height, width, n_distractors, max_episode_steps});
  }
  if (kind == "chain") {
    return gridworld::make_sparse_chain(chain_length, terminal_reward, max_episode_steps);
  }
  throw ConfigError("environment.kind must be 'corridor' or 'chain', got '" + kind + "'");
}

void RunConfig::validate() const {
  if (seeds.empty()) throw ConfigError("run.seeds must list at least one seed");
  if (iterations <= 0) throw ConfigError("run.iterations must be > 0");
  if (checkpoint_every <= 0) throw ConfigError("run.checkpoint_every must be > 0");
  algorithm.validate();
  environment.make_spec().validate();
  if (ppo.workers < 1) throw ConfigError("ppo.workers must be >= 1");
  if (ppo.horizon < 1) throw ConfigError("ppo.horizon must be >= 1");
  if (ppo.epochs < 1) throw ConfigError("ppo.epochs must be >= 1");
  if (ppo.minibatches < 1 || ppo.minibatches > ppo.workers * ppo.horizon) {
    throw ConfigError("ppo.minibatches must lie in [1, workers * horizon]");
  }
  if (!(ppo.learning_rate > 0.0)) throw ConfigError("ppo.learning_rate must be > 0");
  if (!(ppo.gamma >= 0.0 && ppo.gamma <= 1.0)) throw ConfigError("ppo.gamma must lie in [0, 1]");
  if (!(ppo.gae_lambda >= 0.0 && ppo.gae_lambda <= 1.0)) {
    throw ConfigError("ppo.gae_lambda must lie in [0, 1]");
  }
  if (!(ppo.clip_ratio > 0.0 && ppo.clip_ratio < 1.0)) {
    throw ConfigError("ppo.clip_ratio must lie in (0, 1)");
  }
  if (ppo.hidden < 1) throw ConfigError("ppo.hidden must be >= 1");
  if (!(intrinsic.drop_probability >= 0.0 && intrinsic.drop_probability <= 1.0)) {
    throw ConfigError("intrinsic.drop_probability must lie in [0, 1]");
  }
  if (!(intrinsic.learning_rate > 0.0)) throw ConfigError("intrinsic.learning_rate must be > 0");
  if (intrinsic.hidden < 1 || intrinsic.embedding < 1) {
    throw ConfigError("intrinsic.hidden and intrinsic.embedding must be >= 1");
  }
  if (intrinsic.obs_warmup_steps < 0) throw ConfigError("intrinsic.obs_warmup_steps must be >= 0");
  if (!(eipo.alpha_step > 0.0)) throw ConfigError("eipo.alpha_step must be > 0");
  if (!(eipo.alpha_clip > 0.0)) throw ConfigError("eipo.alpha_clip must be > 0");
  if (eipo.min_stage_length < 0) throw ConfigError("eipo.min_stage_length must be >= 0");
  if (algorithm.variant == baselines::Variant::kExtNormRND && ppo.workers < 2) {
    throw ConfigError("EXT_NORM_RND needs ppo.workers >= 2");
  }
}

RunConfig parse_config(std::string_view text) {
  std::map<std::string, const Field*> by_name;
  for (const auto& f : fields()) by_name[f.full()] = &f;
  std::set<std::string> known_sections;
  for (const auto& f : fields()) known_sections.insert(f.section);

  RunConfig cfg;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const std::string where = " (line " + std::to_string(line_no) + ")";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header" + where);
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!known_sections.contains(section)) {
        throw ConfigError("unknown config section '" + section + "'" + where);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'" + where);
    if (section.empty()) throw ConfigError("key outside of any section" + where);
    const std::string key = section + "." + trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto it = by_name.find(key);
    if (it == by_name.end()) throw ConfigError("unknown config key '" + key + "'" + where);
    if (!seen.insert(key).second) throw ConfigError("duplicate config key '" + key + "'" + where);
    try {
      it->second->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(e.what() + where);
    }
  }
  for (const auto& f : fields()) {
    if (f.required && !seen.contains(f.full())) {
      throw ConfigError("missing required config key '" + f.full() + "'");
    }
  }
  cfg.algorithm.fill_defaults(cfg.iterations);
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string write_config(const RunConfig& cfg, bool with_comments) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (!f.present(cfg)) continue;
    if (f.section != section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    if (with_comments) out += "# " + f.comment + "\n";
    out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

void save_config(const RunConfig& cfg, const std::filesystem::path& path, bool with_comments) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path.string());
  out << write_config(cfg, with_comments);
}

}  // namespace eipolab::config
