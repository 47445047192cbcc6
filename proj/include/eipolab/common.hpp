#ifndef EIPOLAB_COMMON_HPP_
#define EIPOLAB_COMMON_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace eipolab {

// Error categories map onto CLI exit codes: configuration and usage errors
// exit with 1, numeric failures with 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

// SplitMix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Named sub-streams of a master seed. Adding a stream or a worker never
// perturbs the seeds of existing ones.
enum class Stream : std::uint64_t {
  kEnvironment = 1,
  kPolicySampling = 2,
  kMinibatch = 3,
  kInit = 4,
  kRndInit = 5,
  kRndDropout = 6,
  kWarmup = 7,
  kBootstrap = 8,
};

constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                    std::uint64_t index = 0) {
  return mix64(mix64(mix64(master) ^ static_cast<std::uint64_t>(stream)) ^
               (index + 1));
}

// Uniform double in [0, 1) from the top 53 bits of one engine draw. Used
// instead of std::uniform_real_distribution so sampling stays a pure
// function of engine state (checkpoints store only the engine).
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Index sampled from a probability vector by inverse CDF.
inline std::size_t sample_categorical(std::span<const double> probs,
                                      Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

inline std::size_t uniform_index(std::size_t n, Rng& rng) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

}  // namespace eipolab

#endif  // EIPOLAB_COMMON_HPP_
