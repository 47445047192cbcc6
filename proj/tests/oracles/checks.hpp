#ifndef EIPOLAB_TESTS_CHECKS_HPP_
#define EIPOLAB_TESTS_CHECKS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "eipolab/config.hpp"

// Invariant and oracle suites shared by the acceptance binary and
// `eipolab selftest`. Each suite returns one result per sub-check.
namespace eipolab::checks {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

bool all_passed(const std::vector<CheckResult>& results);

// 7x7 corridor, 4 workers x 32 steps, 16-unit networks: a few seconds per
// hundred iterations.
config::RunConfig tiny_config(baselines::Variant variant, int iterations);

// U identities, alpha step bound, clipped_term pessimism.
std::vector<CheckResult> algebraic_identities(std::uint64_t seed = 0);
// GAE, probability of improvement and stage alternation against oracles.
std::vector<CheckResult> oracle_equivalence(std::uint64_t seed = 0);
// Central finite differences of every loss.
std::vector<CheckResult> gradient_checks(std::uint64_t seed = 0);
// RND at lambda 0 against EO; EIPO primary term at alpha 0.
std::vector<CheckResult> degeneracy_checks(std::uint64_t seed = 0);

}  // namespace eipolab::checks

#endif  // EIPOLAB_TESTS_CHECKS_HPP_
