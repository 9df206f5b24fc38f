#pragma once

#include <cstdint>

#include "qho/autonomous.hpp"

namespace qho::fixtures {

// Bundled demonstration problems used by the CLI registry and the test
// suites. The numeric content is frozen; fingerprint() guards against edits.

struct SingleOscillator {
  RealMatrix theta;
  RealMatrix energy;
  RealMatrix sigma;
  double tau = 0.0;
};

/// Two-mode oscillator (order 4) with positive definite energy matrix.
SingleOscillator ex1();

/// One-mode plant with a mirrored observer, penalty and error weights.
AutonomousObserverProblem ex2();

/// FNV-1a hash of the canonical 12-digit serialization of both fixtures.
std::uint64_t fingerprint();

}  // namespace qho::fixtures
