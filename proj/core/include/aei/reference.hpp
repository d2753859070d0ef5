#pragma once

// High-accuracy reference solutions from an adaptive Dormand-Prince 5(4)
// pair applied to the first-order form ẋ = v, v̇ = (1/ε)B·v + F(x).

#include <vector>

#include "aei/integrators.hpp"
#include "aei/model.hpp"

namespace aei {

struct ReferenceOptions {
  double tol = 1e-12;    // absolute and relative local error tolerance
  double safety = 0.9;
  double max_growth = 5.0;
  double min_shrink = 0.2;
  long max_steps = 50'000'000;
};

struct ReferenceStats {
  long accepted = 0;
  long rejected = 0;
};

// States at each requested time (sorted ascending, all >= 0). Steps are
// clipped to land on every output time, so no interpolation is involved.
// Throws StepSizeUnderflow when the controller wants a step below
// 1e-14·T_max.
std::vector<State> reference_states(const Problem& prob,
                                    const std::vector<double>& times,
                                    const ReferenceOptions& opts = {},
                                    ReferenceStats* stats = nullptr);

// Reference trajectory sampled at the requested times.
Trajectory reference_solve(const Problem& prob,
                           const std::vector<double>& times, double tol);

// Reference state at a single time.
State reference_state(const Problem& prob, double t_end, double tol);

}  // namespace aei
