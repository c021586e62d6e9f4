//==============================================================================
// fixture.hpp
// Shared small-grid objects for the unit tests (dx = 1/32: N = 2048, L = 64).
// Built lazily once per process.
//==============================================================================
#pragma once

#include "halfwave/ground_state.hpp"
#include "halfwave/linearized.hpp"
#include "halfwave/profiles.hpp"

namespace fx {

constexpr int kN = 2048;
constexpr double kL = 64.0;

const hw::GridPtr& grid();
const hw::GroundState& ground_state();
const hw::LinearizedOperator& op();
const hw::KernelElements& kernel();
const hw::ProfileSet& profiles();

}  // namespace fx
