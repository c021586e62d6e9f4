//==============================================================================
// fixture.cpp
//==============================================================================
#include "fixture.hpp"

namespace fx {

const hw::GridPtr& grid() {
  static const hw::GridPtr g = hw::Grid::make(kN, kL);
  return g;
}

const hw::GroundState& ground_state() {
  static const hw::GroundState gs = hw::solve_petviashvili(grid());
  return gs;
}

const hw::LinearizedOperator& op() {
  static const hw::OperatorPtr o = [] {
    hw::LinearizedOptions opt;
    opt.store_dense = false;
    return hw::LinearizedOperator::build(ground_state(), opt);
  }();
  return *o;
}

const hw::KernelElements& kernel() {
  static const hw::KernelElements k = hw::kernel_elements(op());
  return k;
}

const hw::ProfileSet& profiles() {
  static const hw::ProfileSet ps = hw::build_profiles(op());
  return ps;
}

}  // namespace fx
