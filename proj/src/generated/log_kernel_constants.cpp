// Generated by tools/oracles/compute_kappa.py. Do not edit.
#include "equilib/potential.hpp"

namespace equilib {

const double kCellSelfLogConstant = 0.80508672195008715;
const double kSegmentSelfLogConstant = 1.5;

}  // namespace equilib
