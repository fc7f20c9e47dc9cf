#pragma once

#include "confocal/dynamics.hpp"

#include <string>
#include <vector>

namespace confocal {

/// Five spectral parameters away from the axes (and from 0 for the ellipsoid
/// kinds): below the smallest axis, inside the gaps, and above the largest.
std::vector<double> probe_lambdas(const SystemSpec& sys, std::size_t count = 5);

struct NamedValue {
  std::string name;
  double value;
};

/// Every conserved quantity of the kind at s: H; the f_i for distinct axes or
/// f~_s, P_s, P_{s,ij}, L_{s,k} otherwise; g_i and J where defined; det L at
/// each lambda.
std::vector<NamedValue> conserved_quantities(const SystemSpec& sys, const PhaseState& s,
                                             const std::vector<double>& lambdas);

/// |v - v0| / max(|v0|, 1e-3 (1 + |scale|)).
double relative_drift(double v, double v0, double scale);

struct DriftReport {
  std::vector<std::string> names;
  Vec max_drift;        ///< per quantity, relative
  double max_constraint = 0.0;
  double worst() const { return max_drift.size() ? max_drift.maxCoeff() : 0.0; }
};

/// Drift of conserved_quantities along a trajectory, relative to the first
/// state; the floor scale is 2H at the first state.
DriftReport conservation_drift(const SystemSpec& sys, const std::vector<PhaseState>& traj,
                               const std::vector<double>& lambdas);

}  // namespace confocal
