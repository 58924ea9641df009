#pragma once

#include <iosfwd>

#include "hjred/chain.hpp"

namespace hjred {

struct DynamicsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Piecewise-linear curve in parameter space. Each waypoint lists the values
/// of every parameter in system order (evolution parameter first).
struct ParameterPath {
    std::vector<std::vector<double>> waypoints;

    /// Straight span of the evolution parameter from 0 to `span` with all
    /// other parameters pinned at `fixed` (indexed from parameter 1).
    static ParameterPath time_span(double span,
                                   const std::vector<double>& fixed = {});
};

struct TrajectorySample {
    double s;
    std::vector<double> params;
    std::vector<double> q;
    std::vector<double> p; // dynamical momenta then parameter momenta
    double z;
};

struct Trajectory {
    std::vector<SymbolId> q_vars;
    std::vector<SymbolId> p_vars;
    std::vector<SymbolId> param_vars;
    std::vector<TrajectorySample> samples;
    std::vector<double> constraint_drift; // max |c| per report constraint

    double max_drift() const {
        double m = 0;
        for (double d : constraint_drift) m = std::max(m, d);
        return m;
    }
};

/// Fixed-step classical RK4 along the path parameter, with the action z
/// integrated alongside the flow. The initial point must satisfy every
/// report constraint to 1e-10; parameter momenta missing from `init` are
/// filled with their constrained values p_alpha = -H_alpha. Frozen
/// parameters must stay constant along the path. No on-surface projection
/// is performed; drift is recorded, never corrected.
Trajectory integrate(const HJSystem& sys, const ChainReport& report,
                     const std::map<SymbolId, double>& init,
                     const ParameterPath& path, double step);

/// |z(end) - integral of L(q, qdot) dt| with the velocities reconstructed
/// from the flow equations; the path must vary only the evolution parameter.
double action_residual(const Trajectory& traj, const HJSystem& sys);

struct GaugeOrbitResult {
    double observable_mismatch; // invariants must agree between orderings
    double orbit_alignment;     // sine of the angle between dx and the flow
    double coordinate_shift;    // |dx|
};

/// Integrates parameter legs in both orders (evolution parameter first vs
/// second) and compares gauge-invariant observables and the direction of
/// the coordinate discrepancy. Requires exactly one unfrozen parameter
/// besides the evolution parameter.
GaugeOrbitResult gauge_orbit_check(const HJSystem& sys, const ChainReport& report,
                                   const std::map<SymbolId, double>& init,
                                   double delta_t0, double delta_par, double step);

/// CSV with header s,<params>,<qs>,<ps>,z; 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const SymbolTable& table);

} // namespace hjred
