#pragma once

#include "hjred/model.hpp"

namespace hjred {

struct LegendreError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct HessianPartition {
    int rank = 0;
    std::vector<SymbolId> dynamical;
    std::vector<SymbolId> degenerate;
    std::vector<std::vector<Expr>> hessian; // d2L/dv_i dv_j over declared coordinates
};

/// Velocity Hessian rank analysis. Picks the largest coordinate subset whose
/// velocity sub-Hessian has a provably nonzero symbolic determinant under
/// the model assumptions, preferring earliest-declared coordinates.
HessianPartition hessian_partition(const Model& m, const ZeroTestContext& ctx);

struct DynamicalCoordinate {
    SymbolId coordinate;
    SymbolId velocity;
    SymbolId momentum;
    Expr solved_velocity; // w_a(q, p, possibly degenerate velocities)
};

struct ParameterCoordinate {
    SymbolId parameter; // evolution parameter first, then each degenerate coordinate
    SymbolId momentum;
    Expr h;        // H_alpha: the canonical Hamiltonian for index 0, else H_mu
    Expr extended; // H'_alpha = p_alpha + H_alpha
};

/// Result of the singular Legendre transform: the coordinate partition, the
/// solved velocities, the canonical Hamiltonian h0 (velocity-free) and the
/// extended Hamiltonians of the associated set of Hamilton-Jacobi equations.
struct HJSystem {
    Model model;
    int rank = 0;
    std::vector<DynamicalCoordinate> dynamical;
    std::vector<ParameterCoordinate> parameters;
    Expr h0;
    std::uint64_t seed = 42;

    const SymbolTable& table() const { return *model.table; }
    ZeroTestContext zero_context() const { return model.zero_context(seed); }

    /// Canonical pairs of the extended phase space: every (q_a, p_a) plus
    /// every (t_beta, p_beta) including the evolution parameter.
    std::vector<CanonicalPair> extended_pairs() const;
};

HJSystem build_hj_system(const Model& m, std::uint64_t seed = 42);

/// Coefficient tables of the total differential equations: for each phase
/// variable v and parameter t_alpha, the coefficient of dt_alpha in dv, and
/// the action differential coefficients dz.
struct EomTable {
    std::vector<SymbolId> variables;              // q_a..., p_a..., p_beta...
    std::vector<std::vector<Expr>> coefficients;  // [variable][parameter]
    std::vector<Expr> dz;                         // [parameter]

    const Expr& coefficient(SymbolId var, std::size_t param) const;
};

EomTable equations_of_motion(const HJSystem& sys);

} // namespace hjred
