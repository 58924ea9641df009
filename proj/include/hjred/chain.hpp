#pragma once

#include "hjred/legendre.hpp"

namespace hjred {

struct ChainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Classification { Unresolved, FirstClass, SecondClass, Central };

struct Constraint {
    Expr expr;
    enum class Origin { Primary, Generated } origin = Origin::Primary;
    int parent = -1;               // index of the constraint whose differential spawned this
    SymbolId parameter = kNoSymbol; // the differential dt_alpha it multiplied
    Classification classification = Classification::Unresolved;
};

/// A solved relation used to reduce expressions on the constraint surface:
/// symbol^degree is replaced by `replacement`.
struct Relation {
    SymbolId symbol;
    int degree;
    Expr replacement;
    int source; // constraint index
};

struct FrozenParameter {
    SymbolId parameter;
    Expr coefficient; // the provably nonzero dt coefficient that forced dt = 0
    int source;       // constraint whose differential froze it
};

struct Branch {
    SymbolId parameter;
    int sign; // +1 or -1
    Expr value;      // +-sqrt(...) solved from the constraint
    int constraint;  // index of the solved constraint
    Expr reduced_h0; // h0 restricted to the branch
};

enum class ChainStatus { Integrable, Inconsistent, Undecided };

struct BracketEntry {
    int a, b;     // constraint indices
    Expr reduced; // Poisson bracket reduced modulo the constraint set
    enum class Verdict { Zero, Constant, NonConstant, Undecided } verdict;
};

struct ChainReport {
    std::vector<Constraint> constraints;
    std::vector<Relation> relations;
    std::vector<FrozenParameter> frozen;
    std::vector<Branch> branches;
    std::vector<BracketEntry> brackets;
    ChainStatus status = ChainStatus::Undecided;
    std::string status_detail;

    bool is_frozen(SymbolId parameter) const {
        for (const FrozenParameter& f : frozen)
            if (f.parameter == parameter) return true;
        return false;
    }
};

/// Coefficients of dt_alpha in the total differential of `target`, obtained
/// by chaining the flow equations through every phase variable. Equals the
/// Poisson bracket {target, H'_alpha} over the extended pairs.
std::vector<Expr> total_differential(const Expr& target, const HJSystem& sys);

/// Reduces an expression modulo the solved constraint relations (applied to
/// a fixed point).
Expr reduce_modulo(const Expr& e, const std::vector<Relation>& relations);

/// The consistency worklist: differentials of every extended Hamiltonian are
/// reduced modulo the accumulated constraints; nonvanishing time
/// coefficients become new constraints, provably nonzero parameter
/// coefficients freeze their parameters, and quadratic constraints in frozen
/// parameters are solved into +- branches with h0 restricted to each.
ChainReport run_chain(const HJSystem& sys);

/// Pairwise constraint brackets over the extended phase space; fills each
/// constraint's classification.
void classify(ChainReport& report, const HJSystem& sys);

/// Dirac bracket {a, b} - {a, c_i} Cinv_ij {c_j, b} for the case where the
/// constraint bracket matrix C is constant and invertible.
Expr dirac_bracket(const Expr& a, const Expr& b,
                   const std::vector<Expr>& second_class_constraints,
                   const HJSystem& sys);

} // namespace hjred
