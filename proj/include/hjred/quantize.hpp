#pragma once

#include <Eigen/Dense>

#include "hjred/chain.hpp"

namespace hjred::quantize {

struct QuantizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Uniform 1-D lattice over [-extent, extent] with n points including the
/// endpoints.
struct Grid {
    int n = 0;
    double extent = 0;

    double h() const { return 2.0 * extent / (n - 1); }
    double point(int i) const { return -extent + i * h(); }
};

struct GridOperator {
    Grid grid;
    Eigen::MatrixXd mat;
    bool hermitian = true;
};

/// Discretizations of p^2 = -d2/dx2 on the grid. The sinc basis is
/// spectrally accurate; the 3-point stencil converges as h^2 and is what
/// the sliced path-integral comparison is calibrated against.
enum class KineticScheme { SincBasis, Stencil3 };

GridOperator kinetic_operator(const Grid& grid, KineticScheme scheme);

/// H = p^2 + q^2 on the grid.
GridOperator oscillator_operator(const Grid& grid,
                                 KineticScheme scheme = KineticScheme::SincBasis);

/// Ascending eigenvalues of p^2 + q^2.
std::vector<double> oscillator_spectrum(const Grid& grid,
                                        KineticScheme scheme = KineticScheme::SincBasis);

/// A wavefunction together with derivative rules for its opaque atoms and
/// the formal imaginary unit (reduced by i^2 = -1 after application).
struct WaveContext {
    Expr wavefunction;
    DerivRules rules;
    SymbolId imaginary = kNoSymbol;
};

/// Applies the constraint as an operator with p -> -i d/dq (momenta acting
/// first) and returns the residual; the constraint is annihilating iff the
/// residual normalizes to zero. The constraint must be polynomial in the
/// momenta of `pairs`.
Expr check_annihilation(const Expr& constraint, const WaveContext& wave,
                        std::span<const CanonicalPair> pairs);

/// Reduced Hamiltonian recognized as scale * (alpha*(p^2+q^2) + beta)^expo.
struct ReducedForm {
    Rational scale;
    double alpha;
    double beta;
    Rational expo;

    double g(double lambda) const;
    /// admissible iff the radicand is nonnegative (within tolerance)
    bool admissible(double lambda, double tol = 1e-9) const {
        return alpha * lambda + beta >= -tol;
    }
    bool unbounded() const { return alpha > 0; }
};

/// Recognizes c*(B)^(k/2) with B linear in p^2 and q^2 with equal
/// coefficients; constants must have numeric values (from the model or the
/// supplied overrides).
std::optional<ReducedForm> recognize_reduced_form(
    const Expr& reduced_h0, SymbolId q, SymbolId p, const SymbolTable& table,
    const std::map<SymbolId, double>& constant_values);

struct SpectrumResult {
    std::vector<double> lambdas;     // oscillator eigenvalues (ascending)
    std::vector<double> levels;      // g(lambda) where admissible
    std::vector<bool> admissible;    // per lambda
    int admissible_count = 0;        // on the computed grid
    bool unbounded = false;          // infinitely many admissible levels exist
};

/// Functional-calculus quantization of the reduced Hamiltonian: g applied
/// to the oscillator spectrum, filtered by g's natural domain.
SpectrumResult reduced_spectrum(const ReducedForm& form, const Grid& grid,
                                KineticScheme scheme = KineticScheme::SincBasis);

/// CSV rows n,lambda_n,g_lambda_n,admissible for every grid level.
void write_spectrum_csv(std::ostream& out, const SpectrumResult& r);

} // namespace hjred::quantize
