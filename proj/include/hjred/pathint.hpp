#pragma once

#include "hjred/quantize.hpp"

namespace hjred::pathint {

using quantize::Grid;
using quantize::KineticScheme;

struct PathIntError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Euclidean propagator amplitudes K(x, x') sampled on the grid (kernel
/// units: composition weights entries by the grid spacing h).
struct Kernel {
    Grid grid;
    Eigen::MatrixXd mat;
    double beta = 0;   // total Euclidean span e*dbeta accumulated so far
    int slices = 1;
};

/// Single Euclidean time slice for H0 = (e/2)(p^2 + m^2) in one dimension,
/// with the momentum integral already performed:
///   K(x,x') = (2 pi e dbeta)^(-1/2) exp(-(x-x')^2/(2 e dbeta) - e m^2 dbeta/2)
Kernel slice_kernel(double m, double e, double dbeta, const Grid& grid);

/// h-weighted matrix power: the N-slice discretized path integral.
Kernel compose(const Kernel& k, int times);

/// Kernel of exp(-beta H) with H = (e/2)(p^2 + m^2) built from the 3-point
/// stencil, via eigendecomposition (kernel units).
Eigen::MatrixXd operator_kernel(double m, double e, double beta, const Grid& grid);

/// Maximum entrywise deviation between the composed sliced kernel and the
/// operator exponential kernel.
double compare_to_operator(const Kernel& k, double m, double e, double beta,
                           const Grid& grid);

/// CSV matrix dump with a grid header line.
void write_kernel_csv(std::ostream& out, const Kernel& k);

} // namespace hjred::pathint
