#include "hjred/pathint.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace hjred::pathint {

Kernel slice_kernel(double m, double e, double dbeta, const Grid& grid) {
    if (!(dbeta > 0)) throw PathIntError("slice width dbeta must be positive");
    if (!(e > 0)) throw PathIntError("einbein e must be positive");
    int n = grid.n;
    Kernel k;
    k.grid = grid;
    k.beta = e * dbeta;
    k.slices = 1;
    k.mat.resize(n, n);
    double var = e * dbeta;
    double norm = 1.0 / std::sqrt(2.0 * M_PI * var);
    double damp = std::exp(-e * m * m * dbeta / 2.0);
    double h = grid.h();
    // build by offset so K is symmetric bit-for-bit
    std::vector<double> row(n);
    for (int d = 0; d < n; ++d) {
        double dx = d * h;
        row[d] = norm * damp * std::exp(-dx * dx / (2.0 * var));
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) k.mat(i, j) = row[std::abs(i - j)];
    return k;
}

Kernel compose(const Kernel& k, int times) {
    if (times < 1) throw PathIntError("compose needs times >= 1");
    Kernel out = k;
    if (times == 1) return out;
    // direct repeated multiplication keeps entries exactly nonnegative
    double h = k.grid.h();
    Eigen::MatrixXd acc = k.mat;
    for (int t = 1; t < times; ++t) acc = h * (acc * k.mat).eval();
    acc = 0.5 * (acc + acc.transpose().eval()); // remove rounding asymmetry
    out.mat = std::move(acc);
    out.beta = k.beta * times;
    out.slices = k.slices * times;
    return out;
}

Eigen::MatrixXd operator_kernel(double m, double e, double beta, const Grid& grid) {
    using namespace quantize;
    GridOperator p2 = kinetic_operator(grid, KineticScheme::Stencil3);
    Eigen::MatrixXd H = 0.5 * e * p2.mat;
    H.diagonal().array() += 0.5 * e * m * m;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    Eigen::VectorXd w = (-beta * es.eigenvalues().array()).exp();
    Eigen::MatrixXd expm = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
    return expm / grid.h(); // kernel units
}

double compare_to_operator(const Kernel& k, double m, double e, double beta,
                           const Grid& grid) {
    if (grid.n != k.grid.n || grid.extent != k.grid.extent)
        throw PathIntError("kernel and comparison grids differ");
    if (beta == 0.0) return 0.0; // both sides are the identity
    Eigen::MatrixXd ref = operator_kernel(m, e, beta, grid);
    return (k.mat - ref).cwiseAbs().maxCoeff();
}

void write_kernel_csv(std::ostream& out, const Kernel& k) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "# grid n=%d extent=%.17g h=%.17g beta=%.17g slices=%d\n",
                  k.grid.n, k.grid.extent, k.grid.h(), k.beta, k.slices);
    out << buf;
    for (int i = 0; i < k.grid.n; ++i) {
        for (int j = 0; j < k.grid.n; ++j) {
            std::snprintf(buf, sizeof buf, j ? ",%.16e" : "%.16e", k.mat(i, j));
            out << buf;
        }
        out << "\n";
    }
}

} // namespace hjred::pathint
