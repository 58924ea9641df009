#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hjred/pathint.hpp"

using namespace hjred::pathint;

TEST_CASE("slice kernel: diffusion normalization and mass damping") {
    Grid g{128, 8.0};
    Kernel k0 = slice_kernel(0.0, 1.0, 0.1, g);
    double h = g.h();
    // interior row sums approximate the unit integral of the heat kernel
    for (int i = 40; i < 88; ++i) {
        double rs = 0;
        for (int j = 0; j < g.n; ++j) rs += h * k0.mat(i, j);
        CHECK(rs == doctest::Approx(1.0).epsilon(1e-9));
    }

    Kernel k1 = slice_kernel(1.0, 1.0, 0.1, g);
    CHECK((k1.mat - std::exp(-0.05) * k0.mat).cwiseAbs().maxCoeff() <= 1e-15);

    // exact symmetry by construction
    CHECK((k1.mat - k1.mat.transpose()).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(slice_kernel(1.0, 1.0, 0.0, g), PathIntError);
    CHECK_THROWS_AS(slice_kernel(1.0, -1.0, 0.1, g), PathIntError);
}

TEST_CASE("composition approximates the exact Chapman-Kolmogorov product") {
    Grid g{128, 8.0};
    Kernel one = slice_kernel(1.0, 1.0, 0.2, g);
    Kernel two = compose(slice_kernel(1.0, 1.0, 0.1, g), 2);
    CHECK(two.slices == 2);
    CHECK(two.beta == doctest::Approx(0.2));
    // compare away from the boundary where the truncated integral converges
    double werr = 0;
    for (int i = 24; i < 104; ++i)
        for (int j = 24; j < 104; ++j)
            werr = std::max(werr, std::abs(two.mat(i, j) - one.mat(i, j)));
    CHECK(werr <= 1e-7);

    CHECK(compose(one, 1).mat == one.mat);
    CHECK_THROWS_AS(compose(one, 0), PathIntError);

    // composition is associative up to rounding
    Kernel q = slice_kernel(1.0, 1.0, 0.05, g);
    Kernel via2 = compose(compose(q, 2), 2);
    Kernel via4 = compose(q, 4);
    CHECK((via2.mat - via4.mat).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("Euclidean kernels stay real, symmetric and positive under composition") {
    // parameters chosen so no entry underflows to zero
    Grid g{64, 2.0};
    Kernel k = slice_kernel(1.0, 1.0, 0.02, g);
    Kernel c = compose(k, 4);
    CHECK((c.mat - c.mat.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            CHECK(std::isfinite(c.mat(i, j)));
            CHECK(c.mat(i, j) > 0.0);
        }
}

TEST_CASE("sliced kernel converges to the operator exponential at first order") {
    Grid g{128, 8.0};
    double m = 1.0, e = 1.0, beta = 1.0;
    auto err_at = [&](int slices) {
        Kernel k = compose(slice_kernel(m, e, beta / slices, g), slices);
        return compare_to_operator(k, m, e, beta, g);
    };
    double e32 = err_at(32), e64 = err_at(64), e128 = err_at(128);
    CHECK(e64 < 1e-2);
    double r1 = e64 / e32, r2 = e128 / e64;
    CHECK(r1 >= 0.4);
    CHECK(r1 <= 0.6);
    CHECK(r2 >= 0.4);
    CHECK(r2 <= 0.6);
}

TEST_CASE("e and beta enter only through their product") {
    Grid g{128, 8.0};
    Kernel a = compose(slice_kernel(1.0, 1.0, 1.0 / 64, g), 64);
    Kernel b = compose(slice_kernel(1.0, 0.5, 2.0 / 64, g), 64);
    CHECK((a.mat - b.mat).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("beta = 0 compares as the identity") {
    Grid g{64, 6.0};
    Kernel k = slice_kernel(1.0, 1.0, 0.1, g);
    CHECK(compare_to_operator(k, 1.0, 1.0, 0.0, g) <= 1e-12);
}
