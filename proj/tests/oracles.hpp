#pragma once

// Test-side oracles, kept independent of the library code paths they check:
// finite differences for derivatives, quadrature for action integrals, and a
// seeded random expression corpus.

#include <random>

#include "hjred/expr.hpp"
#include "hjred/parser.hpp"

namespace oracles {

using namespace hjred;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    double u = static_cast<double>(rng() >> 11) * 0x1p-53;
    return lo + u * (hi - lo);
}

/// Central finite difference d e / d s at `point`.
inline double finite_difference(const Expr& e, SymbolId s,
                                std::map<SymbolId, double> point,
                                std::size_t table_size, double h = 1e-5) {
    point[s] += h;
    double up = eval_num(e, point, table_size);
    point[s] -= 2 * h;
    double dn = eval_num(e, point, table_size);
    return (up - dn) / (2 * h);
}

/// Random polynomial of total degree <= 3 over the pool symbols.
inline Expr random_polynomial(std::mt19937_64& rng, const std::vector<SymbolId>& pool) {
    int terms = 1 + static_cast<int>(rng() % 4);
    std::vector<Expr> out;
    for (int t = 0; t < terms; ++t) {
        std::vector<Expr> fs;
        fs.push_back(Expr::integer(static_cast<std::int64_t>(rng() % 9) - 4));
        int deg = static_cast<int>(rng() % 4);
        for (int d = 0; d < deg; ++d)
            fs.push_back(Expr::symbol(pool[rng() % pool.size()]));
        out.push_back(make_product(std::move(fs)));
    }
    return make_sum(std::move(out));
}

/// Polynomial plus an optional sqrt(1 + poly^2) factor; the radicand is
/// kept positive so numeric sampling never leaves the domain.
inline Expr random_poly_sqrt(std::mt19937_64& rng, const std::vector<SymbolId>& pool) {
    Expr p = random_polynomial(rng, pool);
    if (rng() % 2 == 0) return p;
    Expr inner = random_polynomial(rng, pool);
    Expr rad = add(Expr::one(), mul(inner, inner));
    return add(p, mul(random_polynomial(rng, pool), sqrt(rad)));
}

inline std::map<SymbolId, double> random_point(std::mt19937_64& rng,
                                               const std::vector<SymbolId>& pool,
                                               double lo = -2, double hi = 2) {
    std::map<SymbolId, double> pt;
    for (SymbolId s : pool) pt[s] = uniform(rng, lo, hi);
    return pt;
}

/// Structural corpus: arbitrary nested sums/products/powers, including
/// negative and half-integer exponents. Not evaluation-safe; used for
/// round-trip and idempotence checks only.
inline Expr random_structured(std::mt19937_64& rng, const std::vector<SymbolId>& pool,
                              int depth = 3) {
    if (depth == 0 || rng() % 4 == 0) {
        if (rng() % 3 == 0)
            return Expr::rational(Rational(static_cast<std::int64_t>(rng() % 13) - 6,
                                           1 + static_cast<std::int64_t>(rng() % 4)));
        return Expr::symbol(pool[rng() % pool.size()]);
    }
    switch (rng() % 3) {
        case 0: {
            std::vector<Expr> ts;
            for (int i = 0, n = 2 + rng() % 3; i < n; ++i)
                ts.push_back(random_structured(rng, pool, depth - 1));
            return make_sum(std::move(ts));
        }
        case 1: {
            std::vector<Expr> fs;
            for (int i = 0, n = 2 + rng() % 2; i < n; ++i)
                fs.push_back(random_structured(rng, pool, depth - 1));
            return make_product(std::move(fs));
        }
        default: {
            static const Rational exps[] = {Rational(-2), Rational(-1), Rational(1, 2),
                                            Rational(3, 2), Rational(2), Rational(3)};
            Expr base = random_structured(rng, pool, depth - 1);
            try {
                return make_power(base, exps[rng() % 6]);
            } catch (const DomainError&) {
                return base; // e.g. a zero base raised to a negative power
            }
        }
    }
}

} // namespace oracles
