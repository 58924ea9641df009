#include "hjred/quantize.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace hjred::quantize {

GridOperator kinetic_operator(const Grid& grid, KineticScheme scheme) {
    if (grid.n < 16) throw QuantizeError("grid needs at least 16 points");
    int n = grid.n;
    double h = grid.h();
    GridOperator op;
    op.grid = grid;
    op.mat = Eigen::MatrixXd::Zero(n, n);
    switch (scheme) {
        case KineticScheme::Stencil3:
            for (int i = 0; i < n; ++i) {
                op.mat(i, i) = 2.0 / (h * h);
                if (i > 0) op.mat(i, i - 1) = -1.0 / (h * h);
                if (i + 1 < n) op.mat(i, i + 1) = -1.0 / (h * h);
            }
            break;
        case KineticScheme::SincBasis:
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (i == j) {
                        op.mat(i, j) = M_PI * M_PI / (3.0 * h * h);
                    } else {
                        int d = i - j;
                        double sgn = (d % 2 == 0) ? 1.0 : -1.0;
                        op.mat(i, j) = 2.0 * sgn / (static_cast<double>(d) * d * h * h);
                    }
                }
            }
            break;
    }
    op.hermitian = true;
    return op;
}

GridOperator oscillator_operator(const Grid& grid, KineticScheme scheme) {
    GridOperator op = kinetic_operator(grid, scheme);
    for (int i = 0; i < grid.n; ++i) {
        double x = grid.point(i);
        op.mat(i, i) += x * x;
    }
    return op;
}

std::vector<double> oscillator_spectrum(const Grid& grid, KineticScheme scheme) {
    GridOperator op = oscillator_operator(grid, scheme);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.mat);
    const auto& ev = es.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

Expr check_annihilation(const Expr& constraint, const WaveContext& wave,
                        std::span<const CanonicalPair> pairs) {
    if (wave.imaginary == kNoSymbol)
        throw QuantizeError("wave context has no imaginary unit symbol");
    Expr minus_i = mul(Expr::integer(-1), Expr::symbol(wave.imaginary));

    // expand the constraint into monomials and check momentum powers
    std::vector<Expr> terms = constraint.kind() == ExprKind::Sum
                                  ? constraint.kids()
                                  : std::vector<Expr>{constraint};
    std::vector<Expr> out_terms;
    for (const Expr& t : terms) {
        std::vector<Expr> factors =
            t.kind() == ExprKind::Product ? t.kids() : std::vector<Expr>{t};
        std::vector<Expr> prefix;
        std::vector<std::pair<SymbolId, std::int64_t>> momenta; // (coordinate, power)
        for (const Expr& f : factors) {
            SymbolId sym = kNoSymbol;
            std::int64_t deg = 0;
            if (f.kind() == ExprKind::Symbol) {
                sym = f.symbol_id();
                deg = 1;
            } else if (f.kind() == ExprKind::Power &&
                       f.base().kind() == ExprKind::Symbol) {
                sym = f.base().symbol_id();
                if (!f.exponent().is_integer() || f.exponent().is_negative()) deg = -1;
                else deg = f.exponent().num();
            }
            const CanonicalPair* pr = nullptr;
            for (const CanonicalPair& cp : pairs)
                if (sym != kNoSymbol && cp.momentum == sym) pr = &cp;
            if (pr) {
                if (deg < 0)
                    throw QuantizeError(
                        "constraint is not polynomial in the momenta");
                momenta.emplace_back(pr->coordinate, deg);
            } else {
                // non-momentum factors must not hide momenta inside
                for (const CanonicalPair& cp : pairs)
                    if (f.contains(cp.momentum))
                        throw QuantizeError(
                            "constraint is not polynomial in the momenta");
                prefix.push_back(f);
            }
        }
        // momenta act rightmost: apply the derivatives to the wavefunction
        // first, then multiply by the coordinate-dependent prefix
        Expr acc = wave.wavefunction;
        for (const auto& [coord, power] : momenta)
            for (std::int64_t rep = 0; rep < power; ++rep)
                acc = mul(minus_i, differentiate(acc, coord, wave.rules));
        std::vector<Expr> fs = prefix;
        fs.push_back(acc);
        out_terms.push_back(make_product(std::move(fs)));
    }
    Expr residual = make_sum(std::move(out_terms));
    return substitute_power(residual, wave.imaginary, 2, Expr::integer(-1));
}

double ReducedForm::g(double lambda) const {
    double radicand = alpha * lambda + beta;
    if (radicand < 0 && radicand > -1e-12) radicand = 0;
    return scale.to_double() * std::pow(radicand, expo.to_double());
}

std::optional<ReducedForm> recognize_reduced_form(
    const Expr& reduced_h0, SymbolId q, SymbolId p, const SymbolTable& table,
    const std::map<SymbolId, double>& constant_values) {
    // expected shape: [rational] * Power(Sum, k/2)
    Rational scale(1);
    Expr power = reduced_h0;
    if (reduced_h0.kind() == ExprKind::Product) {
        const auto& ks = reduced_h0.kids();
        if (ks.size() != 2 || !ks[0].is_rational()) return std::nullopt;
        scale = ks[0].rational_value();
        power = ks[1];
    }
    if (power.kind() != ExprKind::Power) return std::nullopt;
    const Rational& expo = power.exponent();
    if (expo.is_integer() || expo.is_negative()) return std::nullopt;
    const Expr& base = power.base();

    // base must be alpha*q^2 + alpha*p^2 + beta with numeric beta
    double alpha_q = 0, alpha_p = 0, beta = 0;
    std::vector<Expr> terms =
        base.kind() == ExprKind::Sum ? base.kids() : std::vector<Expr>{base};
    for (const Expr& t : terms) {
        auto grab_sq = [&](const Expr& e, Rational coeff) -> bool {
            if (e.kind() != ExprKind::Power || !(e.exponent() == Rational(2)))
                return false;
            if (e.base().kind() != ExprKind::Symbol) return false;
            SymbolId s = e.base().symbol_id();
            if (s == q) {
                alpha_q += coeff.to_double();
                return true;
            }
            if (s == p) {
                alpha_p += coeff.to_double();
                return true;
            }
            return false;
        };
        if (t.is_rational()) {
            beta += t.rational_value().to_double();
            continue;
        }
        if (grab_sq(t, Rational(1))) continue;
        if (t.kind() == ExprKind::Product && t.kids().size() == 2 &&
            t.kids()[0].is_rational() && grab_sq(t.kids()[1], t.kids()[0].rational_value()))
            continue;
        // a constant-symbol monomial (e.g. R^2) contributes to beta numerically
        bool constant = true;
        for (SymbolId s : t.free_symbols()) {
            if (table.kind(s) != SymbolKind::Constant || !constant_values.count(s)) {
                constant = false;
                break;
            }
        }
        if (!constant) return std::nullopt;
        std::map<SymbolId, double> env(constant_values.begin(), constant_values.end());
        beta += eval_num(t, env, table.size());
    }
    if (alpha_q == 0 || alpha_q != alpha_p) return std::nullopt;

    ReducedForm f;
    f.scale = scale;
    f.alpha = alpha_q;
    f.beta = beta;
    f.expo = expo;
    return f;
}

SpectrumResult reduced_spectrum(const ReducedForm& form, const Grid& grid,
                                KineticScheme scheme) {
    SpectrumResult r;
    r.lambdas = oscillator_spectrum(grid, scheme);
    r.unbounded = form.unbounded();
    for (double l : r.lambdas) {
        bool ok = form.admissible(l);
        r.admissible.push_back(ok);
        if (ok) {
            r.levels.push_back(form.g(l));
            ++r.admissible_count;
        }
    }
    return r;
}

void write_spectrum_csv(std::ostream& out, const SpectrumResult& r) {
    out << "n,lambda_n,g_lambda_n,admissible\n";
    char buf[128];
    std::size_t li = 0;
    for (std::size_t i = 0; i < r.lambdas.size(); ++i) {
        if (r.admissible[i]) {
            std::snprintf(buf, sizeof buf, "%zu,%.16e,%.16e,1\n", i, r.lambdas[i],
                          r.levels[li++]);
        } else {
            std::snprintf(buf, sizeof buf, "%zu,%.16e,,0\n", i, r.lambdas[i]);
        }
        out << buf;
    }
}

} // namespace hjred::quantize
