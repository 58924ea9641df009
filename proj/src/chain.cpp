#include "hjred/chain.hpp"

#include <algorithm>
#include <deque>

namespace hjred {

namespace {

bool is_constant_expr(const Expr& e, const SymbolTable& table) {
    for (SymbolId s : e.free_symbols())
        if (table.kind(s) != SymbolKind::Constant) return false;
    return true;
}

// Solvable pivots, momenta before coordinates, in system order.
std::vector<SymbolId> pivot_candidates(const HJSystem& sys) {
    std::vector<SymbolId> out;
    for (const DynamicalCoordinate& d : sys.dynamical) out.push_back(d.momentum);
    for (const ParameterCoordinate& p : sys.parameters) out.push_back(p.momentum);
    for (const DynamicalCoordinate& d : sys.dynamical) out.push_back(d.coordinate);
    for (std::size_t i = 1; i < sys.parameters.size(); ++i)
        out.push_back(sys.parameters[i].parameter);
    return out;
}

// Solve a constraint for a single symbol: linear with rational coefficient,
// or quadratic with no linear term.
std::optional<Relation> solve_relation(const Expr& c, const HJSystem& sys, int source) {
    for (SymbolId s : pivot_candidates(sys)) {
        if (!c.contains(s)) continue;
        std::map<std::int64_t, Expr> powers;
        try {
            powers = collect_powers(c, s);
        } catch (const DomainError&) {
            continue;
        }
        bool only01 = true, only02 = true;
        for (const auto& [deg, coeff] : powers) {
            (void)coeff;
            if (deg != 0 && deg != 1) only01 = false;
            if (deg != 0 && deg != 2) only02 = false;
        }
        Expr c0 = powers.count(0) ? powers.at(0) : Expr::zero();
        if (only01 && powers.count(1) && powers.at(1).is_rational()) {
            Expr repl = div(neg(c0), powers.at(1));
            return Relation{s, 1, repl, source};
        }
        if (only02 && powers.count(2) && powers.at(2).is_rational()) {
            Expr repl = div(neg(c0), powers.at(2));
            return Relation{s, 2, repl, source};
        }
    }
    return std::nullopt;
}

} // namespace

std::vector<Expr> total_differential(const Expr& target, const HJSystem& sys) {
    std::vector<Expr> out;
    out.reserve(sys.parameters.size());
    for (const ParameterCoordinate& par : sys.parameters) {
        const Expr& hp = par.extended;
        std::vector<Expr> parts;
        for (const DynamicalCoordinate& d : sys.dynamical) {
            parts.push_back(mul(differentiate(target, d.coordinate),
                                differentiate(hp, d.momentum)));
            parts.push_back(neg(mul(differentiate(target, d.momentum),
                                    differentiate(hp, d.coordinate))));
        }
        for (const ParameterCoordinate& pb : sys.parameters)
            parts.push_back(neg(mul(differentiate(target, pb.momentum),
                                    differentiate(hp, pb.parameter))));
        parts.push_back(differentiate(target, par.parameter));
        out.push_back(make_sum(std::move(parts)));
    }
    return out;
}

Expr reduce_modulo(const Expr& e, const std::vector<Relation>& relations) {
    Expr cur = e;
    for (int round = 0; round < 8; ++round) {
        Expr next = cur;
        for (const Relation& r : relations) {
            if (r.degree == 1)
                next = substitute(next, {{r.symbol, r.replacement}});
            else
                next = substitute_power(next, r.symbol, r.degree, r.replacement);
        }
        if (next == cur) break;
        cur = next;
    }
    return cur;
}

ChainReport run_chain(const HJSystem& sys) {
    ChainReport report;
    ZeroTestContext ctx = sys.zero_context();
    const SymbolTable& table = sys.table();
    std::size_t np = sys.parameters.size();
    // generated constraints are phase-space functions, so at most 2n of
    // them can be independent
    std::size_t bound = 2 * sys.model.coordinates.size();
    std::size_t generated = 0;

    for (const ParameterCoordinate& p : sys.parameters) {
        Constraint c;
        c.expr = p.extended;
        c.origin = Constraint::Origin::Primary;
        report.constraints.push_back(std::move(c));
        if (auto rel = solve_relation(p.extended, sys,
                                      static_cast<int>(report.constraints.size()) - 1))
            report.relations.push_back(*rel);
    }

    auto matches_existing = [&](const Expr& e) {
        Expr ne = neg(e);
        for (const Constraint& c : report.constraints)
            if (c.expr == e || c.expr == ne) return true;
        return false;
    };

    // Consistency of the primary constraints is examined first, then the
    // Hamiltonian equation, then anything generated, first-in first-out.
    std::deque<std::size_t> queue;
    for (std::size_t i = 1; i < np; ++i) queue.push_back(i);
    queue.push_back(0);

    while (!queue.empty()) {
        std::size_t i = queue.front();
        queue.pop_front();
        std::vector<Expr> diffs = total_differential(report.constraints[i].expr, sys);
        for (std::size_t al = 0; al < np; ++al) {
            SymbolId tpar = sys.parameters[al].parameter;
            if (al > 0 && report.is_frozen(tpar)) continue;
            Expr c = reduce_modulo(diffs[al], report.relations);
            if (c.is_zero_literal()) continue;
            if (matches_existing(c)) continue;
            TriState z = is_zero(c, ctx);
            if (z == TriState::Zero) continue;
            if (al == 0) {
                if (is_constant_expr(c, table)) {
                    report.status = ChainStatus::Inconsistent;
                    report.status_detail =
                        "total differential of constraint " + std::to_string(i) +
                        " has the nonvanishing constant coefficient " +
                        to_string(c, table) + " along d" + table.name(tpar);
                    return report;
                }
                Constraint cn;
                cn.expr = neg(c);
                cn.origin = Constraint::Origin::Generated;
                cn.parent = static_cast<int>(i);
                cn.parameter = tpar;
                report.constraints.push_back(std::move(cn));
                std::size_t idx = report.constraints.size() - 1;
                if (auto rel = solve_relation(report.constraints[idx].expr, sys,
                                              static_cast<int>(idx)))
                    report.relations.push_back(*rel);
                queue.push_back(idx);
                if (++generated > bound) {
                    report.status = ChainStatus::Undecided;
                    report.status_detail =
                        "constraint generation exceeded the phase-space bound of " +
                        std::to_string(bound);
                    return report;
                }
            } else {
                if (z == TriState::NonZero) {
                    report.frozen.push_back({tpar, c, static_cast<int>(i)});
                } else {
                    report.status = ChainStatus::Undecided;
                    report.status_detail =
                        "cannot decide whether the d" + table.name(tpar) +
                        " coefficient " + to_string(c, table) + " of constraint " +
                        std::to_string(i) + " vanishes";
                    return report;
                }
            }
        }
    }

    // Verification sweep: with all constraints and frozen parameters in
    // place, every surviving total differential must vanish.
    for (std::size_t i = 0; i < report.constraints.size(); ++i) {
        std::vector<Expr> diffs = total_differential(report.constraints[i].expr, sys);
        for (std::size_t al = 0; al < np; ++al) {
            if (al > 0 && report.is_frozen(sys.parameters[al].parameter)) continue;
            Expr c = reduce_modulo(diffs[al], report.relations);
            if (c.is_zero_literal() || matches_existing(c)) continue;
            if (is_zero(c, ctx) == TriState::Zero) continue;
            report.status = ChainStatus::Undecided;
            report.status_detail =
                "verification sweep: residual coefficient " + to_string(c, table) +
                " in the total differential of constraint " + std::to_string(i);
            return report;
        }
    }
    report.status = ChainStatus::Integrable;

    // Solve constraints quadratic in each frozen parameter into +- branches
    // and restrict h0 to them.
    for (const FrozenParameter& f : report.frozen) {
        bool appears = false;
        std::optional<std::size_t> solved;
        for (std::size_t j = 0; j < report.constraints.size() && !solved; ++j) {
            const Expr& ce = report.constraints[j].expr;
            if (!ce.contains(f.parameter)) continue;
            appears = true;
            std::map<std::int64_t, Expr> powers;
            try {
                powers = collect_powers(ce, f.parameter);
            } catch (const DomainError&) {
                continue;
            }
            bool only02 = true;
            for (const auto& [deg, coeff] : powers) {
                (void)coeff;
                if (deg != 0 && deg != 2) only02 = false;
            }
            if (!only02 || !powers.count(2)) continue;
            Expr c2 = powers.at(2);
            Expr c0 = powers.count(0) ? powers.at(0) : Expr::zero();
            Expr u = div(neg(c0), c2);
            for (int sign : {+1, -1}) {
                Branch b;
                b.parameter = f.parameter;
                b.sign = sign;
                b.value = mul(Expr::integer(sign), sqrt(u));
                b.constraint = static_cast<int>(j);
                Expr resid = substitute(ce, {{f.parameter, b.value}});
                if (!resid.is_zero_literal())
                    throw ChainError("branch " + to_string(b.value, table) +
                                     " does not annihilate its source constraint");
                if (u.is_rational()) {
                    b.reduced_h0 = substitute(sys.h0, {{f.parameter, b.value}});
                } else {
                    Expr h = substitute_power(sys.h0, f.parameter, 2, u);
                    auto hp = collect_powers(h, f.parameter);
                    for (const auto& [deg, coeff] : hp) {
                        (void)coeff;
                        if (deg != 0 && deg != 1)
                            throw ChainError("unexpected parameter degree while "
                                             "reducing h0 to a branch");
                    }
                    Expr a = hp.count(0) ? hp.at(0) : Expr::zero();
                    Expr bb = hp.count(1) ? hp.at(1) : Expr::zero();
                    auto [q, r] = poly_divmod(bb, u);
                    Expr radical =
                        add(mul(q, make_power(u, Rational(3, 2))),
                            mul(r, make_power(u, Rational(1, 2))));
                    b.reduced_h0 = add(a, mul(Expr::integer(sign), radical));
                }
                report.branches.push_back(std::move(b));
            }
            solved = j;
        }
        if (appears && !solved) {
            // a parameter pinned linearly (e.g. q = 0) has a single branch
            for (std::size_t j = 0; j < report.constraints.size() && !solved; ++j) {
                const Expr& ce = report.constraints[j].expr;
                if (!ce.contains(f.parameter)) continue;
                std::map<std::int64_t, Expr> powers;
                try {
                    powers = collect_powers(ce, f.parameter);
                } catch (const DomainError&) {
                    continue;
                }
                bool only01 = true;
                for (const auto& [deg, coeff] : powers) {
                    (void)coeff;
                    if (deg != 0 && deg != 1) only01 = false;
                }
                if (!only01 || !powers.count(1) || !powers.at(1).is_rational()) continue;
                Expr c0 = powers.count(0) ? powers.at(0) : Expr::zero();
                Branch b;
                b.parameter = f.parameter;
                b.sign = +1;
                b.value = div(neg(c0), powers.at(1));
                b.constraint = static_cast<int>(j);
                b.reduced_h0 = substitute(sys.h0, {{f.parameter, b.value}});
                report.branches.push_back(std::move(b));
                solved = j;
            }
        }
        if (appears && !solved)
            throw ChainError("branch solve unsupported: no constraint is quadratic "
                             "in the frozen parameter " + table.name(f.parameter));
    }
    return report;
}

void classify(ChainReport& report, const HJSystem& sys) {
    if (report.status == ChainStatus::Inconsistent)
        throw ChainError("cannot classify constraints of an inconsistent chain");
    ZeroTestContext ctx = sys.zero_context();
    const SymbolTable& table = sys.table();
    std::vector<CanonicalPair> pairs = sys.extended_pairs();

    std::size_t n = report.constraints.size();
    std::vector<std::vector<BracketEntry::Verdict>> verdicts(
        n, std::vector<BracketEntry::Verdict>(n, BracketEntry::Verdict::Zero));

    report.brackets.clear();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            Expr b = poisson_bracket(report.constraints[i].expr,
                                     report.constraints[j].expr, pairs);
            Expr red = reduce_modulo(b, report.relations);
            BracketEntry entry;
            entry.a = static_cast<int>(i);
            entry.b = static_cast<int>(j);
            entry.reduced = red;
            TriState z = red.is_zero_literal() ? TriState::Zero : is_zero(red, ctx);
            if (z == TriState::Zero) {
                entry.verdict = BracketEntry::Verdict::Zero;
            } else if (z == TriState::Undecided) {
                entry.verdict = BracketEntry::Verdict::Undecided;
            } else if (is_constant_expr(red, table)) {
                entry.verdict = BracketEntry::Verdict::Constant;
            } else {
                entry.verdict = BracketEntry::Verdict::NonConstant;
            }
            verdicts[i][j] = verdicts[j][i] = entry.verdict;
            report.brackets.push_back(std::move(entry));
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        bool undecided = false, nonconstant = false, constant = false;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            switch (verdicts[i][j]) {
                case BracketEntry::Verdict::Undecided: undecided = true; break;
                case BracketEntry::Verdict::NonConstant: nonconstant = true; break;
                case BracketEntry::Verdict::Constant: constant = true; break;
                case BracketEntry::Verdict::Zero: break;
            }
        }
        report.constraints[i].classification =
            undecided     ? Classification::Unresolved
            : nonconstant ? Classification::SecondClass
            : constant    ? Classification::Central
                          : Classification::FirstClass;
    }
}

Expr dirac_bracket(const Expr& a, const Expr& b,
                   const std::vector<Expr>& second_class_constraints,
                   const HJSystem& sys) {
    std::vector<CanonicalPair> pairs = sys.extended_pairs();
    std::size_t n = second_class_constraints.size();
    if (n == 0 || n % 2 != 0)
        throw ChainError("Dirac bracket needs an even number of constraints");

    // C must be an invertible matrix of plain rational constants
    std::vector<std::vector<Rational>> cmat(n, std::vector<Rational>(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Expr cij = poisson_bracket(second_class_constraints[i],
                                       second_class_constraints[j], pairs);
            if (!cij.is_rational())
                throw ChainError("Dirac bracket requires a constant bracket matrix; "
                                 "got " + to_string(cij, sys.table()));
            cmat[i][j] = cij.rational_value();
        }

    // exact inverse by Gauss-Jordan
    std::vector<std::vector<Rational>> inv(n, std::vector<Rational>(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = Rational(1);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && cmat[piv][col].is_zero()) ++piv;
        if (piv == n) throw ChainError("Dirac bracket: constraint matrix is singular");
        std::swap(cmat[col], cmat[piv]);
        std::swap(inv[col], inv[piv]);
        Rational d = cmat[col][col];
        for (std::size_t c = 0; c < n; ++c) {
            cmat[col][c] = cmat[col][c] / d;
            inv[col][c] = inv[col][c] / d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || cmat[r][col].is_zero()) continue;
            Rational f = cmat[r][col];
            for (std::size_t c = 0; c < n; ++c) {
                cmat[r][c] = cmat[r][c] - f * cmat[col][c];
                inv[r][c] = inv[r][c] - f * inv[col][c];
            }
        }
    }

    std::vector<Expr> parts{poisson_bracket(a, b, pairs)};
    for (std::size_t i = 0; i < n; ++i) {
        Expr abr = poisson_bracket(a, second_class_constraints[i], pairs);
        if (abr.is_zero_literal()) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (inv[i][j].is_zero()) continue;
            Expr cb = poisson_bracket(second_class_constraints[j], b, pairs);
            parts.push_back(
                neg(mul(abr, mul(Expr::rational(inv[i][j]), cb))));
        }
    }
    return make_sum(std::move(parts));
}

} // namespace hjred
