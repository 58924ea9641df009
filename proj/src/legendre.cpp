#include "hjred/legendre.hpp"

#include <algorithm>

namespace hjred {

namespace {

Expr determinant(const std::vector<std::vector<Expr>>& m) {
    std::size_t n = m.size();
    if (n == 0) return Expr::one();
    if (n == 1) return m[0][0];
    if (n == 2)
        return sub(mul(m[0][0], m[1][1]), mul(m[0][1], m[1][0]));
    std::vector<Expr> parts;
    for (std::size_t j = 0; j < n; ++j) {
        if (m[0][j].is_zero_literal()) continue;
        std::vector<std::vector<Expr>> minor;
        minor.reserve(n - 1);
        for (std::size_t i = 1; i < n; ++i) {
            std::vector<Expr> row;
            row.reserve(n - 1);
            for (std::size_t k = 0; k < n; ++k)
                if (k != j) row.push_back(m[i][k]);
            minor.push_back(std::move(row));
        }
        Expr term = mul(m[0][j], determinant(minor));
        parts.push_back(j % 2 == 0 ? term : neg(term));
    }
    return make_sum(std::move(parts));
}

// next k-combination of indices 0..n-1 in lexicographic order
bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
    std::size_t k = idx.size();
    for (std::size_t i = k; i-- > 0;) {
        if (idx[i] < n - k + i) {
            ++idx[i];
            for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
            return true;
        }
    }
    return false;
}

bool contains_any(const Expr& e, const std::vector<SymbolId>& syms) {
    for (SymbolId s : syms)
        if (e.contains(s)) return true;
    return false;
}

} // namespace

HessianPartition hessian_partition(const Model& m, const ZeroTestContext& ctx) {
    std::size_t n = m.coordinates.size();
    if (n > 12)
        throw LegendreError("hessian partition supports at most 12 coordinates");

    std::vector<SymbolId> velocities;
    for (SymbolId c : m.coordinates) velocities.push_back(m.velocity_of(c));

    HessianPartition out;
    out.hessian.assign(n, std::vector<Expr>(n, Expr::zero()));
    for (std::size_t i = 0; i < n; ++i) {
        Expr di = differentiate(m.lagrangian, velocities[i]);
        for (std::size_t j = 0; j < n; ++j)
            out.hessian[i][j] = differentiate(di, velocities[j]);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (contains_any(out.hessian[i][j], velocities))
                throw LegendreError(
                    "unsupported Lagrangian: velocity Hessian entry depends on a "
                    "velocity (momenta are not linear in the velocities)");

    for (std::size_t k = n + 1; k-- > 0;) {
        if (k == 0) break;
        std::vector<std::size_t> idx(k);
        for (std::size_t i = 0; i < k; ++i) idx[i] = i;
        do {
            std::vector<std::vector<Expr>> sub(k, std::vector<Expr>(k, Expr::zero()));
            for (std::size_t a = 0; a < k; ++a)
                for (std::size_t b = 0; b < k; ++b) sub[a][b] = out.hessian[idx[a]][idx[b]];
            Expr det = determinant(sub);
            TriState z = is_zero(det, ctx);
            if (z == TriState::NonZero) {
                out.rank = static_cast<int>(k);
                for (std::size_t i = 0, a = 0; i < n; ++i) {
                    if (a < k && idx[a] == i) {
                        out.dynamical.push_back(m.coordinates[i]);
                        ++a;
                    } else {
                        out.degenerate.push_back(m.coordinates[i]);
                    }
                }
                return out;
            }
            if (z == TriState::Undecided)
                throw LegendreError(
                    "hessian partition undecided: cannot decide invertibility of the "
                    "minor with determinant " +
                    to_string(det, *m.table));
        } while (next_combination(idx, n));
    }
    // zero rank: every coordinate is degenerate
    out.rank = 0;
    out.degenerate = m.coordinates;
    return out;
}

std::vector<CanonicalPair> HJSystem::extended_pairs() const {
    std::vector<CanonicalPair> pairs;
    for (const DynamicalCoordinate& d : dynamical)
        pairs.push_back({d.coordinate, d.momentum});
    for (const ParameterCoordinate& p : parameters)
        pairs.push_back({p.parameter, p.momentum});
    return pairs;
}

HJSystem build_hj_system(const Model& m, std::uint64_t seed) {
    HJSystem sys;
    sys.model = m;
    sys.seed = seed;
    ZeroTestContext ctx = m.zero_context(seed);

    HessianPartition part = hessian_partition(m, ctx);
    sys.rank = part.rank;

    std::vector<SymbolId> all_velocities;
    for (SymbolId c : m.coordinates) all_velocities.push_back(m.velocity_of(c));

    // solve p_a = dL/dv_a as a linear system for the dynamical velocities
    std::size_t k = part.dynamical.size();
    std::vector<SymbolId> dyn_v;
    for (SymbolId c : part.dynamical) dyn_v.push_back(m.velocity_of(c));

    std::map<SymbolId, Expr> zero_dyn;
    for (SymbolId v : dyn_v) zero_dyn.emplace(v, Expr::zero());

    // augmented system: rows W_ab * v_b = p_a - c_a
    std::vector<std::vector<Expr>> aug(k, std::vector<Expr>(k + 1, Expr::zero()));
    for (std::size_t a = 0; a < k; ++a) {
        Expr pdef = differentiate(m.lagrangian, dyn_v[a]);
        for (std::size_t b = 0; b < k; ++b)
            aug[a][b] = differentiate(pdef, dyn_v[b]);
        Expr c_a = substitute(pdef, zero_dyn);
        aug[a][k] =
            sub(Expr::symbol(m.momentum_of(part.dynamical[a])), c_a);
    }

    // Gauss-Jordan with provably nonzero pivots
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = k;
        for (std::size_t r = col; r < k; ++r) {
            if (is_zero(aug[r][col], ctx) == TriState::NonZero) {
                pivot = r;
                break;
            }
        }
        if (pivot == k)
            throw LegendreError("velocity solve: no usable pivot in column " +
                                std::to_string(col));
        std::swap(aug[col], aug[pivot]);
        Expr inv = make_power(aug[col][col], Rational(-1));
        for (std::size_t c = col; c <= k; ++c) aug[col][c] = mul(aug[col][c], inv);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col || aug[r][col].is_zero_literal()) continue;
            Expr f = aug[r][col];
            for (std::size_t c = col; c <= k; ++c)
                aug[r][c] = sub(aug[r][c], mul(f, aug[col][c]));
        }
    }

    std::map<SymbolId, Expr> w_bindings;
    for (std::size_t a = 0; a < k; ++a) {
        DynamicalCoordinate d;
        d.coordinate = part.dynamical[a];
        d.velocity = dyn_v[a];
        d.momentum = m.momentum_of(part.dynamical[a]);
        d.solved_velocity = aug[a][k];
        w_bindings.emplace(d.velocity, d.solved_velocity);
        sys.dynamical.push_back(std::move(d));
    }

    // degenerate momenta definitions give the primary Hamiltonians H_mu
    std::vector<std::pair<SymbolId, Expr>> h_mu; // (coordinate, H_mu)
    for (SymbolId c : part.degenerate) {
        Expr pdef = substitute(differentiate(m.lagrangian, m.velocity_of(c)), w_bindings);
        if (contains_any(pdef, all_velocities))
            throw LegendreError("momentum of degenerate coordinate " +
                                m.table->name(c) +
                                " retains a velocity after elimination");
        h_mu.emplace_back(c, neg(pdef));
    }

    // H0 = p_a w_a + (-H_mu) vdot_mu - L|_{vdot_a = w_a}
    std::vector<Expr> parts;
    for (const DynamicalCoordinate& d : sys.dynamical)
        parts.push_back(mul(Expr::symbol(d.momentum), d.solved_velocity));
    for (const auto& [c, h] : h_mu)
        parts.push_back(mul(neg(h), Expr::symbol(m.velocity_of(c))));
    parts.push_back(neg(substitute(m.lagrangian, w_bindings)));
    Expr h0 = make_sum(std::move(parts));

    // the degenerate-velocity coefficients must cancel identically
    for (SymbolId v : all_velocities) {
        if (!h0.contains(v)) continue;
        auto powers = collect_powers(h0, v);
        for (const auto& [deg, coeff] : powers) {
            if (deg == 0) continue;
            if (is_zero(coeff, ctx) != TriState::Zero)
                throw LegendreError(
                    "internal consistency failure: H0 retains velocity " +
                    m.table->name(v) + " with coefficient " + to_string(coeff, *m.table));
        }
        h0 = powers.count(0) ? powers.at(0) : Expr::zero();
    }
    sys.h0 = h0;

    // parameters: evolution parameter first, then each degenerate coordinate
    {
        ParameterCoordinate p0;
        p0.parameter = m.time;
        p0.momentum = m.time_momentum;
        p0.h = sys.h0;
        p0.extended = add(Expr::symbol(p0.momentum), sys.h0);
        sys.parameters.push_back(std::move(p0));
    }
    for (const auto& [c, h] : h_mu) {
        ParameterCoordinate pm;
        pm.parameter = c;
        pm.momentum = m.momentum_of(c);
        pm.h = h;
        pm.extended = add(Expr::symbol(pm.momentum), h);
        sys.parameters.push_back(std::move(pm));
    }
    return sys;
}

const Expr& EomTable::coefficient(SymbolId var, std::size_t param) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (variables[i] == var) return coefficients[i][param];
    throw std::out_of_range("no flow row for requested variable");
}

EomTable equations_of_motion(const HJSystem& sys) {
    EomTable t;
    std::size_t np = sys.parameters.size();

    for (const DynamicalCoordinate& d : sys.dynamical) t.variables.push_back(d.coordinate);
    for (const DynamicalCoordinate& d : sys.dynamical) t.variables.push_back(d.momentum);
    for (const ParameterCoordinate& p : sys.parameters) t.variables.push_back(p.momentum);

    t.coefficients.assign(t.variables.size(), std::vector<Expr>(np, Expr::zero()));

    for (std::size_t al = 0; al < np; ++al) {
        const Expr& hp = sys.parameters[al].extended;
        std::size_t row = 0;
        for (const DynamicalCoordinate& d : sys.dynamical)
            t.coefficients[row++][al] = differentiate(hp, d.momentum);
        for (const DynamicalCoordinate& d : sys.dynamical)
            t.coefficients[row++][al] = neg(differentiate(hp, d.coordinate));
        for (const ParameterCoordinate& p : sys.parameters)
            t.coefficients[row++][al] = neg(differentiate(hp, p.parameter));
    }

    // dz = (-H_alpha + p_a dH'_alpha/dp_a) dt_alpha
    for (std::size_t al = 0; al < np; ++al) {
        std::vector<Expr> parts{neg(sys.parameters[al].h)};
        for (const DynamicalCoordinate& d : sys.dynamical)
            parts.push_back(mul(Expr::symbol(d.momentum),
                                differentiate(sys.parameters[al].extended, d.momentum)));
        t.dz.push_back(make_sum(std::move(parts)));
    }
    return t;
}

} // namespace hjred
