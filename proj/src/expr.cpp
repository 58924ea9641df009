#include "hjred/expr.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <random>

namespace hjred {

namespace {

std::size_t hash_combine(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t node_hash(const detail::ExprNode& n) {
    std::size_t h = static_cast<std::size_t>(n.kind) * 0x100000001b3ULL;
    h = hash_combine(h, static_cast<std::size_t>(n.value.num()));
    h = hash_combine(h, static_cast<std::size_t>(n.value.den()));
    h = hash_combine(h, n.symbol);
    h = hash_combine(h, static_cast<std::size_t>(n.exponent.num()));
    h = hash_combine(h, static_cast<std::size_t>(n.exponent.den()));
    for (const Expr& k : n.kids) h = hash_combine(h, k.hash());
    return h;
}

struct DepthGuard {
    static thread_local int depth;
    DepthGuard() {
        if (++depth > 256) {
            --depth;
            throw std::runtime_error("expression normalization recursion limit");
        }
    }
    ~DepthGuard() { --depth; }
};
thread_local int DepthGuard::depth = 0;

} // namespace

// ---------------------------------------------------------------------------
// node construction

struct ExprBuilder {
    static Expr make(detail::ExprNode&& n) {
        n.hash = node_hash(n);
        return Expr(std::make_shared<const detail::ExprNode>(std::move(n)));
    }
};

Expr Expr::rational(const Rational& r) {
    detail::ExprNode n;
    n.kind = ExprKind::Rational;
    n.value = r;
    return ExprBuilder::make(std::move(n));
}

Expr Expr::symbol(SymbolId id) {
    detail::ExprNode n;
    n.kind = ExprKind::Symbol;
    n.symbol = id;
    return ExprBuilder::make(std::move(n));
}

const Expr& Expr::zero() {
    static const Expr z = Expr::rational(Rational(0));
    return z;
}

const Expr& Expr::one() {
    static const Expr o = Expr::rational(Rational(1));
    return o;
}

namespace {

Expr raw_power(const Expr& base, const Rational& expo) {
    assert(!expo.is_zero() && !expo.is_one());
    detail::ExprNode n;
    n.kind = ExprKind::Power;
    n.exponent = expo;
    n.kids = {base};
    return ExprBuilder::make(std::move(n));
}

Expr raw_nary(ExprKind kind, std::vector<Expr> kids) {
    assert(kids.size() >= 2);
    detail::ExprNode n;
    n.kind = kind;
    n.kids = std::move(kids);
    return ExprBuilder::make(std::move(n));
}

} // namespace

// ---------------------------------------------------------------------------
// comparison

int Expr::compare(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return 0;
    auto rank = [](ExprKind k) {
        switch (k) {
            case ExprKind::Rational: return 0;
            case ExprKind::Symbol: return 1;
            case ExprKind::Power: return 2;
            case ExprKind::Product: return 3;
            case ExprKind::Sum: return 4;
        }
        return 5;
    };
    int ra = rank(a.kind()), rb = rank(b.kind());
    if (ra != rb) return ra < rb ? -1 : 1;
    switch (a.kind()) {
        case ExprKind::Rational: {
            if (a.rational_value() == b.rational_value()) return 0;
            return a.rational_value() < b.rational_value() ? -1 : 1;
        }
        case ExprKind::Symbol:
            if (a.symbol_id() == b.symbol_id()) return 0;
            return a.symbol_id() < b.symbol_id() ? -1 : 1;
        case ExprKind::Power: {
            int c = compare(a.base(), b.base());
            if (c != 0) return c;
            if (a.exponent() == b.exponent()) return 0;
            return a.exponent() < b.exponent() ? -1 : 1;
        }
        case ExprKind::Product:
        case ExprKind::Sum: {
            std::size_t n = std::min(a.kids().size(), b.kids().size());
            for (std::size_t i = 0; i < n; ++i) {
                int c = compare(a.kids()[i], b.kids()[i]);
                if (c != 0) return c;
            }
            if (a.kids().size() == b.kids().size()) return 0;
            return a.kids().size() < b.kids().size() ? -1 : 1;
        }
    }
    return 0;
}

bool Expr::equal(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (a.hash() != b.hash()) return false;
    return compare(a, b) == 0;
}

void Expr::free_symbols(std::set<SymbolId>& out) const {
    switch (kind()) {
        case ExprKind::Rational: return;
        case ExprKind::Symbol: out.insert(symbol_id()); return;
        default:
            for (const Expr& k : kids()) k.free_symbols(out);
    }
}

bool Expr::contains(SymbolId id) const {
    switch (kind()) {
        case ExprKind::Rational: return false;
        case ExprKind::Symbol: return symbol_id() == id;
        default:
            for (const Expr& k : kids())
                if (k.contains(id)) return true;
            return false;
    }
}

// ---------------------------------------------------------------------------
// power construction

namespace {

// Exact integer r-th root, or nullopt.
std::optional<std::int64_t> int_root(std::int64_t v, std::int64_t r) {
    if (v < 0) {
        if (r % 2 == 0) return std::nullopt;
        auto m = int_root(-v, r);
        if (!m) return std::nullopt;
        return -*m;
    }
    if (v <= 1) return v;
    auto ipow = [](std::int64_t b, std::int64_t e) -> std::optional<std::int64_t> {
        __int128 acc = 1;
        for (std::int64_t i = 0; i < e; ++i) {
            acc *= b;
            if (acc > INT64_MAX) return std::nullopt;
        }
        return static_cast<std::int64_t>(acc);
    };
    std::int64_t guess = static_cast<std::int64_t>(
        std::llround(std::pow(static_cast<double>(v), 1.0 / static_cast<double>(r))));
    for (std::int64_t c = std::max<std::int64_t>(1, guess - 2); c <= guess + 2; ++c) {
        auto p = ipow(c, r);
        if (p && *p == v) return c;
    }
    return std::nullopt;
}

std::optional<Rational> exact_root(const Rational& w, std::int64_t r) {
    auto n = int_root(w.num(), r);
    if (!n) return std::nullopt;
    auto d = int_root(w.den(), r);
    if (!d) return std::nullopt;
    return Rational(*n, *d);
}

Expr distribute_mul(const Expr& a, const Expr& b) {
    auto terms = [](const Expr& e) -> std::vector<Expr> {
        if (e.kind() == ExprKind::Sum) return e.kids();
        return {e};
    };
    std::vector<Expr> out;
    for (const Expr& ta : terms(a))
        for (const Expr& tb : terms(b)) out.push_back(make_product({ta, tb}));
    return make_sum(std::move(out));
}

} // namespace

Expr make_power(const Expr& b, const Rational& q) {
    DepthGuard guard;
    if (q.is_zero()) return Expr::one();
    if (q.is_one()) return b;
    switch (b.kind()) {
        case ExprKind::Rational: {
            const Rational& v = b.rational_value();
            if (v.is_zero()) {
                if (q.is_negative()) throw DomainError("zero raised to a negative power");
                return Expr::zero();
            }
            if (v.is_one()) return Expr::one();
            if (q.is_integer()) return Expr::rational(v.pow_int(q.num()));
            Rational w = v.pow_int(q.num());
            if (auto root = exact_root(w, q.den())) return Expr::rational(*root);
            if (!v.is_negative()) {
                // split off the integer part of the exponent
                std::int64_t i = q.num() / q.den();
                if (q.is_negative() && q.num() % q.den() != 0) --i;
                if (i != 0) {
                    Rational frac = q - Rational(i);
                    return make_product(
                        {Expr::rational(v.pow_int(i)), raw_power(b, frac)});
                }
            }
            return raw_power(b, q);
        }
        case ExprKind::Symbol:
            return raw_power(b, q);
        case ExprKind::Power: {
            // (u^s)^q collapses unless s is an integer and q is fractional
            // (where (u^2)^(1/2) = |u| would be lost).
            const Rational& s = b.exponent();
            if (q.is_integer() || !s.is_integer()) return make_power(b.base(), s * q);
            return raw_power(b, q);
        }
        case ExprKind::Product: {
            std::vector<Expr> parts;
            parts.reserve(b.kids().size());
            for (const Expr& f : b.kids()) parts.push_back(make_power(f, q));
            return make_product(std::move(parts));
        }
        case ExprKind::Sum: {
            if (q.is_integer() && !q.is_negative()) {
                Expr acc = b;
                for (std::int64_t k = 1; k < q.num(); ++k) acc = distribute_mul(acc, b);
                return acc;
            }
            return raw_power(b, q);
        }
    }
    return raw_power(b, q);
}

// ---------------------------------------------------------------------------
// product construction

Expr make_product(std::vector<Expr> factors) {
    DepthGuard guard;
    Rational coeff(1);
    std::map<Expr, Rational, ExprLess> exps;
    std::vector<Expr> work = std::move(factors);

    for (int round = 0; round < 64; ++round) {
        // gather
        while (!work.empty()) {
            Expr f = work.back();
            work.pop_back();
            switch (f.kind()) {
                case ExprKind::Rational:
                    coeff = coeff * f.rational_value();
                    break;
                case ExprKind::Product:
                    for (const Expr& k : f.kids()) work.push_back(k);
                    break;
                case ExprKind::Power: {
                    auto [it, fresh] = exps.emplace(f.base(), f.exponent());
                    if (!fresh) it->second = it->second + f.exponent();
                    break;
                }
                default: {
                    auto [it, fresh] = exps.emplace(f, Rational(1));
                    if (!fresh) it->second = it->second + Rational(1);
                    break;
                }
            }
        }
        if (coeff.is_zero()) return Expr::zero();

        // refold entries whose power now simplifies
        bool changed = false;
        for (auto it = exps.begin(); it != exps.end();) {
            const Expr& base = it->first;
            const Rational& e = it->second;
            bool keep;
            if (e.is_zero()) {
                changed = true;
                it = exps.erase(it);
                continue;
            } else if (e.is_one()) {
                keep = base.kind() != ExprKind::Power &&
                       base.kind() != ExprKind::Rational;
            } else {
                Expr folded = make_power(base, e);
                keep = folded.kind() == ExprKind::Power &&
                       Expr::equal(folded.base(), base) && folded.exponent() == e;
                if (!keep) {
                    changed = true;
                    work.push_back(folded);
                    it = exps.erase(it);
                    continue;
                }
            }
            if (!keep) {
                changed = true;
                work.push_back(make_power(base, e));
                it = exps.erase(it);
                continue;
            }
            ++it;
        }
        if (!changed) break;
    }
    if (!work.empty())
        throw std::runtime_error("product normalization did not converge");
    if (coeff.is_zero()) return Expr::zero();

    // split plain sums (to be distributed) from atomic factors
    std::vector<Expr> atoms;
    std::vector<Expr> sums;
    for (const auto& [base, e] : exps) {
        if (e.is_one() && base.kind() == ExprKind::Sum)
            sums.push_back(base);
        else if (e.is_one())
            atoms.push_back(base);
        else
            atoms.push_back(raw_power(base, e));
    }

    if (!sums.empty()) {
        std::vector<std::vector<Expr>> combos{{}};
        for (const Expr& s : sums) {
            std::vector<std::vector<Expr>> next;
            for (const auto& c : combos)
                for (const Expr& t : s.kids()) {
                    next.push_back(c);
                    next.back().push_back(t);
                }
            if (next.size() > 20000)
                throw std::runtime_error("product expansion too large");
            combos = std::move(next);
        }
        std::vector<Expr> terms;
        terms.reserve(combos.size());
        for (auto& c : combos) {
            std::vector<Expr> fs = atoms;
            fs.push_back(Expr::rational(coeff));
            for (Expr& t : c) fs.push_back(std::move(t));
            terms.push_back(make_product(std::move(fs)));
        }
        return make_sum(std::move(terms));
    }

    std::sort(atoms.begin(), atoms.end(), ExprLess{});
    if (atoms.empty()) return Expr::rational(coeff);
    if (coeff.is_one() && atoms.size() == 1) return atoms[0];
    std::vector<Expr> kids;
    if (!coeff.is_one()) kids.push_back(Expr::rational(coeff));
    for (Expr& a : atoms) kids.push_back(std::move(a));
    if (kids.size() == 1) return kids[0];
    return raw_nary(ExprKind::Product, std::move(kids));
}

// ---------------------------------------------------------------------------
// sum construction

namespace {

// Splits a (non-sum) normalized term into coefficient and monomial part;
// the monomial is empty for pure rationals.
std::pair<Rational, std::optional<Expr>> split_term(const Expr& t) {
    switch (t.kind()) {
        case ExprKind::Rational:
            return {t.rational_value(), std::nullopt};
        case ExprKind::Product: {
            const auto& ks = t.kids();
            if (ks[0].is_rational()) {
                std::vector<Expr> rest(ks.begin() + 1, ks.end());
                Expr mono = rest.size() == 1 ? rest[0]
                                             : raw_nary(ExprKind::Product, std::move(rest));
                return {ks[0].rational_value(), mono};
            }
            return {Rational(1), t};
        }
        default:
            return {Rational(1), t};
    }
}

} // namespace

Expr make_sum(std::vector<Expr> terms) {
    DepthGuard guard;
    Rational constant(0);
    std::map<Expr, Rational, ExprLess> collected;

    std::vector<Expr> work = std::move(terms);
    while (!work.empty()) {
        Expr t = work.back();
        work.pop_back();
        if (t.kind() == ExprKind::Sum) {
            for (const Expr& k : t.kids()) work.push_back(k);
            continue;
        }
        auto [c, mono] = split_term(t);
        if (!mono) {
            constant = constant + c;
            continue;
        }
        auto [it, fresh] = collected.emplace(*mono, c);
        if (!fresh) it->second = it->second + c;
    }

    std::vector<Expr> out;
    if (!constant.is_zero()) out.push_back(Expr::rational(constant));
    for (const auto& [mono, c] : collected) {
        if (c.is_zero()) continue;
        if (c.is_one())
            out.push_back(mono);
        else
            out.push_back(make_product({Expr::rational(c), mono}));
    }
    if (out.empty()) return Expr::zero();
    if (out.size() == 1) return out[0];
    // collected map is ordered by monomial; the constant (if any) leads.
    return raw_nary(ExprKind::Sum, std::move(out));
}

Expr normalized(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::Rational:
        case ExprKind::Symbol:
            return e;
        case ExprKind::Sum: {
            std::vector<Expr> ks;
            for (const Expr& k : e.kids()) ks.push_back(normalized(k));
            return make_sum(std::move(ks));
        }
        case ExprKind::Product: {
            std::vector<Expr> ks;
            for (const Expr& k : e.kids()) ks.push_back(normalized(k));
            return make_product(std::move(ks));
        }
        case ExprKind::Power:
            return make_power(normalized(e.base()), e.exponent());
    }
    return e;
}

// ---------------------------------------------------------------------------
// calculus and substitution

namespace {

Expr diff_impl(const Expr& e, SymbolId s, const DerivRules* rules) {
    switch (e.kind()) {
        case ExprKind::Rational:
            return Expr::zero();
        case ExprKind::Symbol:
            if (e.symbol_id() == s) return Expr::one();
            if (rules)
                if (const Expr* d = rules->find(e.symbol_id(), s)) return *d;
            return Expr::zero();
        case ExprKind::Sum: {
            std::vector<Expr> parts;
            for (const Expr& k : e.kids()) parts.push_back(diff_impl(k, s, rules));
            return make_sum(std::move(parts));
        }
        case ExprKind::Product: {
            std::vector<Expr> parts;
            for (std::size_t i = 0; i < e.kids().size(); ++i) {
                std::vector<Expr> fs = e.kids();
                fs[i] = diff_impl(e.kids()[i], s, rules);
                parts.push_back(make_product(std::move(fs)));
            }
            return make_sum(std::move(parts));
        }
        case ExprKind::Power: {
            const Rational& q = e.exponent();
            return make_product({Expr::rational(q), make_power(e.base(), q - Rational(1)),
                                 diff_impl(e.base(), s, rules)});
        }
    }
    return Expr::zero();
}

} // namespace

Expr differentiate(const Expr& e, SymbolId s) { return diff_impl(e, s, nullptr); }
Expr differentiate(const Expr& e, SymbolId s, const DerivRules& rules) {
    return diff_impl(e, s, &rules);
}

Expr substitute(const Expr& e, const std::map<SymbolId, Expr>& bindings) {
    switch (e.kind()) {
        case ExprKind::Rational:
            return e;
        case ExprKind::Symbol: {
            auto it = bindings.find(e.symbol_id());
            return it == bindings.end() ? e : it->second;
        }
        case ExprKind::Sum: {
            std::vector<Expr> ks;
            for (const Expr& k : e.kids()) ks.push_back(substitute(k, bindings));
            return make_sum(std::move(ks));
        }
        case ExprKind::Product: {
            std::vector<Expr> ks;
            for (const Expr& k : e.kids()) ks.push_back(substitute(k, bindings));
            return make_product(std::move(ks));
        }
        case ExprKind::Power:
            return make_power(substitute(e.base(), bindings), e.exponent());
    }
    return e;
}

Expr substitute_power(const Expr& e, SymbolId s, int degree, const Expr& replacement) {
    if (degree < 1) throw std::invalid_argument("substitute_power degree must be >= 1");
    if (degree == 1) return substitute(e, {{s, replacement}});
    switch (e.kind()) {
        case ExprKind::Rational:
        case ExprKind::Symbol:
            return e;
        case ExprKind::Sum: {
            std::vector<Expr> ks;
            for (const Expr& k : e.kids())
                ks.push_back(substitute_power(k, s, degree, replacement));
            return make_sum(std::move(ks));
        }
        case ExprKind::Product: {
            std::vector<Expr> ks;
            for (const Expr& k : e.kids())
                ks.push_back(substitute_power(k, s, degree, replacement));
            return make_product(std::move(ks));
        }
        case ExprKind::Power: {
            if (e.base().kind() == ExprKind::Symbol && e.base().symbol_id() == s &&
                e.exponent().is_integer()) {
                std::int64_t k = e.exponent().num();
                std::int64_t m = k / degree;
                if (k % degree != 0 && k < 0) --m; // floor division
                std::int64_t r = k - m * degree;
                if (m != 0)
                    return make_product({make_power(replacement, Rational(m)),
                                         make_power(Expr::symbol(s), Rational(r))});
                return e;
            }
            return make_power(substitute_power(e.base(), s, degree, replacement),
                              e.exponent());
        }
    }
    return e;
}

Expr poisson_bracket(const Expr& a, const Expr& b, std::span<const CanonicalPair> pairs) {
    std::vector<Expr> parts;
    for (const CanonicalPair& pr : pairs) {
        parts.push_back(make_product(
            {differentiate(a, pr.coordinate), differentiate(b, pr.momentum)}));
        parts.push_back(make_product({Expr::integer(-1), differentiate(a, pr.momentum),
                                      differentiate(b, pr.coordinate)}));
    }
    return make_sum(std::move(parts));
}

// ---------------------------------------------------------------------------
// numeric evaluation

double eval_num(const Expr& e, std::span<const double> env, std::span<const bool> bound) {
    switch (e.kind()) {
        case ExprKind::Rational:
            return e.rational_value().to_double();
        case ExprKind::Symbol: {
            SymbolId id = e.symbol_id();
            if (id >= bound.size() || !bound[id])
                throw UnboundSymbolError("unbound symbol in numeric evaluation (id " +
                                         std::to_string(id) + ")");
            return env[id];
        }
        case ExprKind::Sum: {
            double acc = 0;
            for (const Expr& k : e.kids()) acc += eval_num(k, env, bound);
            return acc;
        }
        case ExprKind::Product: {
            double acc = 1;
            for (const Expr& k : e.kids()) acc *= eval_num(k, env, bound);
            return acc;
        }
        case ExprKind::Power: {
            double bv = eval_num(e.base(), env, bound);
            const Rational& q = e.exponent();
            if (q.is_integer()) {
                if (bv == 0.0 && q.is_negative())
                    throw DomainError("zero raised to a negative power");
                return std::pow(bv, static_cast<double>(q.num()));
            }
            if (bv < 0.0) {
                if (q.den() % 2 == 0)
                    throw DomainError("even root of a negative value");
                double mag = std::pow(-bv, q.to_double());
                return (q.num() % 2 == 0) ? mag : -mag;
            }
            if (bv == 0.0 && q.is_negative())
                throw DomainError("zero raised to a negative power");
            return std::pow(bv, q.to_double());
        }
    }
    return 0.0;
}

double eval_num(const Expr& e, const std::map<SymbolId, double>& point,
                std::size_t table_size) {
    std::vector<double> env(table_size, 0.0);
    std::unique_ptr<bool[]> bound(new bool[table_size]());
    for (const auto& [id, v] : point) {
        env[id] = v;
        bound[id] = true;
    }
    return eval_num(e, std::span<const double>(env),
                    std::span<const bool>(bound.get(), table_size));
}

// ---------------------------------------------------------------------------
// randomized zero testing

TriState is_zero(const Expr& e, const ZeroTestContext& ctx) {
    if (e.is_zero_literal()) return TriState::Zero;

    std::set<SymbolId> syms = e.free_symbols();
    std::size_t width = 1;
    for (SymbolId s : syms) width = std::max<std::size_t>(width, s + 1);
    if (ctx.table) width = std::max(width, ctx.table->size());

    std::mt19937_64 rng(ctx.seed);
    auto draw = [&]() {
        // uniform in [-2, 2), independent of library distribution details
        return (static_cast<double>(rng() >> 11) * 0x1p-53) * 4.0 - 2.0;
    };

    std::vector<double> env(width, 0.0);
    std::unique_ptr<bool[]> bound(new bool[width]());

    int samples_ok = 0;
    bool all_nonzero = true;
    for (int sample = 0; sample < 8; ++sample) {
        bool got = false;
        for (int attempt = 0; attempt < 100 && !got; ++attempt) {
            bool admissible = true;
            for (SymbolId s : syms) {
                auto fx = ctx.fixed_values.find(s);
                double v = (fx != ctx.fixed_values.end()) ? fx->second : draw();
                env[s] = v;
                bound[s] = true;
            }
            for (const Assumption& a : ctx.assumptions) {
                if (!syms.count(a.symbol)) continue;
                if (!a.admits(env[a.symbol])) {
                    admissible = false;
                    break;
                }
            }
            if (!admissible) continue;
            try {
                double v = eval_num(e, std::span<const double>(env),
                                    std::span<const bool>(bound.get(), width));
                if (!std::isfinite(v)) continue;
                got = true;
                ++samples_ok;
                if (std::abs(v) <= 1e-8) all_nonzero = false;
            } catch (const DomainError&) {
                continue; // excluded region: resample
            }
        }
        if (!got)
            throw DomainError("zero test: no admissible sample point found in 100 draws");
    }
    if (samples_ok >= 8 && all_nonzero) return TriState::NonZero;
    return TriState::Undecided;
}

// ---------------------------------------------------------------------------
// printing

namespace {

void print_expr(const Expr& e, const SymbolTable& table, std::string& out);

bool needs_parens_as_base(const Expr& b) {
    switch (b.kind()) {
        case ExprKind::Symbol:
            return false;
        case ExprKind::Rational:
            return b.rational_value().is_negative() || !b.rational_value().is_integer();
        default:
            return true;
    }
}

void print_exponent(const Rational& q, std::string& out) {
    if (q.is_integer() && !q.is_negative()) {
        out += "^" + std::to_string(q.num());
    } else {
        out += "^(" + q.str() + ")";
    }
}

void print_factor(const Expr& f, const SymbolTable& table, std::string& out) {
    switch (f.kind()) {
        case ExprKind::Symbol:
            out += table.name(f.symbol_id());
            return;
        case ExprKind::Power: {
            if (needs_parens_as_base(f.base())) {
                out += "(";
                print_expr(f.base(), table, out);
                out += ")";
            } else {
                print_expr(f.base(), table, out);
            }
            print_exponent(f.exponent(), out);
            return;
        }
        case ExprKind::Rational:
            out += f.rational_value().str();
            return;
        default:
            out += "(";
            print_expr(f, table, out);
            out += ")";
    }
}

// prints |coeff| * monomial (sign handled by the caller)
void print_term_magnitude(const Rational& mag, const Expr* mono,
                          const SymbolTable& table, std::string& out) {
    if (!mono) {
        out += mag.str();
        return;
    }
    if (!mag.is_one()) out += mag.str() + "*";
    if (mono->kind() == ExprKind::Product) {
        const auto& ks = mono->kids();
        for (std::size_t i = 0; i < ks.size(); ++i) {
            if (i) out += "*";
            print_factor(ks[i], table, out);
        }
    } else {
        print_factor(*mono, table, out);
    }
}

void print_expr(const Expr& e, const SymbolTable& table, std::string& out) {
    switch (e.kind()) {
        case ExprKind::Rational:
            out += e.rational_value().str();
            return;
        case ExprKind::Symbol:
            out += table.name(e.symbol_id());
            return;
        case ExprKind::Power:
            print_factor(e, table, out);
            return;
        case ExprKind::Product: {
            auto [c, mono] = split_term(e);
            if (c.is_negative()) out += "-";
            Rational mag = c.is_negative() ? -c : c;
            print_term_magnitude(mag, mono ? &*mono : nullptr, table, out);
            return;
        }
        case ExprKind::Sum: {
            bool first = true;
            for (const Expr& t : e.kids()) {
                auto [c, mono] = split_term(t);
                bool negative = c.is_negative();
                Rational mag = negative ? -c : c;
                if (first) {
                    if (negative) out += "-";
                    first = false;
                } else {
                    out += negative ? " - " : " + ";
                }
                print_term_magnitude(mag, mono ? &*mono : nullptr, table, out);
            }
            return;
        }
    }
}

} // namespace

std::string to_string(const Expr& e, const SymbolTable& table) {
    std::string out;
    print_expr(e, table, out);
    return out;
}

// ---------------------------------------------------------------------------
// polynomial views

std::map<std::int64_t, Expr> collect_powers(const Expr& e, SymbolId s) {
    std::map<std::int64_t, std::vector<Expr>> buckets;
    std::vector<Expr> terms =
        e.kind() == ExprKind::Sum ? e.kids() : std::vector<Expr>{e};
    for (const Expr& t : terms) {
        std::vector<Expr> factors =
            t.kind() == ExprKind::Product ? t.kids() : std::vector<Expr>{t};
        std::int64_t deg = 0;
        std::vector<Expr> rest;
        for (const Expr& f : factors) {
            if (f.kind() == ExprKind::Symbol && f.symbol_id() == s) {
                deg += 1;
            } else if (f.kind() == ExprKind::Power &&
                       f.base().kind() == ExprKind::Symbol &&
                       f.base().symbol_id() == s) {
                if (!f.exponent().is_integer())
                    throw DomainError("fractional power of collection symbol");
                deg += f.exponent().num();
            } else {
                if (f.contains(s))
                    throw DomainError("expression is not polynomial in the symbol");
                rest.push_back(f);
            }
        }
        buckets[deg].push_back(rest.empty() ? Expr::one() : make_product(std::move(rest)));
    }
    std::map<std::int64_t, Expr> out;
    for (auto& [deg, parts] : buckets) {
        Expr c = make_sum(std::move(parts));
        if (!c.is_zero_literal()) out.emplace(deg, c);
    }
    return out;
}

namespace {

using Monomial = std::map<Expr, std::int64_t, ExprLess>;

// structural order for use as a map key (distinct from the grlex term order)
struct MonoKeyLess {
    bool operator()(const Monomial& a, const Monomial& b) const {
        auto ia = a.begin(), ib = b.begin();
        while (ia != a.end() && ib != b.end()) {
            int c = Expr::compare(ia->first, ib->first);
            if (c != 0) return c < 0;
            if (ia->second != ib->second) return ia->second < ib->second;
            ++ia;
            ++ib;
        }
        return ia == a.end() && ib != b.end();
    }
};

struct PolyTerm {
    Rational coeff;
    Monomial mono;
};

std::optional<std::vector<PolyTerm>> to_poly(const Expr& e) {
    std::vector<PolyTerm> out;
    std::vector<Expr> terms =
        e.kind() == ExprKind::Sum ? e.kids() : std::vector<Expr>{e};
    for (const Expr& t : terms) {
        PolyTerm pt;
        pt.coeff = Rational(1);
        std::vector<Expr> factors =
            t.kind() == ExprKind::Product ? t.kids() : std::vector<Expr>{t};
        for (const Expr& f : factors) {
            if (f.is_rational()) {
                pt.coeff = pt.coeff * f.rational_value();
            } else if (f.kind() == ExprKind::Power && f.exponent().is_integer()) {
                if (f.exponent().is_negative()) return std::nullopt;
                pt.mono[f.base()] += f.exponent().num();
            } else if (f.kind() == ExprKind::Power) {
                // fractional power: treat the whole factor as an opaque atom
                pt.mono[f] += 1;
            } else {
                pt.mono[f] += 1;
            }
        }
        out.push_back(std::move(pt));
    }
    return out;
}

std::int64_t total_degree(const Monomial& m) {
    std::int64_t d = 0;
    for (const auto& [a, k] : m) d += k;
    return d;
}

// graded lexicographic order; returns true if a < b
bool grlex_less(const Monomial& a, const Monomial& b) {
    std::int64_t da = total_degree(a), db = total_degree(b);
    if (da != db) return da < db;
    auto ia = a.begin(), ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        int c = Expr::compare(ia->first, ib->first);
        if (c != 0) {
            // the monomial owning the earlier atom ranks higher
            return c > 0;
        }
        if (ia->second != ib->second) return ia->second < ib->second;
        ++ia;
        ++ib;
    }
    return ia == a.end() && ib != b.end();
}

bool divides(const Monomial& d, const Monomial& m) {
    for (const auto& [atom, k] : d) {
        auto it = m.find(atom);
        if (it == m.end() || it->second < k) return false;
    }
    return true;
}

Monomial mono_div(const Monomial& m, const Monomial& d) {
    Monomial out = m;
    for (const auto& [atom, k] : d) {
        out[atom] -= k;
        if (out[atom] == 0) out.erase(atom);
    }
    return out;
}

Expr poly_to_expr(const std::map<Monomial, Rational, MonoKeyLess>& p) {
    std::vector<Expr> terms;
    for (const auto& [mono, c] : p) {
        if (c.is_zero()) continue;
        std::vector<Expr> fs{Expr::rational(c)};
        for (const auto& [atom, k] : mono) fs.push_back(make_power(atom, Rational(k)));
        terms.push_back(make_product(std::move(fs)));
    }
    return make_sum(std::move(terms));
}

} // namespace

std::pair<Expr, Expr> poly_divmod(const Expr& b, const Expr& u) {
    auto pb = to_poly(b);
    auto pu = to_poly(u);
    if (!pb || !pu || pu->empty()) return {Expr::zero(), b};

    std::map<Monomial, Rational, MonoKeyLess> work, rem, quot;
    for (const auto& t : *pb) {
        auto [it, fresh] = work.emplace(t.mono, t.coeff);
        if (!fresh) it->second = it->second + t.coeff;
    }
    // leading term of the divisor
    const PolyTerm* lead = &(*pu)[0];
    for (const auto& t : *pu)
        if (grlex_less(lead->mono, t.mono)) lead = &t;
    if (lead->coeff.is_zero()) return {Expr::zero(), b};

    int guard = 0;
    while (!work.empty()) {
        if (++guard >= 100000) return {Expr::zero(), b}; // give up whole
        // current leading term of the working remainder
        auto lt = work.begin();
        for (auto it = work.begin(); it != work.end(); ++it)
            if (grlex_less(lt->first, it->first)) lt = it;
        if (lt->second.is_zero()) {
            work.erase(lt);
            continue;
        }
        if (divides(lead->mono, lt->first)) {
            Monomial qm = mono_div(lt->first, lead->mono);
            Rational qc = lt->second / lead->coeff;
            auto [qit, qfresh] = quot.emplace(qm, qc);
            if (!qfresh) qit->second = qit->second + qc;
            for (const auto& t : *pu) {
                Monomial m = t.mono;
                for (const auto& [atom, k] : qm) m[atom] += k;
                Rational c = -(qc * t.coeff);
                auto [wit, wfresh] = work.emplace(m, c);
                if (!wfresh) wit->second = wit->second + c;
                if (!wfresh && wit->second.is_zero()) work.erase(wit);
            }
        } else {
            rem.emplace(lt->first, lt->second);
            work.erase(lt);
        }
    }
    return {poly_to_expr(quot), poly_to_expr(rem)};
}

} // namespace hjred
