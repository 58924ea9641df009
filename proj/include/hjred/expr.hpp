#pragma once

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hjred/rational.hpp"
#include "hjred/symbols.hpp"

namespace hjred {

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnboundSymbolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExprKind { Rational, Symbol, Sum, Product, Power };

class Expr;

namespace detail {
struct ExprNode {
    ExprKind kind;
    Rational value;           // Rational nodes
    SymbolId symbol = kNoSymbol; // Symbol nodes
    Rational exponent;        // Power nodes
    std::vector<Expr> kids;   // Sum/Product children, Power base at kids[0]
    std::size_t hash = 0;
};
} // namespace detail

/// Immutable symbolic expression over exact rationals, symbols, sums,
/// products and rational powers. Every Expr is in canonical normal form by
/// construction: sums hold no nested sums, products no nested products,
/// constants are folded, like terms collected, and children are kept in a
/// deterministic total order, so structural equality decides normal-form
/// equality. Values are freely shareable across threads.
class Expr {
  public:
    Expr() : Expr(zero()) {}

    static Expr rational(const Rational& r);
    static Expr integer(std::int64_t n) { return rational(Rational(n)); }
    static Expr symbol(SymbolId id);
    static const Expr& zero();
    static const Expr& one();

    ExprKind kind() const { return node_->kind; }
    bool is_rational() const { return kind() == ExprKind::Rational; }
    bool is_zero_literal() const { return is_rational() && node_->value.is_zero(); }
    bool is_one_literal() const { return is_rational() && node_->value.is_one(); }

    const Rational& rational_value() const { return node_->value; }
    SymbolId symbol_id() const { return node_->symbol; }
    const std::vector<Expr>& kids() const { return node_->kids; }
    const Expr& base() const { return node_->kids[0]; }
    const Rational& exponent() const { return node_->exponent; }
    std::size_t hash() const { return node_->hash; }

    friend bool operator==(const Expr& a, const Expr& b) { return equal(a, b); }
    friend bool operator!=(const Expr& a, const Expr& b) { return !equal(a, b); }

    /// Deterministic structural total order (kind rank, then content).
    static int compare(const Expr& a, const Expr& b);
    static bool equal(const Expr& a, const Expr& b);

    void free_symbols(std::set<SymbolId>& out) const;
    std::set<SymbolId> free_symbols() const {
        std::set<SymbolId> s;
        free_symbols(s);
        return s;
    }
    bool contains(SymbolId id) const;

  private:
    explicit Expr(std::shared_ptr<const detail::ExprNode> n) : node_(std::move(n)) {}
    std::shared_ptr<const detail::ExprNode> node_;

    friend struct ExprBuilder;
};

struct ExprLess {
    bool operator()(const Expr& a, const Expr& b) const { return Expr::compare(a, b) < 0; }
};

// Normalizing constructors. These are the only way to build composite
// expressions, so every Expr in the program is already in normal form.
Expr make_sum(std::vector<Expr> terms);
Expr make_product(std::vector<Expr> factors);
Expr make_power(const Expr& base, const Rational& exponent);

inline Expr add(const Expr& a, const Expr& b) { return make_sum({a, b}); }
inline Expr sub(const Expr& a, const Expr& b) {
    return make_sum({a, make_product({Expr::integer(-1), b})});
}
inline Expr mul(const Expr& a, const Expr& b) { return make_product({a, b}); }
inline Expr div(const Expr& a, const Expr& b) {
    return make_product({a, make_power(b, Rational(-1))});
}
inline Expr neg(const Expr& a) { return mul(Expr::integer(-1), a); }
inline Expr sqrt(const Expr& a) { return make_power(a, Rational(1, 2)); }

/// Re-derives the normal form bottom-up through the public constructors.
/// Identity on any well-formed Expr; exists so normalization idempotence is
/// testable.
Expr normalized(const Expr& e);

/// Extra differentiation rules for opaque atoms (e.g. plane-wave phases):
/// maps (atom symbol, with-respect-to symbol) -> derivative expression.
class DerivRules {
  public:
    void set(SymbolId atom, SymbolId wrt, const Expr& d) { rules_[{atom, wrt}] = d; }
    const Expr* find(SymbolId atom, SymbolId wrt) const {
        auto it = rules_.find({atom, wrt});
        return it == rules_.end() ? nullptr : &it->second;
    }

  private:
    std::map<std::pair<SymbolId, SymbolId>, Expr> rules_;
};

/// Exact partial derivative; all other symbols are treated as independent.
Expr differentiate(const Expr& e, SymbolId s);
Expr differentiate(const Expr& e, SymbolId s, const DerivRules& rules);

/// Simultaneous substitution of symbols, then normalization.
Expr substitute(const Expr& e, const std::map<SymbolId, Expr>& bindings);

/// Rewrites integer powers of `s` modulo the relation s^degree = replacement:
/// s^k -> replacement^floor(k/degree) * s^(k mod degree). Used to reduce
/// expressions on a constraint surface.
Expr substitute_power(const Expr& e, SymbolId s, int degree, const Expr& replacement);

/// Canonical pair list of a phase space.
struct CanonicalPair {
    SymbolId coordinate;
    SymbolId momentum;
};

/// Sum over pairs of dA/dq * dB/dp - dA/dp * dB/dq.
Expr poisson_bracket(const Expr& a, const Expr& b, std::span<const CanonicalPair> pairs);

/// IEEE double evaluation. env[id] holds the value bound to symbol id;
/// unbound symbols and even roots of negatives raise.
double eval_num(const Expr& e, std::span<const double> env,
                std::span<const bool> bound);
double eval_num(const Expr& e, const std::map<SymbolId, double>& point,
                std::size_t table_size);

enum class TriState { Zero, NonZero, Undecided };

/// Context for randomized zero testing: assumptions restrict the sampling
/// box [-2, 2] per symbol, fixed constant values are honored, and the seed
/// makes every verdict reproducible.
struct ZeroTestContext {
    const SymbolTable* table = nullptr;
    std::vector<Assumption> assumptions;
    std::map<SymbolId, double> fixed_values;
    std::uint64_t seed = 42;
};

/// Zero iff the normal form is the zero constant; NonZero if 8 admissible
/// pseudo-random samples all exceed 1e-8 in magnitude; Undecided otherwise.
TriState is_zero(const Expr& e, const ZeroTestContext& ctx);

/// Canonical printing; parse(to_string(e)) normalizes back to e.
std::string to_string(const Expr& e, const SymbolTable& table);

/// Collects coefficients of integer powers of `s`: result[k] is the
/// coefficient of s^k. Throws DomainError on fractional powers of s.
std::map<std::int64_t, Expr> collect_powers(const Expr& e, SymbolId s);

/// Polynomial division B = Q*u + r by a single divisor under graded-lex
/// monomial order. Requires both arguments to be polynomials (non-negative
/// integer exponents) in their atoms; returns {0, B} if not.
std::pair<Expr, Expr> poly_divmod(const Expr& b, const Expr& u);

} // namespace hjred
