#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hjred/expr.hpp"
#include "hjred/parser.hpp"

namespace hjred {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A system definition: coordinates, evolution parameter, constants,
/// Lagrangian and domain assumptions. Immutable after load; the owned
/// symbol table is frozen and registers, for each coordinate `q`, the
/// velocity `q_d` and momentum `q_p`, plus the evolution parameter and its
/// momentum.
struct Model {
    std::string name;
    std::shared_ptr<SymbolTable> table;
    std::vector<SymbolId> coordinates;
    SymbolId time = kNoSymbol;
    SymbolId time_momentum = kNoSymbol;
    std::vector<std::pair<SymbolId, std::optional<double>>> constants;
    Expr lagrangian;
    std::vector<Assumption> assumptions;

    SymbolId velocity_of(SymbolId coordinate) const;
    SymbolId momentum_of(SymbolId coordinate_or_time) const;

    std::optional<double> constant_value(SymbolId id) const;

    /// Assumptions plus declared constant values, ready for zero testing.
    ZeroTestContext zero_context(std::uint64_t seed) const;
};

/// Parses the line-oriented model format:
///   name <string>
///   coordinate <ident> [<ident> ...]
///   time <ident>                      (optional; defaults to `t`)
///   constant <ident> [<decimal>]
///   assume <ident> (>|<|!=) <decimal>
///   lagrangian <expression>           (last, exactly once)
/// `#` starts a comment. Errors carry line/column positions.
Model load_model_text(const std::string& text, const std::string& origin = "<string>");
Model load_model(const std::string& path);

/// Writes a model back in the same format; load(save(m)) is semantically
/// equal to m (identical expression normal forms).
std::string save_model(const Model& m);

/// The three bundled systems: a relativistic particle with an einbein, a
/// disc-phase-space system and its punctured-plane variant.
std::vector<Model> builtin_models();

} // namespace hjred
