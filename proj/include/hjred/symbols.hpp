#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace hjred {

using SymbolId = std::uint32_t;
inline constexpr SymbolId kNoSymbol = UINT32_MAX;

enum class SymbolKind { Coordinate, Velocity, Momentum, Parameter, Constant, Action };

/// Sign/exclusion predicate on a single symbol, e.g. "q2 > 0".
struct Assumption {
    enum class Rel { Greater, Less, NotEqual };
    SymbolId symbol = kNoSymbol;
    Rel rel = Rel::NotEqual;
    double bound = 0.0;

    bool admits(double v) const {
        switch (rel) {
            case Rel::Greater: return v > bound;
            case Rel::Less: return v < bound;
            case Rel::NotEqual: return v != bound;
        }
        return true;
    }
};

/// Interning table for symbol names. Registration order fixes the canonical
/// symbol ordering used by expression normal forms, so it must be
/// deterministic; tables are frozen once a model has been loaded.
///
/// Naming rules: the velocity of coordinate `q` is `q_d`, the conjugate
/// momentum of any coordinate or parameter `q` is `q_p`.
class SymbolTable {
  public:
    SymbolId add(const std::string& name, SymbolKind kind) {
        if (frozen_) throw std::logic_error("symbol table is frozen");
        if (name == "sqrt") throw std::invalid_argument("'sqrt' is a reserved word");
        if (!valid_ident(name))
            throw std::invalid_argument("invalid identifier: '" + name + "'");
        if (index_.count(name))
            throw std::invalid_argument("duplicate symbol: '" + name + "'");
        SymbolId id = static_cast<SymbolId>(names_.size());
        names_.push_back(name);
        kinds_.push_back(kind);
        index_.emplace(name, id);
        return id;
    }

    std::optional<SymbolId> find(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& name(SymbolId id) const { return names_.at(id); }
    SymbolKind kind(SymbolId id) const { return kinds_.at(id); }
    std::size_t size() const { return names_.size(); }

    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }

    static std::string velocity_name(const std::string& coordinate) {
        return coordinate + "_d";
    }
    static std::string momentum_name(const std::string& coordinate) {
        return coordinate + "_p";
    }

    static bool valid_ident(const std::string& s) {
        if (s.empty()) return false;
        if (!std::isalpha(static_cast<unsigned char>(s[0]))) return false;
        for (char c : s)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
        return true;
    }

  private:
    std::vector<std::string> names_;
    std::vector<SymbolKind> kinds_;
    std::unordered_map<std::string, SymbolId> index_;
    bool frozen_ = false;
};

} // namespace hjred
