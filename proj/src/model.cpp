#include "hjred/model.hpp"

#include <fstream>
#include <sstream>

namespace hjred {

SymbolId Model::velocity_of(SymbolId coordinate) const {
    auto id = table->find(SymbolTable::velocity_name(table->name(coordinate)));
    if (!id) throw ModelError("no velocity registered for " + table->name(coordinate));
    return *id;
}

SymbolId Model::momentum_of(SymbolId sym) const {
    auto id = table->find(SymbolTable::momentum_name(table->name(sym)));
    if (!id) throw ModelError("no momentum registered for " + table->name(sym));
    return *id;
}

std::optional<double> Model::constant_value(SymbolId id) const {
    for (const auto& [c, v] : constants)
        if (c == id) return v;
    return std::nullopt;
}

ZeroTestContext Model::zero_context(std::uint64_t seed) const {
    ZeroTestContext ctx;
    ctx.table = table.get();
    ctx.assumptions = assumptions;
    ctx.seed = seed;
    for (const auto& [c, v] : constants)
        if (v) ctx.fixed_values.emplace(c, *v);
    return ctx;
}

namespace {

struct Line {
    std::size_t number;
    std::string text;
};

[[noreturn]] void fail(const std::string& origin, std::size_t line,
                       const std::string& msg) {
    throw ModelError(origin + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

} // namespace

Model load_model_text(const std::string& text, const std::string& origin) {
    Model m;
    m.table = std::make_shared<SymbolTable>();
    m.lagrangian = Expr::zero();

    std::vector<Line> lines;
    {
        std::istringstream is(text);
        std::string l;
        std::size_t n = 0;
        while (std::getline(is, l)) {
            ++n;
            auto hash = l.find('#');
            if (hash != std::string::npos) l.erase(hash);
            if (l.find_first_not_of(" \t\r") == std::string::npos) continue;
            lines.push_back({n, l});
        }
    }

    std::string time_name;
    std::optional<std::pair<std::size_t, std::string>> lagrangian_src;
    std::vector<std::tuple<std::size_t, std::string, char, double>> assume_src;
    std::vector<std::pair<std::string, std::optional<double>>> const_src;
    std::vector<std::string> coord_names;

    for (const Line& ln : lines) {
        std::istringstream is(ln.text);
        std::string directive;
        is >> directive;
        std::string rest;
        std::getline(is, rest);
        if (lagrangian_src)
            fail(origin, ln.number, "the lagrangian directive must come last");
        if (directive == "name") {
            auto ws = split_ws(rest);
            if (ws.empty()) fail(origin, ln.number, "name requires a value");
            m.name = ws[0];
        } else if (directive == "coordinate") {
            auto ws = split_ws(rest);
            if (ws.empty()) fail(origin, ln.number, "coordinate requires identifiers");
            for (auto& w : ws) coord_names.push_back(w);
        } else if (directive == "time") {
            auto ws = split_ws(rest);
            if (ws.size() != 1) fail(origin, ln.number, "time requires one identifier");
            if (!time_name.empty()) fail(origin, ln.number, "duplicate time directive");
            time_name = ws[0];
        } else if (directive == "constant") {
            auto ws = split_ws(rest);
            if (ws.empty() || ws.size() > 2)
                fail(origin, ln.number, "constant requires a name and optional value");
            std::optional<double> v;
            if (ws.size() == 2) {
                try {
                    v = std::stod(ws[1]);
                } catch (const std::exception&) {
                    fail(origin, ln.number, "invalid constant value '" + ws[1] + "'");
                }
            }
            const_src.emplace_back(ws[0], v);
        } else if (directive == "assume") {
            auto ws = split_ws(rest);
            if (ws.size() != 3)
                fail(origin, ln.number, "assume requires: <ident> (>|<|!=) <decimal>");
            char rel;
            if (ws[1] == ">")
                rel = '>';
            else if (ws[1] == "<")
                rel = '<';
            else if (ws[1] == "!=")
                rel = '!';
            else
                fail(origin, ln.number, "assume relation must be >, < or !=");
            double bound;
            try {
                bound = std::stod(ws[2]);
            } catch (const std::exception&) {
                fail(origin, ln.number, "invalid assume bound '" + ws[2] + "'");
            }
            assume_src.emplace_back(ln.number, ws[0], rel, bound);
        } else if (directive == "lagrangian") {
            if (rest.find_first_not_of(" \t\r") == std::string::npos)
                fail(origin, ln.number, "lagrangian requires an expression");
            lagrangian_src = {ln.number, rest};
        } else {
            fail(origin, ln.number, "unknown directive '" + directive + "'");
        }
    }

    if (coord_names.empty())
        throw ModelError(origin + ": model declares no coordinates");
    if (!lagrangian_src)
        throw ModelError(origin + ": model declares no lagrangian");
    if (time_name.empty()) time_name = "t";

    // Register symbols in declaration order; this order is the canonical
    // symbol order of every expression in the analysis.
    try {
        for (const std::string& c : coord_names) {
            m.coordinates.push_back(m.table->add(c, SymbolKind::Coordinate));
            m.table->add(SymbolTable::velocity_name(c), SymbolKind::Velocity);
            m.table->add(SymbolTable::momentum_name(c), SymbolKind::Momentum);
        }
        m.time = m.table->add(time_name, SymbolKind::Parameter);
        m.time_momentum =
            m.table->add(SymbolTable::momentum_name(time_name), SymbolKind::Momentum);
        for (const auto& [cn, cv] : const_src) {
            m.constants.emplace_back(m.table->add(cn, SymbolKind::Constant), cv);
        }
    } catch (const std::invalid_argument& e) {
        throw ModelError(origin + ": " + e.what());
    }

    for (const auto& [line, sym, rel, bound] : assume_src) {
        auto id = m.table->find(sym);
        if (!id) fail(origin, line, "assume references unknown symbol '" + sym + "'");
        Assumption a;
        a.symbol = *id;
        a.rel = rel == '>'   ? Assumption::Rel::Greater
                : rel == '<' ? Assumption::Rel::Less
                             : Assumption::Rel::NotEqual;
        a.bound = bound;
        m.assumptions.push_back(a);
    }

    try {
        m.lagrangian = parse(lagrangian_src->second, *m.table);
    } catch (const ParseError& e) {
        fail(origin, lagrangian_src->first, std::string("lagrangian: ") + e.what());
    } catch (const DomainError& e) {
        fail(origin, lagrangian_src->first, std::string("lagrangian: ") + e.what());
    } catch (const OverflowError& e) {
        fail(origin, lagrangian_src->first, std::string("lagrangian: ") + e.what());
    }

    // Validate symbol usage.
    for (SymbolId s : m.lagrangian.free_symbols()) {
        SymbolKind k = m.table->kind(s);
        if (s == m.time)
            fail(origin, lagrangian_src->first,
                 "lagrangian depends explicitly on the evolution parameter '" +
                     m.table->name(s) + "'; only autonomous systems are supported");
        if (k != SymbolKind::Coordinate && k != SymbolKind::Velocity &&
            k != SymbolKind::Constant)
            fail(origin, lagrangian_src->first,
                 "lagrangian references '" + m.table->name(s) +
                     "', which is not a coordinate, velocity or constant");
    }

    m.table->freeze();
    return m;
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_model_text(ss.str(), path);
}

std::string save_model(const Model& m) {
    std::ostringstream out;
    out << "name " << m.name << "\n";
    out << "coordinate";
    for (SymbolId c : m.coordinates) out << " " << m.table->name(c);
    out << "\n";
    out << "time " << m.table->name(m.time) << "\n";
    for (const auto& [c, v] : m.constants) {
        out << "constant " << m.table->name(c);
        if (v) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", *v);
            out << " " << buf;
        }
        out << "\n";
    }
    for (const Assumption& a : m.assumptions) {
        const char* rel = a.rel == Assumption::Rel::Greater  ? ">"
                          : a.rel == Assumption::Rel::Less   ? "<"
                                                             : "!=";
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", a.bound);
        out << "assume " << m.table->name(a.symbol) << " " << rel << " " << buf << "\n";
    }
    out << "lagrangian " << to_string(m.lagrangian, *m.table) << "\n";
    return out.str();
}

namespace {

const char* kRelativisticParticle = R"(# free relativistic particle with an einbein
name relativistic-particle
coordinate x0 x1 x2 x3 e
time tau
constant m 1
assume e != 0
lagrangian (-x0_d^2 + x1_d^2 + x2_d^2 + x3_d^2)/(2*e) - e*m^2/2
)";

const char* kDisc = R"(# disc-phase-space system, defined away from q2 = 0
name disc
coordinate q1 q2
time t
constant R 1
assume q2 > 0
lagrangian q1_d^2/(4*q2) - q2*(q1^2 + q2^2/3 - R^2)
)";

const char* kPuncturedPlane = R"(# plane-with-a-hole variant of the disc system
name punctured-plane
coordinate q1 q2
time t
constant R 1
assume q2 > 0
lagrangian q1_d^2/(4*q2) - q2*(q1^2 - q2^2/3 - R^2)
)";

} // namespace

std::vector<Model> builtin_models() {
    return {load_model_text(kRelativisticParticle, "<builtin:relativistic-particle>"),
            load_model_text(kDisc, "<builtin:disc>"),
            load_model_text(kPuncturedPlane, "<builtin:punctured-plane>")};
}

} // namespace hjred
