#include "hjred/report.hpp"

#include <random>
#include <sstream>

namespace hjred {

namespace {

const char* classification_name(Classification c) {
    switch (c) {
        case Classification::FirstClass: return "first-class";
        case Classification::SecondClass: return "second-class";
        case Classification::Central: return "central";
        case Classification::Unresolved: return "unresolved";
    }
    return "unresolved";
}

const char* status_name(ChainStatus s) {
    switch (s) {
        case ChainStatus::Integrable: return "integrable";
        case ChainStatus::Inconsistent: return "inconsistent";
        case ChainStatus::Undecided: return "undecided";
    }
    return "undecided";
}

const char* verdict_name(BracketEntry::Verdict v) {
    switch (v) {
        case BracketEntry::Verdict::Zero: return "zero";
        case BracketEntry::Verdict::Constant: return "constant";
        case BracketEntry::Verdict::NonConstant: return "nonconstant";
        case BracketEntry::Verdict::Undecided: return "undecided";
    }
    return "undecided";
}

std::string assumption_text(const Assumption& a, const SymbolTable& t) {
    const char* rel = a.rel == Assumption::Rel::Greater  ? " > "
                      : a.rel == Assumption::Rel::Less   ? " < "
                                                          : " != ";
    std::ostringstream os;
    os << t.name(a.symbol) << rel << a.bound;
    return os.str();
}

/// Numeric cross-check of a branch: the reduced Hamiltonian must agree with
/// h0 evaluated on the branch surface. Returns the max deviation over
/// admissible sample points, or nullopt when constants lack values.
std::optional<double> branch_surface_residual(const Analysis& a, const Branch& b) {
    const SymbolTable& table = a.sys.table();
    std::map<SymbolId, double> env;
    for (const auto& [c, v] : a.model.constants) {
        if (!v) return std::nullopt;
        env[c] = *v;
    }
    std::mt19937_64 rng(a.seed);
    auto draw = [&]() { return (static_cast<double>(rng() >> 11) * 0x1p-53) * 4.0 - 2.0; };

    std::set<SymbolId> vars;
    b.reduced_h0.free_symbols(vars);
    b.value.free_symbols(vars);
    double worst = 0.0;
    int accepted = 0;
    for (int attempt = 0; attempt < 400 && accepted < 16; ++attempt) {
        for (SymbolId s : vars)
            if (!env.count(s) || table.kind(s) != SymbolKind::Constant) env[s] = draw();
        try {
            double branch_val = eval_num(b.value, env, table.size());
            std::map<SymbolId, double> full = env;
            full[b.parameter] = branch_val;
            double h0v = eval_num(a.sys.h0, full, table.size());
            double redv = eval_num(b.reduced_h0, env, table.size());
            worst = std::max(worst, std::abs(h0v - redv));
            ++accepted;
        } catch (const DomainError&) {
            continue; // outside the branch domain; resample
        }
    }
    if (accepted == 0) return std::nullopt;
    return worst;
}

} // namespace

Analysis run_analysis(Model model, const AnalysisOptions& opts) {
    for (const auto& [name, v] : opts.constant_overrides) {
        auto id = model.table->find(name);
        if (!id) throw ModelError("override for unknown constant '" + name + "'");
        bool found = false;
        for (auto& [c, val] : model.constants) {
            if (c == *id) {
                val = v;
                found = true;
            }
        }
        if (!found) throw ModelError("'" + name + "' is not a constant of the model");
    }

    Analysis a;
    a.model = model;
    a.seed = opts.seed;
    a.sys = build_hj_system(model, opts.seed);
    a.eom = equations_of_motion(a.sys);
    a.chain = run_chain(a.sys);
    if (a.chain.status != ChainStatus::Inconsistent) classify(a.chain, a.sys);
    return a;
}

nlohmann::ordered_json to_json(const Analysis& a) {
    using json = nlohmann::ordered_json;
    const SymbolTable& t = a.sys.table();
    auto str = [&](const Expr& e) { return to_string(e, t); };

    json j;
    j["schema"] = 1;
    j["tool"] = "hjred";
    j["version"] = kToolVersion;
    j["seed"] = a.seed;

    json jm;
    jm["name"] = a.model.name;
    json coords = json::array();
    for (SymbolId c : a.model.coordinates) coords.push_back(t.name(c));
    jm["coordinates"] = coords;
    jm["time"] = t.name(a.model.time);
    json jc = json::object();
    for (const auto& [c, v] : a.model.constants) {
        if (v)
            jc[t.name(c)] = *v;
        else
            jc[t.name(c)] = nullptr;
    }
    jm["constants"] = jc;
    json ja = json::array();
    for (const Assumption& as : a.model.assumptions) ja.push_back(assumption_text(as, t));
    jm["assumptions"] = ja;
    jm["lagrangian"] = str(a.model.lagrangian);
    j["model"] = jm;

    json jh;
    jh["rank"] = a.sys.rank;
    json jd = json::array();
    for (const DynamicalCoordinate& d : a.sys.dynamical) {
        json e;
        e["coordinate"] = t.name(d.coordinate);
        e["momentum"] = t.name(d.momentum);
        e["velocity"] = t.name(d.velocity);
        e["solved_velocity"] = str(d.solved_velocity);
        jd.push_back(e);
    }
    jh["dynamical"] = jd;
    json jp = json::array();
    for (const ParameterCoordinate& p : a.sys.parameters) {
        json e;
        e["parameter"] = t.name(p.parameter);
        e["momentum"] = t.name(p.momentum);
        e["h"] = str(p.h);
        e["extended"] = str(p.extended);
        jp.push_back(e);
    }
    jh["parameters"] = jp;
    jh["h0"] = str(a.sys.h0);
    j["hj"] = jh;

    json jf = json::array();
    for (std::size_t al = 0; al < a.sys.parameters.size(); ++al) {
        json e;
        e["parameter"] = t.name(a.sys.parameters[al].parameter);
        json co = json::object();
        for (std::size_t r = 0; r < a.eom.variables.size(); ++r)
            co[t.name(a.eom.variables[r])] = str(a.eom.coefficients[r][al]);
        e["coefficients"] = co;
        e["dz"] = str(a.eom.dz[al]);
        jf.push_back(e);
    }
    j["flow"] = jf;

    json jch;
    jch["status"] = status_name(a.chain.status);
    if (!a.chain.status_detail.empty()) jch["detail"] = a.chain.status_detail;
    json jcs = json::array();
    for (const Constraint& c : a.chain.constraints) {
        json e;
        e["expr"] = str(c.expr);
        e["origin"] = c.origin == Constraint::Origin::Primary ? "primary" : "generated";
        if (c.origin == Constraint::Origin::Generated) {
            e["parent"] = c.parent;
            e["parameter"] = t.name(c.parameter);
        }
        e["classification"] = classification_name(c.classification);
        jcs.push_back(e);
    }
    jch["constraints"] = jcs;
    json jfr = json::array();
    for (const FrozenParameter& f : a.chain.frozen) {
        json e;
        e["parameter"] = t.name(f.parameter);
        e["coefficient"] = str(f.coefficient);
        e["source"] = f.source;
        jfr.push_back(e);
    }
    jch["frozen"] = jfr;
    json jbr = json::array();
    for (const Branch& b : a.chain.branches) {
        json e;
        e["parameter"] = t.name(b.parameter);
        e["sign"] = b.sign > 0 ? "+" : "-";
        e["value"] = str(b.value);
        e["constraint"] = b.constraint;
        e["reduced_h0"] = str(b.reduced_h0);
        e["sign_provenance"] =
            "derived by substituting the branch into h0; not an input convention";
        if (auto resid = branch_surface_residual(a, b))
            e["surface_residual"] = *resid;
        jbr.push_back(e);
    }
    jch["branches"] = jbr;
    json jbk = json::array();
    for (const BracketEntry& be : a.chain.brackets) {
        json e;
        e["a"] = be.a;
        e["b"] = be.b;
        e["bracket"] = str(be.reduced);
        e["verdict"] = verdict_name(be.verdict);
        jbk.push_back(e);
    }
    jch["brackets"] = jbk;
    j["chain"] = jch;
    return j;
}

std::string to_text(const Analysis& a) {
    const SymbolTable& t = a.sys.table();
    auto str = [&](const Expr& e) { return to_string(e, t); };
    std::ostringstream os;

    os << "model: " << a.model.name << " (hjred " << kToolVersion << ", seed " << a.seed
       << ")\n";
    os << "coordinates:";
    for (SymbolId c : a.model.coordinates) os << " " << t.name(c);
    os << "   time: " << t.name(a.model.time) << "\n";
    if (!a.model.assumptions.empty()) {
        os << "assumptions:";
        for (const Assumption& as : a.model.assumptions)
            os << " " << assumption_text(as, t);
        os << "\n";
    }
    os << "lagrangian: " << str(a.model.lagrangian) << "\n\n";

    os << "hessian rank: " << a.sys.rank << "\n";
    os << "dynamical pairs:";
    for (const DynamicalCoordinate& d : a.sys.dynamical)
        os << " (" << t.name(d.coordinate) << ", " << t.name(d.momentum) << ")";
    os << "\nparameters:";
    for (const ParameterCoordinate& p : a.sys.parameters) os << " " << t.name(p.parameter);
    os << "\n";
    for (const DynamicalCoordinate& d : a.sys.dynamical)
        os << "  " << t.name(d.velocity) << " = " << str(d.solved_velocity) << "\n";
    os << "h0 = " << str(a.sys.h0) << "\n";
    for (const ParameterCoordinate& p : a.sys.parameters)
        os << "H'[" << t.name(p.parameter) << "] = " << str(p.extended) << "\n";
    os << "\nflow coefficients:\n";
    for (std::size_t r = 0; r < a.eom.variables.size(); ++r) {
        os << "  d" << t.name(a.eom.variables[r]) << " =";
        for (std::size_t al = 0; al < a.sys.parameters.size(); ++al)
            os << " (" << str(a.eom.coefficients[r][al]) << ") d"
               << t.name(a.sys.parameters[al].parameter)
               << (al + 1 < a.sys.parameters.size() ? " +" : "");
        os << "\n";
    }
    os << "  dz =";
    for (std::size_t al = 0; al < a.sys.parameters.size(); ++al)
        os << " (" << str(a.eom.dz[al]) << ") d"
           << t.name(a.sys.parameters[al].parameter)
           << (al + 1 < a.sys.parameters.size() ? " +" : "");
    os << "\n\nchain status: " << status_name(a.chain.status) << "\n";
    if (!a.chain.status_detail.empty()) os << "  " << a.chain.status_detail << "\n";
    os << "constraints:\n";
    for (std::size_t i = 0; i < a.chain.constraints.size(); ++i) {
        const Constraint& c = a.chain.constraints[i];
        os << "  [" << i << "] "
           << (c.origin == Constraint::Origin::Primary ? "primary  " : "generated")
           << "  " << classification_name(c.classification) << "  " << str(c.expr);
        if (c.origin == Constraint::Origin::Generated)
            os << "   (from d[" << c.parent << "] along d" << t.name(c.parameter) << ")";
        os << "\n";
    }
    if (!a.chain.frozen.empty()) {
        os << "frozen parameters:\n";
        for (const FrozenParameter& f : a.chain.frozen)
            os << "  d" << t.name(f.parameter) << " = 0   (coefficient "
               << str(f.coefficient) << " of constraint [" << f.source
               << "] is nonzero)\n";
    }
    if (!a.chain.branches.empty()) {
        os << "branches:\n";
        for (const Branch& b : a.chain.branches) {
            os << "  " << t.name(b.parameter) << " = " << str(b.value)
               << "   reduced h0 = " << str(b.reduced_h0) << "\n";
            os << "      sign derived by substitution into h0";
            if (auto resid = branch_surface_residual(a, b))
                os << "; surface cross-check residual " << *resid;
            os << "\n";
        }
    }
    if (!a.chain.brackets.empty()) {
        os << "constraint brackets:\n";
        for (const BracketEntry& be : a.chain.brackets)
            os << "  {[" << be.a << "], [" << be.b << "]} = " << str(be.reduced) << "  ("
               << verdict_name(be.verdict) << ")\n";
    }
    return os.str();
}

} // namespace hjred
