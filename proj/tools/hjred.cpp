#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <nlohmann/json.hpp>

#include "hjred/pathint.hpp"
#include "hjred/report.hpp"

namespace {

using namespace hjred;

std::string fmt(double v) {
    if (v == 0.0) v = 0.0; // drop the sign of negative zero
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::uint64_t seed_from_env() {
    if (const char* s = std::getenv("HJRED_SEED")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(s, &end, 10);
        if (end && *end == '\0') return v;
        std::cerr << "warning: ignoring malformed HJRED_SEED\n";
    }
    return kDefaultSeed;
}

std::map<std::string, double> parse_overrides(const std::vector<std::string>& kvs) {
    std::map<std::string, double> out;
    for (const std::string& kv : kvs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ModelError("--const expects name=value, got '" + kv + "'");
        out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    return out;
}

std::map<SymbolId, double> parse_init(const std::string& text, const SymbolTable& table) {
    std::map<SymbolId, double> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto comma = text.find(',', pos);
        std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                        : comma - pos);
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw DynamicsError("--init expects name=value pairs, got '" + item + "'");
        std::string name = item.substr(0, eq);
        auto id = table.find(name);
        if (!id) throw DynamicsError("--init references unknown symbol '" + name + "'");
        out[*id] = std::stod(item.substr(eq + 1));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

int cmd_analyze(const std::string& path, bool as_json,
                const std::vector<std::string>& consts) {
    AnalysisOptions opts;
    opts.seed = seed_from_env();
    opts.constant_overrides = parse_overrides(consts);
    Analysis a = run_analysis(load_model(path), opts);
    if (as_json)
        std::cout << to_json(a).dump(2) << "\n";
    else
        std::cout << to_text(a);
    switch (a.chain.status) {
        case ChainStatus::Integrable: return 0;
        case ChainStatus::Inconsistent: return 2;
        case ChainStatus::Undecided: return 3;
    }
    return 3;
}

int cmd_simulate(const std::string& path, const std::string& init_text, double span,
                 double step, const std::string& out_path,
                 const std::vector<std::string>& consts) {
    AnalysisOptions opts;
    opts.seed = seed_from_env();
    opts.constant_overrides = parse_overrides(consts);
    Analysis a = run_analysis(load_model(path), opts);
    if (a.chain.status != ChainStatus::Integrable) {
        std::cerr << "error: chain status is " << (int)a.chain.status
                  << "; cannot integrate\n";
        return 2;
    }
    std::map<SymbolId, double> init = parse_init(init_text, a.sys.table());

    std::vector<double> fixed;
    for (std::size_t al = 1; al < a.sys.parameters.size(); ++al) {
        SymbolId par = a.sys.parameters[al].parameter;
        auto it = init.find(par);
        if (it == init.end()) {
            std::cerr << "error: --init must set the parameter "
                      << a.sys.table().name(par) << "\n";
            return 2;
        }
        fixed.push_back(it->second);
    }
    ParameterPath pp = ParameterPath::time_span(span, fixed);

    Trajectory traj;
    try {
        traj = integrate(a.sys, a.chain, init, pp, step);
    } catch (const DynamicsError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return 1;
        }
        write_trajectory_csv(out, traj, a.sys.table());
    }
    std::cout << "samples: " << traj.samples.size() << "\n";
    for (std::size_t i = 0; i < a.chain.constraints.size(); ++i)
        std::cout << "max drift |" << to_string(a.chain.constraints[i].expr, a.sys.table())
                  << "|: " << fmt(traj.constraint_drift[i]) << "\n";
    std::cout << "max constraint drift: " << fmt(traj.max_drift()) << "\n";
    std::cout << "action residual: " << fmt(action_residual(traj, a.sys)) << "\n";
    return 0;
}

int cmd_spectrum(const std::string& path, int grid_n, double extent, char branch_sign,
                 const std::string& out_path, const std::vector<std::string>& consts) {
    AnalysisOptions opts;
    opts.seed = seed_from_env();
    opts.constant_overrides = parse_overrides(consts);
    Analysis a = run_analysis(load_model(path), opts);

    const Branch* branch = nullptr;
    for (const Branch& b : a.chain.branches)
        if ((branch_sign == '+') == (b.sign > 0)) {
            branch = &b;
            break;
        }
    if (!branch || a.sys.dynamical.size() != 1) {
        std::cerr << "error: analysis yields no one-dimensional reduced Hamiltonian "
                     "branch\n";
        return 4;
    }
    std::map<SymbolId, double> cvals;
    for (const auto& [c, v] : a.model.constants)
        if (v) cvals[c] = *v;
    auto form = quantize::recognize_reduced_form(
        branch->reduced_h0, a.sys.dynamical[0].coordinate, a.sys.dynamical[0].momentum,
        a.sys.table(), cvals);
    if (!form) {
        std::cerr << "error: reduced Hamiltonian "
                  << to_string(branch->reduced_h0, a.sys.table())
                  << " is not of the recognized g(p^2+q^2) form\n";
        return 4;
    }

    quantize::Grid grid{grid_n, extent};
    quantize::SpectrumResult res = quantize::reduced_spectrum(*form, grid);

    std::cout << "reduced h0: " << to_string(branch->reduced_h0, a.sys.table()) << "\n";
    if (res.unbounded)
        std::cout << "admissible set: infinite (" << res.admissible_count
                  << " on this grid)\n";
    else
        std::cout << "admissible count: " << res.admissible_count << "\n";
    std::cout << "lowest levels:\n";
    int shown = 0;
    for (std::size_t i = 0; i < res.lambdas.size() && shown < 10; ++i) {
        if (!res.admissible[i]) continue;
        std::cout << "  lambda=" << fmt(res.lambdas[i]) << "  g=" << fmt(res.levels[shown])
                  << "\n";
        ++shown;
    }
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return 1;
        }
        quantize::write_spectrum_csv(out, res);
    }
    return 0;
}

int cmd_kernel(double mass, double e, double beta, int slices, int grid_n, double extent,
               const std::string& out_path, bool as_json) {
    if (!(e > 0) || slices < 1 || grid_n < 16 || !(extent > 0) || beta < 0) {
        std::cerr << "error: invalid kernel parameters\n";
        return 1;
    }
    quantize::Grid grid{grid_n, extent};
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["mass"] = mass;
    j["e"] = e;
    j["beta"] = beta;
    j["slices"] = slices;
    j["grid"] = grid_n;
    j["extent"] = extent;
    if (beta == 0.0) {
        if (as_json) {
            j["max_error"] = 0.0;
            std::cout << j.dump(2) << "\n";
        } else {
            std::cout << "max error vs operator exponential: " << fmt(0.0) << "\n";
        }
        return 0;
    }
    using namespace pathint;
    Kernel k = compose(slice_kernel(mass, e, beta / slices, grid), slices);
    double err = compare_to_operator(k, mass, e, beta, grid);
    Kernel k2 = compose(slice_kernel(mass, e, beta / (2 * slices), grid), 2 * slices);
    double err2 = compare_to_operator(k2, mass, e, beta, grid);
    double width = std::sqrt(e * beta / slices);
    bool aliased = width < grid.h();
    if (as_json) {
        j["slice_width"] = width;
        j["grid_spacing"] = grid.h();
        j["aliased"] = aliased;
        j["max_error"] = err;
        j["max_error_doubled_slices"] = err2;
        j["doubled_slices_error_ratio"] = err2 / err;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "slices: " << slices << "\n";
        if (aliased)
            std::cout << "note: slice width " << fmt(width)
                      << " is below the grid spacing " << fmt(grid.h())
                      << "; the sampled kernel aliases, use fewer slices or a finer "
                         "grid\n";
        std::cout << "max error vs operator exponential: " << fmt(err) << "\n";
        std::cout << "max error with doubled slices: " << fmt(err2) << "\n";
        std::cout << "doubled-slices error ratio: " << fmt(err2 / err) << "\n";
    }
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return 1;
        }
        write_kernel_csv(out, k);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hamilton-Jacobi analysis of singular-Lagrangian systems"};
    app.require_subcommand(1);

    std::string model_path, init_text, out_path;
    std::vector<std::string> consts;
    bool as_json = false;
    double span = 1.0, step = 1e-3;
    int grid_n = 512, slices = 256;
    double extent = 10.0, mass = 1.0, e = 1.0, beta = 1.0;
    std::string branch = "+";

    CLI::App* analyze = app.add_subcommand("analyze", "run the constraint analysis");
    analyze->add_option("model", model_path, "model file")->required();
    analyze->add_flag("--json", as_json, "emit the JSON report");
    analyze->add_option("--const", consts, "override a constant, name=value");

    CLI::App* simulate =
        app.add_subcommand("simulate", "integrate the total differential equations");
    simulate->add_option("model", model_path, "model file")->required();
    simulate->add_option("--init", init_text, "comma separated name=value pairs")
        ->required();
    simulate->add_option("--span", span, "evolution-parameter span")->required();
    simulate->add_option("--step", step, "integration step");
    simulate->add_option("--out", out_path, "trajectory CSV path");
    simulate->add_option("--const", consts, "override a constant, name=value");

    CLI::App* spectrum =
        app.add_subcommand("spectrum", "spectrum of the reduced Hamiltonian");
    spectrum->add_option("model", model_path, "model file")->required();
    spectrum->add_option("--grid", grid_n, "grid points");
    spectrum->add_option("--extent", extent, "grid extent");
    spectrum->add_option("--branch", branch, "branch sign, + or -")
        ->check(CLI::IsMember({"+", "-"}));
    spectrum->add_option("--out", out_path, "spectrum CSV path");
    spectrum->add_option("--const", consts, "override a constant, name=value");

    CLI::App* kernel =
        app.add_subcommand("kernel", "sliced kernel vs operator exponential");
    kernel->add_option("--mass", mass, "mass");
    kernel->add_option("--e", e, "einbein value");
    kernel->add_option("--beta", beta, "Euclidean span");
    kernel->add_option("--slices", slices, "slice count");
    kernel->add_option("--grid", grid_n, "grid points")->default_val(128);
    kernel->add_option("--extent", extent, "grid extent")->default_val(8.0);
    kernel->add_option("--out", out_path, "kernel CSV path");
    kernel->add_flag("--json", as_json, "emit the comparison as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& h) {
        return app.exit(h);
    } catch (const CLI::ParseError& pe) {
        app.exit(pe);
        return 1;
    }

    try {
        if (app.got_subcommand(analyze)) return cmd_analyze(model_path, as_json, consts);
        if (app.got_subcommand(simulate))
            return cmd_simulate(model_path, init_text, span, step, out_path, consts);
        if (app.got_subcommand(spectrum))
            return cmd_spectrum(model_path, grid_n, extent,
                                branch.empty() ? '+' : branch[0], out_path, consts);
        if (app.got_subcommand(kernel))
            return cmd_kernel(mass, e, beta, slices, grid_n, extent, out_path, as_json);
    } catch (const DynamicsError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
