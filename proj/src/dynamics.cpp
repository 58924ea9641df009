#include "hjred/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace hjred {

ParameterPath ParameterPath::time_span(double span,
                                       const std::vector<double>& fixed) {
    ParameterPath p;
    std::vector<double> a{0.0}, b{span};
    for (double f : fixed) {
        a.push_back(f);
        b.push_back(f);
    }
    p.waypoints = {a, b};
    return p;
}

namespace {

struct Evaluator {
    const HJSystem& sys;
    EomTable eom;
    std::vector<double> env;
    std::unique_ptr<bool[]> bound;

    explicit Evaluator(const HJSystem& s) : sys(s), eom(equations_of_motion(s)) {
        std::size_t n = sys.table().size();
        env.assign(n, 0.0);
        bound.reset(new bool[n]());
        for (const auto& [c, v] : sys.model.constants) {
            if (v) {
                env[c] = *v;
                bound[c] = true;
            } else {
                throw DynamicsError("constant " + sys.table().name(c) +
                                    " has no numeric value; set one to integrate");
            }
        }
    }

    void set(SymbolId id, double v) {
        env[id] = v;
        bound[id] = true;
    }

    double eval(const Expr& e) const {
        return eval_num(e, std::span<const double>(env),
                        std::span<const bool>(bound.get(), env.size()));
    }
};

} // namespace

Trajectory integrate(const HJSystem& sys, const ChainReport& report,
                     const std::map<SymbolId, double>& init,
                     const ParameterPath& path, double step) {
    if (path.waypoints.empty())
        throw DynamicsError("parameter path has no waypoints");
    std::size_t np = sys.parameters.size();
    for (const auto& w : path.waypoints)
        if (w.size() != np)
            throw DynamicsError("path waypoint arity does not match parameter count");
    if (!(step > 0)) throw DynamicsError("step must be positive");

    // frozen parameters must stay constant along the path
    for (std::size_t al = 0; al < np; ++al) {
        if (!report.is_frozen(sys.parameters[al].parameter)) continue;
        for (const auto& w : path.waypoints)
            if (w[al] != path.waypoints[0][al])
                throw DynamicsError("path varies the frozen parameter " +
                                    sys.table().name(sys.parameters[al].parameter));
    }

    Evaluator ev(sys);

    Trajectory traj;
    for (const DynamicalCoordinate& d : sys.dynamical) traj.q_vars.push_back(d.coordinate);
    for (const DynamicalCoordinate& d : sys.dynamical) traj.p_vars.push_back(d.momentum);
    for (const ParameterCoordinate& p : sys.parameters) traj.p_vars.push_back(p.momentum);
    for (const ParameterCoordinate& p : sys.parameters)
        traj.param_vars.push_back(p.parameter);

    // initial state
    for (std::size_t al = 0; al < np; ++al)
        ev.set(sys.parameters[al].parameter, path.waypoints[0][al]);
    for (const DynamicalCoordinate& d : sys.dynamical) {
        auto it = init.find(d.coordinate);
        if (it == init.end())
            throw DynamicsError("initial state missing coordinate " +
                                sys.table().name(d.coordinate));
        ev.set(d.coordinate, it->second);
        it = init.find(d.momentum);
        if (it == init.end())
            throw DynamicsError("initial state missing momentum " +
                                sys.table().name(d.momentum));
        ev.set(d.momentum, it->second);
    }
    for (const ParameterCoordinate& p : sys.parameters) {
        auto it = init.find(p.momentum);
        double v = it != init.end() ? it->second : -ev.eval(p.h);
        ev.set(p.momentum, v);
    }

    // on-surface precondition
    for (std::size_t ci = 0; ci < report.constraints.size(); ++ci) {
        double v = ev.eval(report.constraints[ci].expr);
        if (std::abs(v) > 1e-10)
            throw DynamicsError(
                "initial state violates constraint " +
                to_string(report.constraints[ci].expr, sys.table()) + " by " +
                std::to_string(v));
    }

    std::size_t k = sys.dynamical.size();
    std::size_t nstate = 2 * k + np + 1; // q, p, p_beta, z
    std::vector<double> y(nstate);
    for (std::size_t a = 0; a < k; ++a) y[a] = ev.env[sys.dynamical[a].coordinate];
    for (std::size_t a = 0; a < k; ++a) y[k + a] = ev.env[sys.dynamical[a].momentum];
    for (std::size_t al = 0; al < np; ++al)
        y[2 * k + al] = ev.env[sys.parameters[al].momentum];
    y[nstate - 1] = 0.0;

    std::vector<double> base = path.waypoints[0];

    auto load_state = [&](const std::vector<double>& yy,
                          const std::vector<double>& params) {
        for (std::size_t a = 0; a < k; ++a) ev.set(sys.dynamical[a].coordinate, yy[a]);
        for (std::size_t a = 0; a < k; ++a) ev.set(sys.dynamical[a].momentum, yy[k + a]);
        for (std::size_t al = 0; al < np; ++al) {
            ev.set(sys.parameters[al].momentum, yy[2 * k + al]);
            ev.set(sys.parameters[al].parameter, params[al]);
        }
    };

    std::vector<double> drift(report.constraints.size(), 0.0);
    auto record = [&](double s, const std::vector<double>& yy,
                      const std::vector<double>& params) {
        load_state(yy, params);
        TrajectorySample smp;
        smp.s = s;
        smp.params = params;
        smp.q.assign(yy.begin(), yy.begin() + k);
        smp.p.assign(yy.begin() + k, yy.begin() + 2 * k + np);
        smp.z = yy[nstate - 1];
        traj.samples.push_back(std::move(smp));
        for (std::size_t ci = 0; ci < report.constraints.size(); ++ci)
            drift[ci] = std::max(drift[ci],
                                 std::abs(ev.eval(report.constraints[ci].expr)));
    };

    record(0.0, y, base);

    std::size_t nseg = path.waypoints.size() - 1;
    std::vector<double> delta(np), params(np), dy(nstate), k1(nstate), k2(nstate),
        k3(nstate), k4(nstate), ytmp(nstate);

    auto rhs = [&](const std::vector<double>& yy, double sigma, std::size_t seg,
                   std::vector<double>& out) {
        for (std::size_t al = 0; al < np; ++al)
            params[al] = path.waypoints[seg][al] + sigma * delta[al];
        load_state(yy, params);
        std::size_t row = 0;
        for (std::size_t v = 0; v < 2 * k + np; ++v, ++row) {
            double acc = 0;
            for (std::size_t al = 0; al < np; ++al) {
                if (delta[al] == 0.0) continue;
                acc += ev.eval(ev.eom.coefficients[row][al]) * delta[al];
            }
            out[v] = acc;
        }
        double accz = 0;
        for (std::size_t al = 0; al < np; ++al) {
            if (delta[al] == 0.0) continue;
            accz += ev.eval(ev.eom.dz[al]) * delta[al];
        }
        out[nstate - 1] = accz;
    };

    for (std::size_t seg = 0; seg < nseg; ++seg) {
        double maxd = 0;
        for (std::size_t al = 0; al < np; ++al) {
            delta[al] = path.waypoints[seg + 1][al] - path.waypoints[seg][al];
            maxd = std::max(maxd, std::abs(delta[al]));
        }
        if (maxd == 0.0) continue;
        std::size_t nsteps = static_cast<std::size_t>(std::ceil(maxd / step - 1e-12));
        nsteps = std::max<std::size_t>(nsteps, 1);
        double ds = 1.0 / static_cast<double>(nsteps);
        for (std::size_t istep = 0; istep < nsteps; ++istep) {
            double s0 = istep * ds;
            rhs(y, s0, seg, k1);
            for (std::size_t i = 0; i < nstate; ++i) ytmp[i] = y[i] + 0.5 * ds * k1[i];
            rhs(ytmp, s0 + 0.5 * ds, seg, k2);
            for (std::size_t i = 0; i < nstate; ++i) ytmp[i] = y[i] + 0.5 * ds * k2[i];
            rhs(ytmp, s0 + 0.5 * ds, seg, k3);
            for (std::size_t i = 0; i < nstate; ++i) ytmp[i] = y[i] + ds * k3[i];
            rhs(ytmp, s0 + ds, seg, k4);
            for (std::size_t i = 0; i < nstate; ++i)
                y[i] += ds / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
            double sig = (istep + 1) * ds;
            for (std::size_t al = 0; al < np; ++al)
                params[al] = path.waypoints[seg][al] + sig * delta[al];
            double sglob =
                (static_cast<double>(seg) + sig) / static_cast<double>(nseg);
            record(sglob, y, params);
        }
    }

    traj.constraint_drift = std::move(drift);
    return traj;
}

double action_residual(const Trajectory& traj, const HJSystem& sys) {
    if (traj.samples.size() < 2) return 0.0;
    std::size_t np = sys.parameters.size();
    for (const TrajectorySample& s : traj.samples)
        for (std::size_t al = 1; al < np; ++al)
            if (s.params[al] != traj.samples[0].params[al])
                throw DynamicsError(
                    "action residual requires a path along the evolution parameter "
                    "only");

    Evaluator ev(sys);
    std::size_t k = sys.dynamical.size();

    // L(q, qdot) along the flow, with qdot_a taken from the flow equations
    // and the degenerate velocities zero (their parameters do not move).
    std::vector<double> lvals;
    lvals.reserve(traj.samples.size());
    for (const TrajectorySample& s : traj.samples) {
        for (std::size_t a = 0; a < k; ++a) ev.set(sys.dynamical[a].coordinate, s.q[a]);
        for (std::size_t a = 0; a < k; ++a) ev.set(sys.dynamical[a].momentum, s.p[a]);
        for (std::size_t al = 0; al < np; ++al) {
            ev.set(sys.parameters[al].parameter, s.params[al]);
            ev.set(sys.parameters[al].momentum, s.p[k + al]);
        }
        for (std::size_t a = 0; a < k; ++a) {
            double qdot = ev.eval(ev.eom.coefficients[a][0]);
            ev.set(sys.dynamical[a].velocity, qdot);
        }
        for (std::size_t al = 1; al < np; ++al) {
            auto vid = sys.table().find(
                SymbolTable::velocity_name(sys.table().name(sys.parameters[al].parameter)));
            if (vid) ev.set(*vid, 0.0);
        }
        lvals.push_back(ev.eval(sys.model.lagrangian));
    }

    double t0 = traj.samples.front().params[0];
    double t1 = traj.samples.back().params[0];
    std::size_t nint = traj.samples.size() - 1;
    double h = (t1 - t0) / static_cast<double>(nint);

    // non-uniform spacing (multi-segment paths): plain trapezoid
    bool uniform = true;
    for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i) {
        double dt = traj.samples[i + 1].params[0] - traj.samples[i].params[0];
        if (std::abs(dt - h) > 1e-9 * (std::abs(h) + 1e-30)) {
            uniform = false;
            break;
        }
    }
    if (!uniform) {
        double integral = 0.0;
        for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i) {
            double dt = traj.samples[i + 1].params[0] - traj.samples[i].params[0];
            integral += 0.5 * dt * (lvals[i] + lvals[i + 1]);
        }
        return std::abs(traj.samples.back().z - integral);
    }

    // composite Simpson over the uniform t-grid (3/8 tail for odd counts)
    double integral = 0.0;
    std::size_t even_end = nint;
    if (nint % 2 != 0) {
        if (nint >= 3) {
            std::size_t b = nint - 3;
            integral += 3.0 * h / 8.0 *
                        (lvals[b] + 3 * lvals[b + 1] + 3 * lvals[b + 2] + lvals[b + 3]);
            even_end = b;
        } else {
            return std::abs(traj.samples.back().z -
                            0.5 * h * (lvals[0] + lvals[1]));
        }
    }
    for (std::size_t i = 0; i + 2 <= even_end; i += 2)
        integral += h / 3.0 * (lvals[i] + 4 * lvals[i + 1] + lvals[i + 2]);
    return std::abs(traj.samples.back().z - integral);
}

GaugeOrbitResult gauge_orbit_check(const HJSystem& sys, const ChainReport& report,
                                   const std::map<SymbolId, double>& init,
                                   double delta_t0, double delta_par, double step) {
    if (sys.parameters.size() != 2)
        throw DynamicsError("gauge orbit check expects exactly one parameter besides "
                            "the evolution parameter");
    if (report.is_frozen(sys.parameters[1].parameter))
        throw DynamicsError("gauge orbit check requires an unfrozen parameter");
    auto it = init.find(sys.parameters[1].parameter);
    if (it == init.end())
        throw DynamicsError("initial state must fix the parameter " +
                            sys.table().name(sys.parameters[1].parameter));
    double par0 = it->second;

    ParameterPath a, b;
    a.waypoints = {{0.0, par0}, {delta_t0, par0}, {delta_t0, par0 + delta_par}};
    b.waypoints = {{0.0, par0}, {0.0, par0 + delta_par}, {delta_t0, par0 + delta_par}};

    Trajectory ta = integrate(sys, report, init, a, step);
    Trajectory tb = integrate(sys, report, init, b, step);
    const TrajectorySample& fa = ta.samples.back();
    const TrajectorySample& fb = tb.samples.back();

    double mismatch = 0.0;
    for (std::size_t i = 0; i < fa.p.size(); ++i)
        mismatch = std::max(mismatch, std::abs(fa.p[i] - fb.p[i]));

    // constraint values at both endpoints are invariants as well
    Evaluator ev(sys);
    std::size_t k = sys.dynamical.size();
    auto constraint_vals = [&](const TrajectorySample& s) {
        std::vector<double> out;
        for (std::size_t x = 0; x < k; ++x) ev.set(sys.dynamical[x].coordinate, s.q[x]);
        for (std::size_t x = 0; x < k; ++x) ev.set(sys.dynamical[x].momentum, s.p[x]);
        for (std::size_t al = 0; al < sys.parameters.size(); ++al) {
            ev.set(sys.parameters[al].parameter, s.params[al]);
            ev.set(sys.parameters[al].momentum, s.p[k + al]);
        }
        for (const Constraint& c : report.constraints) out.push_back(ev.eval(c.expr));
        return out;
    };
    std::vector<double> ca = constraint_vals(fa), cb = constraint_vals(fb);
    for (std::size_t i = 0; i < ca.size(); ++i)
        mismatch = std::max(mismatch, std::abs(ca[i] - cb[i]));

    GaugeOrbitResult res{};
    res.observable_mismatch = mismatch;

    // the gauge orbit points along the evolution flow q_a' = dH'_0/dp_a
    // (for the particle this is e p with the index raised)
    for (std::size_t x = 0; x < k; ++x) ev.set(sys.dynamical[x].coordinate, fa.q[x]);
    for (std::size_t x = 0; x < k; ++x) ev.set(sys.dynamical[x].momentum, fa.p[x]);
    for (std::size_t al = 0; al < sys.parameters.size(); ++al) {
        ev.set(sys.parameters[al].parameter, fa.params[al]);
        ev.set(sys.parameters[al].momentum, fa.p[k + al]);
    }
    std::vector<double> dx(k), pdir(k);
    double dxn = 0, pn = 0, dot = 0;
    for (std::size_t x = 0; x < k; ++x) {
        dx[x] = fa.q[x] - fb.q[x];
        pdir[x] = ev.eval(ev.eom.coefficients[x][0]);
        dxn += dx[x] * dx[x];
        pn += pdir[x] * pdir[x];
        dot += dx[x] * pdir[x];
    }
    dxn = std::sqrt(dxn);
    pn = std::sqrt(pn);
    res.coordinate_shift = dxn;
    if (dxn < 1e-300 || pn < 1e-300) {
        res.orbit_alignment = 0.0;
        return res;
    }
    double rej = 0;
    for (std::size_t x = 0; x < k; ++x) {
        double r = dx[x] - dot / (pn * pn) * pdir[x];
        rej += r * r;
    }
    res.orbit_alignment = std::sqrt(rej) / dxn;
    return res;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const SymbolTable& table) {
    out << "s";
    for (SymbolId p : traj.param_vars) out << "," << table.name(p);
    for (SymbolId q : traj.q_vars) out << "," << table.name(q);
    for (SymbolId p : traj.p_vars) out << "," << table.name(p);
    out << ",z\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, ",%.16e", v);
        out << buf;
    };
    for (const TrajectorySample& s : traj.samples) {
        std::snprintf(buf, sizeof buf, "%.16e", s.s);
        out << buf;
        for (double v : s.params) put(v);
        for (double v : s.q) put(v);
        for (double v : s.p) put(v);
        put(s.z);
        out << "\n";
    }
}

} // namespace hjred
