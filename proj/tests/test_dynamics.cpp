#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hjred/dynamics.hpp"
#include "hjred/report.hpp"

using namespace hjred;

namespace {

struct DiscSetup {
    HJSystem sys;
    ChainReport rep;
    SymbolId q1, p1;

    DiscSetup() : sys(build_hj_system(builtin_models()[1], 42)), rep(run_chain(sys)) {
        q1 = *sys.table().find("q1");
        p1 = *sys.table().find("q1_p");
    }

    Trajectory run(double span, double step, double q10 = 0.6, double p10 = 0.0,
                   double q20 = 0.8) const {
        std::map<SymbolId, double> init{{q1, q10}, {p1, p10}};
        return integrate(sys, rep, init, ParameterPath::time_span(span, {q20}), step);
    }
};

struct ParticleSetup {
    HJSystem sys;
    ChainReport rep;
    std::map<SymbolId, double> init;

    ParticleSetup() : sys(build_hj_system(builtin_models()[0], 42)), rep(run_chain(sys)) {
        auto id = [&](const char* n) { return *sys.table().find(n); };
        init = {{id("x0"), 0.0},          {id("x1"), 0.0}, {id("x2"), 0.0},
                {id("x3"), 0.0},          {id("x0_p"), std::sqrt(2.0)},
                {id("x1_p"), 1.0},        {id("x2_p"), 0.0},
                {id("x3_p"), 0.0},        {id("e"), 1.0}};
    }
};

} // namespace

TEST_CASE("disc trajectory matches the closed-form oscillation") {
    DiscSetup d;
    Trajectory t = d.run(10.0, 1e-3);
    CHECK(t.samples.size() == 10001);
    double werr = 0;
    for (const TrajectorySample& s : t.samples) {
        double tt = s.params[0];
        werr = std::max(werr, std::abs(s.q[0] - 0.6 * std::cos(1.6 * tt)));
        werr = std::max(werr, std::abs(s.p[0] + 0.6 * std::sin(1.6 * tt)));
    }
    CHECK(werr <= 1e-6);
}

TEST_CASE("constraint drift is tiny and shrinks at fourth order") {
    DiscSetup d;
    Trajectory t1 = d.run(10.0, 1e-3);
    CHECK(t1.max_drift() <= 1e-8);
    // at step 1e-3 the drift sits on the double-precision floor, so the
    // step-scaling law is measured where truncation dominates
    Trajectory tc = d.run(10.0, 0.08);
    Trajectory tf = d.run(10.0, 0.04);
    CHECK(tf.max_drift() * 8.0 <= tc.max_drift());
    // frozen parameter stays bit-identical along the flow
    for (const TrajectorySample& s : t1.samples) CHECK(s.params[1] == 0.8);
}

TEST_CASE("action accumulation matches the Lagrangian integral") {
    DiscSetup d;
    Trajectory t = d.run(10.0, 1e-3);
    CHECK(action_residual(t, d.sys) <= 1e-6);

    // zero-length path: a single row with zero action
    Trajectory t0 = d.run(0.0, 1e-3);
    CHECK(t0.samples.size() == 1);
    CHECK(action_residual(t0, d.sys) == 0.0);
}

TEST_CASE("off-surface initial data is rejected before stepping") {
    DiscSetup d;
    std::map<SymbolId, double> bad{{d.q1, 1.0}, {d.p1, 1.0}};
    CHECK_THROWS_AS(
        integrate(d.sys, d.rep, bad, ParameterPath::time_span(1.0, {1.0}), 1e-3),
        DynamicsError);
    // violating the generated constraint by 0.1
    std::map<SymbolId, double> off{{d.q1, 0.6}, {d.p1, 0.0}};
    ParameterPath p = ParameterPath::time_span(1.0, {0.8 + 0.1});
    CHECK_THROWS_AS(integrate(d.sys, d.rep, off, p, 1e-3), DynamicsError);
}

TEST_CASE("paths may not vary a frozen parameter") {
    DiscSetup d;
    ParameterPath p;
    p.waypoints = {{0.0, 0.8}, {1.0, 0.9}};
    std::map<SymbolId, double> init{{d.q1, 0.6}, {d.p1, 0.0}};
    CHECK_THROWS_AS(integrate(d.sys, d.rep, init, p, 1e-3), DynamicsError);
}

TEST_CASE("particle trajectory: linear flow, exact action") {
    ParticleSetup p;
    Trajectory t =
        integrate(p.sys, p.rep, p.init, ParameterPath::time_span(1.0, {1.0}), 1e-3);
    const TrajectorySample& last = t.samples.back();
    CHECK(last.q[0] == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12)); // x0 = -e p0 tau
    CHECK(last.q[1] == doctest::Approx(1.0).epsilon(1e-12));             // x1 = e p1 tau
    CHECK(last.z == doctest::Approx(-1.0).epsilon(1e-12));               // z = -m^2 e tau
    CHECK(t.max_drift() <= 1e-10);
    CHECK(action_residual(t, p.sys) <= 1e-8);
}

TEST_CASE("gauge orbit: path-ordering moves points only along the momentum") {
    ParticleSetup p;
    GaugeOrbitResult r = gauge_orbit_check(p.sys, p.rep, p.init, 1.0, 1.0, 1e-2);
    CHECK(r.observable_mismatch <= 1e-9);
    CHECK(r.orbit_alignment <= 1e-9);
    CHECK(r.coordinate_shift == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));

    GaugeOrbitResult r0 = gauge_orbit_check(p.sys, p.rep, p.init, 1.0, 0.0, 1e-2);
    CHECK(r0.observable_mismatch == 0.0);
    CHECK(r0.coordinate_shift == 0.0);
    CHECK(r0.orbit_alignment == 0.0);

    GaugeOrbitResult rt = gauge_orbit_check(p.sys, p.rep, p.init, 0.0, 1.0, 1e-2);
    CHECK(rt.coordinate_shift == 0.0);
}

TEST_CASE("diagonal parameter path combines both flows exactly") {
    // tau and e vary together on one segment; the x flow integrates
    // e(s) p dtau with e linear in s, which RK4 resolves exactly
    ParticleSetup p;
    ParameterPath diag;
    diag.waypoints = {{0.0, 1.0}, {1.0, 2.0}};
    Trajectory t = integrate(p.sys, p.rep, p.init, diag, 1e-2);
    double mean_e = 1.5; // average einbein along the segment
    const TrajectorySample& last = t.samples.back();
    CHECK(last.q[0] == doctest::Approx(-std::sqrt(2.0) * mean_e).epsilon(1e-12));
    CHECK(last.q[1] == doctest::Approx(1.0 * mean_e).epsilon(1e-12));
    CHECK(t.max_drift() <= 1e-10);
}

TEST_CASE("reduced flow equivalence on the disc") {
    DiscSetup d;
    ChainReport rep = d.rep;
    REQUIRE(!rep.branches.empty());
    Expr hred = rep.branches[0].reduced_h0; // q2 > 0 branch

    // independent reduced integrator: plain RK4 on Hamilton's equations of
    // the one-degree-of-freedom reduced Hamiltonian
    Expr dq = differentiate(hred, d.p1);
    Expr dp = neg(differentiate(hred, d.q1));
    SymbolId rsym = *d.sys.table().find("R");
    auto rhs = [&](double q, double p, double& oq, double& op) {
        std::map<SymbolId, double> env{{d.q1, q}, {d.p1, p}, {rsym, 1.0}};
        oq = eval_num(dq, env, d.sys.table().size());
        op = eval_num(dp, env, d.sys.table().size());
    };
    double q = 0.6, p = 0.0, h = 1e-3;
    Trajectory full = d.run(10.0, 1e-3);
    double werr = 0;
    for (std::size_t i = 0; i + 1 < full.samples.size(); ++i) {
        double k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p;
        rhs(q, p, k1q, k1p);
        rhs(q + h / 2 * k1q, p + h / 2 * k1p, k2q, k2p);
        rhs(q + h / 2 * k2q, p + h / 2 * k2p, k3q, k3p);
        rhs(q + h * k3q, p + h * k3p, k4q, k4p);
        q += h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
        p += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
        werr = std::max(werr, std::abs(q - full.samples[i + 1].q[0]));
        werr = std::max(werr, std::abs(p - full.samples[i + 1].p[0]));
    }
    CHECK(werr <= 1e-6);
}

TEST_CASE("trajectory CSV has the documented header and width") {
    DiscSetup d;
    Trajectory t = d.run(0.01, 1e-3);
    std::ostringstream os;
    write_trajectory_csv(os, t, d.sys.table());
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "s,t,q2,q1,q1_p,t_p,q2_p,z");
    std::string row;
    std::getline(is, row);
    CHECK(std::count(row.begin(), row.end(), ',') == 7);
}
