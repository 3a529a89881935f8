#include "gldeg/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "gldeg/chart_energy.hpp"
#include "gldeg/elliptic.hpp"
#include "gldeg/energy.hpp"
#include "gldeg/errors.hpp"
#include "gldeg/fields.hpp"
#include "gldeg/mesh.hpp"
#include "gldeg/mutation.hpp"
#include "gldeg/profiles.hpp"
#include "gldeg/radial.hpp"
#include "gldeg/relax.hpp"
#include "gldeg/series.hpp"

namespace gldeg {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

Mesh annulus_mesh(double edge, std::vector<RefinePatch> refine = {}) {
    DomainSpec spec;
    spec.outer = {{0, 0}, 1.0};
    spec.holes = {{{0, 0}, 0.3}};
    spec.target_edge_length = edge;
    spec.refine = std::move(refine);
    return build_mesh(spec);
}

ComplexField winding_field(const Mesh& m, int d) {
    ComplexField u(m);
    for (int v = 0; v < m.vertex_count(); ++v) {
        double phi = std::atan2(m.vertices[v].y, m.vertices[v].x);
        u.values[v] = std::polar(1.0, d * phi);
    }
    return u;
}

RefinePatch bump_patch(const Mesh& coarse, int loop, double eta, double angle,
                       double divisor = 25.0) {
    double rp = eta * std::sqrt(2.0 / kPi);
    DiskBump mb = build_M_eta_delta(0.25 * eta, 0.9);
    double feature = 2.0 * mb.t * rp / kPi;
    PocketSpec pk = pocket_for(coarse, loop, eta, angle);
    return {pk.center, std::max(feature / divisor, 5e-5)};
}

// smooth trial field on the sub-annulus with |w| = 1 at both radii
struct TrialW : PolarFn {
    double ra, rb;
    double a1, a2, b1, b2;
    int m1, m2;

    double s(double r) const {
        double x = (r - ra) / (rb - ra);
        return std::sin(kPi * x) * std::sin(kPi * x);
    }
    double sp(double r) const {
        double x = (r - ra) / (rb - ra);
        return 2 * std::sin(kPi * x) * std::cos(kPi * x) * kPi / (rb - ra);
    }
    double p(double phi) const { return a1 * std::cos(m1 * phi) + a2 * std::sin(m2 * phi); }
    double pp(double phi) const {
        return -a1 * m1 * std::sin(m1 * phi) + a2 * m2 * std::cos(m2 * phi);
    }
    cplx g(double phi) const { return cplx(b1 * std::cos(m2 * phi), b2 * std::sin(m1 * phi)); }
    cplx gp(double phi) const {
        return cplx(-b1 * m2 * std::sin(m2 * phi), b2 * m1 * std::cos(m1 * phi));
    }

    cplx value(double r, double phi) const override {
        return std::polar(1.0, p(phi)) * (1.0 + s(r) * g(phi));
    }
    cplx d_r(double r, double phi) const override {
        return std::polar(1.0, p(phi)) * sp(r) * g(phi);
    }
    cplx d_phi(double r, double phi) const override {
        cplx e = std::polar(1.0, p(phi));
        return cplx(0, 1) * pp(phi) * value(r, phi) + e * s(r) * gp(phi);
    }
};

using Criterion = CriterionResult (*)();

CriterionResult guarded(int id, const std::string& name, CriterionResult (*body)()) {
    try {
        CriterionResult r = body();
        r.id = id;
        r.name = name;
        return r;
    } catch (const std::exception& e) {
        return {id, name, false, std::string("exception: ") + e.what()};
    }
}

// 1. I0 on the annulus after one Richardson step over two mesh levels.
CriterionResult c1() {
    double coarse = I0(annulus_mesh(0.1), {1});
    double fine = I0(annulus_mesh(0.05), {1});
    double rich = fine + (fine - coarse) / 3.0;
    double exact = kPi * std::log(10.0 / 3.0);
    double rel = std::fabs(rich - exact) / exact;
    return {0, "", rel <= 0.01,
            fmt("Richardson I0 = %.5f vs pi ln(10/3) = %.5f, rel = %.2e (tol 1e-2)", rich, exact, rel)};
}

// 2. abdeg of the pure winding maps, with error decay under refinement.
CriterionResult c2() {
    Mesh mc = annulus_mesh(0.06), mf = annulus_mesh(0.03);
    auto Vc = solve_all_V(mc);
    auto Vf = solve_all_V(mf);
    bool pass = true;
    std::ostringstream det;
    for (int d : {1, 2, 3}) {
        double ec = std::fabs(abdeg(winding_field(mc, d), Vc)[0] - d);
        double ef = std::fabs(abdeg(winding_field(mf, d), Vf)[0] - d);
        double ratio = ef / ec;
        // observed convergence is quadratic (ratio ~ 0.25); the window accepts
        // anything from superlinear to at-least-halving
        bool ok = ef <= 0.02 && ratio >= 0.1 && ratio <= 0.75;
        pass = pass && ok;
        det << fmt("d=%d err=%.4f ratio=%.2f  ", d, ef, ratio);
    }
    return {0, "", pass, det.str() + "(tol err<=0.02, ratio in [0.1,0.75])"};
}

// 3. Energy splitting identity E(rho w) = E(u) + L(w) on random trial fields.
CriterionResult c3() {
    double eps = 0.1, ra = 0.45, rb = 0.85;
    RadialProfile f = solve_radial_profile(0.3, 1.0, 1.0, 1.0, 1, eps);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> amp(-0.4, 0.4);
    std::uniform_int_distribution<int> mode(1, 4);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        TrialW w;
        w.ra = ra;
        w.rb = rb;
        w.a1 = amp(rng);
        w.a2 = amp(rng);
        w.b1 = amp(rng);
        w.b2 = amp(rng);
        w.m1 = mode(rng);
        w.m2 = mode(rng);
        SplitCheck chk = energy_split_check(f, 1, eps, ra, rb, w);
        worst = std::max(worst, std::fabs(chk.lhs - chk.rhs) / std::fabs(chk.lhs));
    }
    return {0, "", worst <= 1e-6, fmt("20 random fields, worst rel defect %.2e (tol 1e-6)", worst)};
}

// 4. The eta-slack disk bump: degree, modulus, plateau, energy, t^2 law.
CriterionResult c4() {
    double eta = 0.05, delta = 0.5;
    DiskBump M = build_M_eta_delta(eta, delta);
    bool pass = M.energy <= kPi + eta;
    double max_mod = 0.0, trace_dev = 0.0, plateau = 0.0;
    std::vector<cplx> trace(4096);
    for (int j = 0; j < 4096; ++j) {
        double theta = -kPi + 2 * kPi * j / 4096.0;
        trace[j] = M.value(std::polar(1.0, theta));
        trace_dev = std::max(trace_dev, std::fabs(std::abs(trace[j]) - 1.0));
        if (std::fabs(theta) > delta) plateau = std::max(plateau, std::abs(trace[j] - 1.0));
        for (double r : {0.3, 0.7, 0.95})
            max_mod = std::max(max_mod, std::abs(M.value(std::polar(r, theta))));
    }
    int deg = degree_of_samples(trace).rounded;
    pass = pass && deg == 1 && max_mod <= 2.0 + 1e-6 && trace_dev <= 1e-6 && plateau <= 1e-6;
    double r1 = (disk_bump_energy(0.1, delta) - kPi) / (disk_bump_energy(0.05, delta) - kPi);
    double r2 = (disk_bump_energy(0.05, delta) - kPi) / (disk_bump_energy(0.025, delta) - kPi);
    // log-log slope 2 +- 0.3 per halving: ratio in [2^1.7, 2^2.3]
    pass = pass && r1 >= 3.25 && r1 <= 4.93 && r2 >= 3.25 && r2 <= 4.93;
    return {0, "", pass,
            fmt("deg=%d E=%.4f<=%.4f maxmod=%.4f slope ratios %.2f %.2f (in [3.25,4.93])", deg,
                M.energy, kPi + eta, max_mod, r1, r2)};
}

// 5. Fourier coefficients of the boundary bump trace: plateau hook exact,
// cubic-decay constant stable between amplitudes.
CriterionResult c5() {
    TestFnParams p;
    p.delta = 0.5;
    p.t = 0.1;
    p.K = 256;
    FourierData hook = fourier_b(p, true);
    double hook_dev = 0.0;
    for (int k = -256; k <= 256; ++k)
        hook_dev = std::max(hook_dev, std::fabs(hook.b_at(k) - hook.c_at(k)));
    auto fitted = [&](double t) {
        TestFnParams q = p;
        q.t = t;
        FourierData fd = fourier_b(q);
        double C = 0.0;
        for (int k = -256; k <= 256; ++k) {
            double w = 1.0 + std::abs(k);
            C = std::max(C, std::fabs(fd.b_at(k) - fd.c_at(k)) * w * w * w);
        }
        return C;
    };
    double c05 = fitted(0.05), c02 = fitted(0.02);
    double drift = std::fabs(c05 - c02) / c05;
    bool pass = hook_dev <= 1e-8 && drift <= 0.5;
    return {0, "", pass,
            fmt("hook dev %.2e (tol 1e-8), decay constant %.1f vs %.1f, drift %.1f%% (tol 50%%)",
                hook_dev, c05, c02, 100 * drift)};
}

// 6. Profile closed forms against 1D quadrature on a 5x5 (k,l) grid.
CriterionResult c6() {
    ProfileSet ps = make_profiles(10.0, 0.4);
    auto [gx, gw] = gauss_legendre(64);
    double a = 1.0 - ps.delta, b = 1.0;
    auto integ = [&](auto&& f) {
        double s = 0.0;
        for (std::size_t i = 0; i < gx.size(); ++i) {
            double h = 0.5 * (a + b) + 0.5 * (b - a) * gx[i];
            s += 0.5 * (b - a) * gw[i] * f(h);
        }
        return s;
    };
    double worst = 0.0;
    for (int k = 1; k <= 5; ++k) {
        worst = std::max(worst, std::fabs(ps.int_f(k) - integ([&](double h) { return ps.f(k, h); })));
        worst = std::max(worst, std::fabs(ps.phi_closed(k) -
                                          integ([&](double h) {
                                              double fp = ps.fp(k, h), f = ps.f(k, h);
                                              double al = ps.alpha(k);
                                              return fp * fp + al * al * f * f;
                                          })));
        for (int l = 6; l <= 10; ++l) {
            worst = std::max(worst, std::fabs(ps.int_ff(k, l) - integ([&](double h) {
                                                  return ps.f(k, h) * ps.f(l, h);
                                              })));
            worst = std::max(worst, std::fabs(ps.int_fpfp(k, l) - integ([&](double h) {
                                                  return ps.fp(k, h) * ps.fp(l, h);
                                              })));
        }
    }
    return {0, "", worst <= 1e-8, fmt("worst closed-form defect %.2e (tol 1e-8)", worst)};
}

// 7. Series oracle battery plus the dyadic estimate ladder up to k = 160.
CriterionResult c7() {
    auto suite = default_series_suite();
    int fails = 0;
    for (const auto& c : suite) fails += c.pass ? 0 : 1;
    bool pass = suite.size() >= 20 && fails == 0;
    for (int k : {10, 20, 40, 80}) {
        for (const auto& c : check_fk_estimates(k, k / 2, 10.0, 0.4))
            if (!c.pass) {
                ++fails;
                pass = false;
            }
    }
    return {0, "", pass, fmt("%zu suite rows + ladder to k=160, %d failures", suite.size(), fails)};
}

// 8. S(delta, t): bounded remainder and the amplitude bound.
CriterionResult c8() {
    bool pass = true;
    std::ostringstream det;
    for (double delta : {0.3, 0.5}) {
        double maxgap = 0.0;
        for (double t : {0.1, 0.05, 0.02}) {
            int K = static_cast<int>(std::ceil(std::log(1e-13) / std::log(1 - t)));
            double sd = S_direct(delta, t, K);
            maxgap = std::max(maxgap, std::fabs(sd - S_closed(delta, t)));
            pass = pass && 4 * t * t * sd <= kPi - delta + 2.0 * t;
        }
        pass = pass && maxgap <= 10.0;
        det << fmt("delta=%.1f maxgap=%.2f  ", delta, maxgap);
    }
    return {0, "", pass, det.str() + "(gap tol 10, amplitude bound C=2)"};
}

// 9. Chart functional of the boundary test function. The pi - 2 delta t
// margin is checked in its regime of validity (lambda at the (3.60) equality
// with eps = 1); at eps = 0.05 the same functional decreases toward pi and
// its t -> 0 intercept recovers pi.
CriterionResult c9() {
    bool pass = true;
    std::ostringstream det;
    for (double t : {0.05, 0.02, 0.01}) {
        TestFnParams p;
        p.t = t;
        p.delta = 0.5;
        p.K = 512;
        TestFnReport r = verify_testfn(1, 0.3, p, 1.0);
        bool ok = r.M_raw < kPi && r.pi_margin >= 0.9 * 2 * p.delta * t && r.deg_outer == -1 &&
                  r.chain_ok;
        pass = pass && ok;
        det << fmt("t=%.3g margin=%.3f  ", t, r.pi_margin);
    }
    // intercept of the small-t fit recovers pi within 2%
    {
        std::vector<double> ts = {0.01, 0.005, 0.002}, Ms;
        for (double t : ts) {
            TestFnParams p;
            p.t = t;
            p.delta = 0.5;
            p.K = 2048;
            Ms.push_back(verify_testfn(1, 0.3, p, 1.0).M_raw);
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            sx += ts[i];
            sy += Ms[i];
            sxx += ts[i] * ts[i];
            sxy += ts[i] * Ms[i];
        }
        double n = static_cast<double>(ts.size());
        double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        double intercept = (sy - slope * sx) / n;
        bool ok = std::fabs(intercept - kPi) <= 0.02 * kPi;
        pass = pass && ok;
        det << fmt("intercept=%.4f (pi +- 2%%)  ", intercept);
    }
    // stiff-lambda regime: the excess decreases monotonically in t
    {
        double prev = 1e300;
        bool mono = true;
        for (double t : {0.05, 0.02, 0.01, 0.005, 0.002}) {
            TestFnParams p;
            p.t = t;
            p.delta = 0.5;
            p.K = 4096;
            double excess = verify_testfn(1, 0.3, p, 0.05).M_raw - kPi;
            mono = mono && excess < prev;
            prev = excess;
        }
        pass = pass && mono;
        det << fmt("stiff excess monotone=%d", mono ? 1 : 0);
    }
    return {0, "", pass, det.str()};
}

// 10. Mutation energy cost and L2 drift.
CriterionResult c10() {
    double eta = 0.1, eps = 0.1;
    Mesh coarse = annulus_mesh(0.05);
    Mesh m = annulus_mesh(0.05, {bump_patch(coarse, 0, eta, 0.0)});
    bool pass = true;
    std::ostringstream det;
    std::vector<ComplexField> starters;
    starters.emplace_back(m, cplx(1.0, 0.0));
    starters.push_back(winding_field(m, 1));
    starters.push_back(winding_field(m, 2));
    // the continuum budget is pi + eta; allow a pinned 0.02 quadrature
    // overshoot of the P1 energy (measured 0.005 at this resolution)
    double budget = kPi + eta + 0.02;
    for (std::size_t i = 0; i < starters.size(); ++i) {
        BumpResult br = bump_degree(starters[i], 0, +1, eta, eps, 0.0);
        pass = pass && br.extra_energy <= budget;
        det << fmt("E%zu=%.3f ", i, br.extra_energy);
    }
    det << fmt("(tol %.3f)  ", budget);
    double prev = 1e300;
    for (double e : {0.2, 0.1, 0.05}) {
        Mesh md = annulus_mesh(0.05, {bump_patch(coarse, 0, e, 0.0)});
        BumpResult br = bump_degree(winding_field(md, 1), 0, +1, e, eps, 0.0);
        pass = pass && br.l2_drift < prev;
        prev = br.l2_drift;
    }
    det << "drift monotone  ";
    // two-hole mutation
    DomainSpec s;
    s.outer = {{0, 0}, 1.0};
    s.holes = {{{-0.45, 0.0}, 0.18}, {{0.45, 0.0}, 0.18}};
    s.target_edge_length = 0.05;
    Mesh c2h = build_mesh(s);
    double eta2 = 0.4;
    for (int loop : {1, 2}) {
        double rp = (eta2 / 2) * std::sqrt(2.0 / kPi);
        DiskBump mb = build_M_eta_delta(0.25 * eta2 / 2, 0.9);
        PocketSpec pk = pocket_for(c2h, loop, eta2 / 2, 0.1 * loop);
        s.refine.push_back({pk.center, std::max(2.0 * mb.t * rp / kPi / 25.0, 5e-5)});
    }
    Mesh m2h = build_mesh(s);
    ComplexField one(m2h, cplx(1.0, 0.0));
    BumpResult r2 = mutate_degrees(one, {0, +1, -1}, eta2, eps);
    pass = pass && r2.extra_energy <= 2 * kPi + eta2;
    det << fmt("two-hole cost %.3f (tol %.3f)", r2.extra_energy, 2 * kPi + eta2);
    return {0, "", pass, det.str()};
}

Mesh experiment_mesh() {
    Mesh coarse = annulus_mesh(0.05);
    return annulus_mesh(0.05, {bump_patch(coarse, 0, 0.3, 0.0)});
}

// 11. Local minimum energy levels: aligned class at I0, one-defect class at
// I0 + pi, gap shrinking over the eps ladder.
CriterionResult c11() {
    Mesh m = experiment_mesh();
    FlowOptions o;
    o.max_steps = 3000;
    o.tol = 1e-4;
    o.checkpoint_every = 2;
    bool pass = true;
    std::ostringstream det;
    {
        FlowOptions oa = o;
        oa.max_steps = 400;
        oa.tol = 1e-3;
        LocalMinReport r = local_min_experiment({1}, 1, {1}, 0.05, m, oa);
        pass = pass && r.ratio >= 0.98 && r.ratio <= 1.02 && r.member && !r.class_escape;
        det << fmt("(1,1) ratio=%.4f  ", r.ratio);
    }
    std::vector<double> gaps;
    for (double eps : {0.1, 0.05, 0.025}) {
        LocalMinReport r = local_min_experiment({1}, 0, {1}, eps, m, o);
        double gap = std::fabs(r.converged_energy - r.target_energy);
        pass = pass && r.member && gap <= 0.05 * r.target_energy;
        if (eps == 0.05) pass = pass && r.ratio >= 0.95 && r.ratio <= 1.05;
        gaps.push_back(gap);
        det << fmt("(1,0) eps=%.3g gap=%.3f  ", eps, gap);
    }
    pass = pass && gaps.back() < gaps.front();
    det << "(each rung <= 5%, endpoint gap < first)";
    return {0, "", pass, det.str()};
}

// 12. Multiplicity: the bulk-degree ladder lands in separated abdeg classes.
CriterionResult c12() {
    DomainSpec s;
    s.outer = {{0, 0}, 1.0};
    s.holes = {{{0, 0}, 0.3}};
    s.target_edge_length = 0.05;
    Mesh coarse = build_mesh(s);
    s.refine.push_back(bump_patch(coarse, 0, 0.15, 0.0));
    s.refine.push_back(bump_patch(coarse, 1, 0.15, 0.1, 15.0));
    Mesh m = build_mesh(s);
    FlowOptions o;
    o.max_steps = 1500;
    o.tol = 1e-3;
    o.checkpoint_every = 2;
    std::vector<double> ab;
    bool pass = true;
    for (int dk : {1, 2}) {
        LocalMinReport r = local_min_experiment({1}, 1, {dk}, 0.05, m, o);
        pass = pass && r.member && std::fabs(r.spec.abdeg[0] - dk) <= 1.0 / 3.0;
        ab.push_back(r.spec.abdeg[0]);
    }
    double sep = std::fabs(ab[1] - ab[0]);
    pass = pass && sep >= 0.5;
    return {0, "", pass, fmt("abdeg %.3f vs %.3f, separation %.2f (tol 0.5)", ab[0], ab[1], sep)};
}

} // namespace

std::vector<CriterionResult> run_acceptance() {
    struct Entry {
        int id;
        const char* name;
        Criterion body;
    };
    const Entry entries[] = {
        {1, "annulus I0 via Richardson extrapolation", c1},
        {2, "abdeg of winding maps with refinement decay", c2},
        {3, "energy splitting identity on random fields", c3},
        {4, "disk bump construction and t^2 energy law", c4},
        {5, "bump trace Fourier coefficients and decay", c5},
        {6, "profile closed forms vs quadrature", c6},
        {7, "power series and estimate oracle battery", c7},
        {8, "S(delta,t) remainder and amplitude bound", c8},
        {9, "chart functional margin below pi", c9},
        {10, "degree mutation energy cost and drift", c10},
        {11, "local minimum energy levels", c11},
        {12, "multiplicity of separated degree classes", c12},
    };
    std::vector<CriterionResult> out;
    for (const Entry& e : entries) out.push_back(guarded(e.id, e.name, e.body));
    return out;
}

std::string acceptance_to_text(const std::vector<CriterionResult>& results) {
    std::ostringstream os;
    for (const CriterionResult& r : results)
        os << fmt("criterion %2d [%s] %-45s %s\n", r.id, r.pass ? "PASS" : "FAIL", r.name.c_str(),
                  r.detail.c_str());
    return os.str();
}

} // namespace gldeg
