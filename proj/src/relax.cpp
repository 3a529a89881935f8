#include "gldeg/relax.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gldeg/elliptic.hpp"
#include "gldeg/errors.hpp"
#include "gldeg/mutation.hpp"
#include "gldeg/sparse.hpp"

namespace gldeg {

namespace {

constexpr double kPi = std::numbers::pi;

// algebraic least-squares circle through a boundary loop, robust to uneven
// vertex spacing from refine patches
Vec2 loop_center(const Mesh& mesh, int loop) {
    const auto& vs = mesh.boundary_loops.at(loop);
    double S[3][4] = {};
    for (int v : vs) {
        Vec2 p = mesh.vertices[v];
        double row[3] = {2 * p.x, 2 * p.y, 1.0};
        double rhs = p.x * p.x + p.y * p.y;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) S[i][j] += row[i] * row[j];
            S[i][3] += row[i] * rhs;
        }
    }
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::fabs(S[r][c]) > std::fabs(S[piv][c])) piv = r;
        if (std::fabs(S[piv][c]) < 1e-14) throw GeometryError("degenerate boundary loop");
        std::swap(S[c], S[piv]);
        for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            double f = S[r][c] / S[c][c];
            for (int j = c; j < 4; ++j) S[r][j] -= f * S[c][j];
        }
    }
    return {S[0][3] / S[0][0], S[1][3] / S[1][1]};
}

// H1 preconditioner K + (1/eps^2) M_lumped over all vertices
CsrMatrix build_preconditioner(const Mesh& mesh, double eps) {
    DofMap map(mesh);
    map.build();
    CsrMatrix B = assemble_laplace(mesh, map).A;
    for (int v = 0; v < B.n; ++v) {
        for (int k = B.row_ptr[v]; k < B.row_ptr[v + 1]; ++k) {
            if (B.col[k] == v) {
                B.val[k] += mesh.lumped_mass[v] / (eps * eps);
                break;
            }
        }
    }
    return B;
}

DegreeSpec degree_snapshot(const ComplexField& u, const std::vector<ScalarField>& V) {
    const Mesh& mesh = *u.mesh;
    DegreeSpec s;
    s.q = degree(u, 0).rounded;
    for (int l = 1; l < mesh.loop_count(); ++l) s.p.push_back(degree(u, l).rounded);
    s.abdeg = abdeg(u, V);
    for (double a : s.abdeg) s.d.push_back(static_cast<int>(std::lround(a)));
    return s;
}

} // namespace

FlowState gradient_flow(const ComplexField& u0, double eps, FlowOptions opts) {
    const Mesh& mesh = *u0.mesh;
    if (eps <= 0) throw ParameterError("eps must be positive");
    if (opts.max_steps < 0 || opts.tol <= 0 || opts.checkpoint_every < 1)
        throw ParameterError("bad flow options");
    for (int l = 0; l < mesh.loop_count(); ++l)
        for (int v : mesh.boundary_loops[l])
            if (std::fabs(std::abs(u0.values[v]) - 1.0) > 1e-4)
                throw PreconditionError("starter is not unimodular on the boundary");

    FlowState st;
    st.u = u0;
    st.eps = eps;
    // project the starter trace exactly onto the circle
    for (int l = 0; l < mesh.loop_count(); ++l)
        for (int v : mesh.boundary_loops[l]) st.u.values[v] /= std::abs(st.u.values[v]);

    std::vector<ScalarField> V = solve_all_V(mesh);
    CsrMatrix B = build_preconditioner(mesh, eps);

    double E = energy_GL(st.u, eps).total;
    st.energy_history.push_back(E);

    auto edge_min_modulus = [&mesh](const ComplexField& f) {
        double m = 1.0;
        for (const auto& loop : mesh.boundary_loops)
            for (std::size_t i = 0; i < loop.size(); ++i) {
                cplx mid = 0.5 * (f.values[loop[i]] + f.values[loop[(i + 1) % loop.size()]]);
                m = std::min(m, std::abs(mid));
            }
        return m;
    };

    ComplexField prev_ckpt = st.u;
    double prev_E = E;
    int prev_step = 0;
    double min_trial_mod = 1.0;
    double min_edge_mod = 1.0;
    // returns false when a degree jump ended the run
    auto checkpoint = [&](int step) {
        FlowCheckpoint c;
        c.step = step;
        c.energy = E;
        c.l2_increment = l2_distance(st.u, prev_ckpt);
        c.min_trial_boundary_modulus = min_trial_mod;
        c.min_edge_modulus = min_edge_mod;
        c.spec = degree_snapshot(st.u, V);
        st.checkpoints.push_back(c);
        const DegreeSpec& first = st.checkpoints.front().spec;
        bool jumped = c.spec.q != first.q || c.spec.p != first.p;
        // an edge modulus below 0.2 means a winding is crossing the boundary
        // between two renormalized vertices: the class exit is underway and
        // the energy is about to fall off its in-class level
        bool crossing = c.min_edge_modulus < 0.2;
        if (opts.stop_on_degree_jump && step > 0 && (jumped || crossing)) {
            // restore the last in-class state; the jump checkpoint stays in
            // the log as the record of the crossing
            st.u = prev_ckpt;
            E = prev_E;
            st.energy_history.resize(prev_step + 1);
            st.steps = prev_step;
            st.degree_jumped = jumped;
            st.crossing_detected = true;
            return false;
        }
        prev_ckpt = st.u;
        prev_E = E;
        prev_step = step;
        min_trial_mod = 1.0;
        min_edge_mod = 1.0;
        return true;
    };
    checkpoint(0);

    st.residual = residual_GL(st.u, eps);
    if (st.residual.interior <= opts.tol) {
        st.converged = true;
        return st;
    }

    std::vector<double> rg(mesh.vertex_count()), ig(mesh.vertex_count());
    std::vector<double> rd, id;
    for (int step = 1; step <= opts.max_steps; ++step) {
        std::vector<cplx> g = energy_gradient(st.u, eps);
        // keep only the tangential component on the constrained boundary so
        // the renormalization is second order in the step
        for (int l = 0; l < mesh.loop_count(); ++l)
            for (int v : mesh.boundary_loops[l]) {
                cplx n = st.u.values[v];
                g[v] -= (g[v].real() * n.real() + g[v].imag() * n.imag()) * n;
            }
        for (int v = 0; v < mesh.vertex_count(); ++v) {
            rg[v] = -g[v].real();
            ig[v] = -g[v].imag();
        }
        solve_cg(B, rg, rd, 1e-10);
        solve_cg(B, ig, id, 1e-10);
        double gd = 0.0;
        for (int v = 0; v < mesh.vertex_count(); ++v)
            gd += g[v].real() * rd[v] + g[v].imag() * id[v];
        if (gd >= 0) {
            st.stagnated = true;
            break;
        }

        // cap the largest pointwise move so topology changes are resolved in
        // time (a winding crossing the boundary must show up as an edge
        // modulus dip over several steps, not tunnel in one)
        double dmax = 0.0;
        for (int v = 0; v < mesh.vertex_count(); ++v)
            dmax = std::max(dmax, std::abs(cplx(rd[v], id[v])));
        double s = std::min(1.0, 0.3 / std::max(dmax, 1e-300));
        bool accepted = false;
        ComplexField trial(mesh);
        while (s >= 1e-12) {
            double trial_min = 1.0;
            bool ok = true;
            for (int v = 0; v < mesh.vertex_count(); ++v)
                trial.values[v] = st.u.values[v] + s * cplx(rd[v], id[v]);
            for (int l = 0; l < mesh.loop_count() && ok; ++l) {
                for (int v : mesh.boundary_loops[l]) {
                    double m = std::abs(trial.values[v]);
                    trial_min = std::min(trial_min, m);
                    if (m < 1e-12) {
                        ok = false;
                        break;
                    }
                    trial.values[v] /= m;
                }
            }
            if (ok) {
                double Et = energy_GL(trial, eps).total;
                if (Et <= E + 1e-4 * s * gd) {
                    st.u.values.swap(trial.values);
                    E = Et;
                    min_trial_mod = std::min(min_trial_mod, trial_min);
                    min_edge_mod = std::min(min_edge_mod, edge_min_modulus(st.u));
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if (!accepted) {
            st.stagnated = true;
            break;
        }
        st.steps = step;
        st.energy_history.push_back(E);

        if (step % opts.checkpoint_every == 0 || step == opts.max_steps) {
            if (!checkpoint(step)) break;
            st.residual = residual_GL(st.u, eps);
            if (st.residual.interior <= opts.tol) {
                st.converged = true;
                break;
            }
        }
    }
    if (!st.crossing_detected && st.checkpoints.back().step != st.steps) checkpoint(st.steps);
    st.residual = residual_GL(st.u, eps);
    if (st.residual.interior <= opts.tol) st.converged = true;
    return st;
}

std::pair<bool, DegreeSpec> class_membership(const ComplexField& u, const std::vector<int>& p,
                                             int q, const std::vector<int>& d) {
    const Mesh& mesh = *u.mesh;
    const int holes = mesh.loop_count() - 1;
    if (static_cast<int>(p.size()) != holes || static_cast<int>(d.size()) != holes)
        throw ParameterError("one boundary and one bulk degree per hole required");
    DegreeSpec s = degree_snapshot(u, solve_all_V(mesh));
    s.d = d;
    bool member = s.q == q;
    for (int i = 0; i < holes; ++i) {
        member = member && s.p[i] == p[i];
        member = member && std::fabs(s.abdeg[i] - d[i]) <= 1.0 / 3.0;
    }
    return {member, s};
}

LocalMinReport local_min_experiment(const std::vector<int>& p, int q, const std::vector<int>& d,
                                    double eps, const Mesh& mesh, FlowOptions opts) {
    const int holes = mesh.loop_count() - 1;
    if (static_cast<int>(p.size()) != holes || static_cast<int>(d.size()) != holes)
        throw ParameterError("one boundary and one bulk degree per hole required");
    int d_total = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (p[i] > d[i]) throw PreconditionError("good configuration requires p_i <= d_i");
        d_total += d[i];
    }
    if (q > d_total) throw PreconditionError("good configuration requires q <= sum of d");

    // winding base: product of unit phases around the hole centers, bulk
    // degree d_i around hole i and sum(d) on the outer loop
    std::vector<Vec2> centers;
    for (int l = 1; l < mesh.loop_count(); ++l) centers.push_back(loop_center(mesh, l));
    ComplexField base(mesh, cplx(1.0, 0.0));
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        double phase = 0.0;
        for (std::size_t i = 0; i < centers.size(); ++i)
            phase += d[i] * std::atan2(mesh.vertices[v].y - centers[i].y,
                                       mesh.vertices[v].x - centers[i].x);
        base.values[v] = std::polar(1.0, phase);
    }

    std::vector<int> dvec(mesh.loop_count(), 0);
    dvec[0] = q - d_total;
    for (int i = 0; i < holes; ++i) dvec[i + 1] = p[i] - d[i];
    bool needs_mutation = std::any_of(dvec.begin(), dvec.end(), [](int x) { return x != 0; });

    LocalMinReport rep;
    ComplexField starter = base;
    if (needs_mutation) starter = mutate_degrees(base, dvec, 0.3, eps).u;
    rep.starter_energy = energy_GL(starter, eps).total;

    opts.stop_on_degree_jump = true;  // the experiment is class-constrained
    rep.flow = gradient_flow(starter, eps, opts);
    rep.I0_value = I0(mesh, d);
    rep.ae = ae_distance(d, d_total, p, q);
    rep.target_energy = rep.I0_value + kPi * rep.ae;
    rep.converged_energy = rep.flow.energy_history.back();
    rep.ratio = rep.converged_energy / rep.target_energy;
    auto [member, spec] = class_membership(rep.flow.u, p, q, d);
    rep.member = member;
    rep.spec = spec;
    for (const FlowCheckpoint& c : rep.flow.checkpoints)
        for (int i = 0; i < holes; ++i)
            if (std::fabs(c.spec.abdeg[i] - d[i]) > 1.0 / 3.0) rep.class_escape = true;
    rep.vortices = vortex_detect(rep.flow.u);
    return rep;
}

} // namespace gldeg
