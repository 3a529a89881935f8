#pragma once

#include <vector>

#include "gldeg/chart_energy.hpp"
#include "gldeg/fields.hpp"
#include "gldeg/mesh.hpp"
#include "gldeg/profiles.hpp"
#include "gldeg/vec2.hpp"

namespace gldeg {

struct TestFnParams {
    double t = 0.05;   // amplitude, 0 < t < delta
    double delta = 0.5; // chart half-width
    double eta = 0.1;   // energy slack
    int K = 512;        // Fourier truncation
};

// smooth even 2pi-periodic bump: 1 on (-delta/2, delta/2), 0 outside
// (-delta, delta), quintic smoothstep in between
double bump_phi(double theta, double delta);

// boundary traces on the unit circle
cplx mobius_Psi(double theta, double t, double delta); // bump profile
cplx mobius_F(double theta, double t);                 // plateau everywhere

struct FourierData {
    int K = 0;
    double t = 0.0;
    std::vector<double> b; // index k + K, k in [-K, K]
    std::vector<double> c;

    double b_at(int k) const { return (k < -K || k > K) ? 0.0 : b[k + K]; }
    double c_at(int k) const { return (k < -K || k > K) ? 0.0 : c[k + K]; }
};

// Extract the real coefficients b_k of the trace expansion
//   Psi_t = (1 - t b_{-1}) + t sum_{k != -1} b_k e^{-(k+1) i theta}
// from a dense DFT; checks imaginary residue <= 1e-8 and spectral tail.
// force_phi_one replaces the bump by the plateau (test hook, b == c).
FourierData fourier_b(const TestFnParams& params, bool force_phi_one = false);

// The chart test function of the three-piece construction:
//   psi(theta, h) on (-2 delta, 2 delta) x (1-delta, 1].
struct TestFn : ChartField {
    TestFnParams params;
    FourierData fourier;
    ProfileSet profiles;

    cplx psi(double theta, double h) const;
    cplx dpsi_dtheta(double theta, double h) const;
    cplx dpsi_dh(double theta, double h) const;

    // ChartField view of w = psi e^{i theta}
    cplx value(double theta, double h) const override;
    cplx d_theta(double theta, double h) const override;
    cplx d_h(double theta, double h) const override;
};

TestFn assemble_psi(const TestFnParams& params, const FourierData& fd, const ProfileSet& ps);

// pointwise modulus clamp to 2
ComplexField clamp(const ComplexField& w);

// Spectral evaluation of the chart functionals for w = psi_t e^{i theta}.
struct ChartEnergies {
    double M_inner = 0.0;  // M_lambda over the |theta| < delta strip, closed form
    double M_sides = 0.0;  // M_lambda over the two blend strips, graded quadrature
    double M_raw = 0.0;
    double M_clamped = 0.0;
    double L_eps = 0.0;    // splitting remainder for the winding-d annulus state
    double max_psi = 0.0;  // max modulus of psi over a dense grid
};

ChartEnergies chart_energies(const TestFn& w, int d, double eps);

// Degree of the h = 1 trace of psi from dense sampling.
int testfn_trace_degree(const TestFn& w);

struct TestFnReport {
    double t = 0.0;
    double lambda = 0.0;
    double M_raw = 0.0;
    double M_clamped = 0.0;
    double L_eps = 0.0;
    double bound = 0.0; // delta - 2 delta t + 4 t^2 S(delta, t)
    double pi_margin = 0.0;
    int deg_outer = 0;
    bool chain_ok = false;
};

// Full check on the analytic annulus chart for the winding-d state.
TestFnReport verify_testfn(int d, double r_inner, const TestFnParams& params, double eps);

// Degree-one unit-disk field with prescribed Dirichlet-energy slack:
// harmonic extension of the Psi_t trace (conjugated, so the degree is +1),
// with t found by bisection on the spectral energy pi t^2 sum b_k^2 |k+1|.
struct DiskBump {
    double t = 0.0;
    double delta = 0.5;
    double energy = 0.0; // Dirichlet energy of the harmonic extension
    FourierData fourier;

    cplx value(cplx z) const;  // z in the closed unit disk
    cplx conj_value(cplx z) const { return std::conj(value(z)); }
};

DiskBump build_M_eta_delta(double eta, double delta);

// spectral Dirichlet energy of the harmonic extension at amplitude t
double disk_bump_energy(double t, double delta, int K = 512);

ComplexField sample_disk_bump(const DiskBump& m, const Mesh& disk_mesh);

// Multiply u by a pocket insertion that shifts the degree of one boundary
// loop by +-1 at measured energy cost <= pi + eta.
struct BumpResult {
    ComplexField u;
    double extra_energy = 0.0; // E_eps(result) - E_eps(input)
    double l2_drift = 0.0;
    double pocket_radius = 0.0;
    Vec2 pocket_center{0, 0};
};

BumpResult bump_degree(const ComplexField& u, int loop, int sign, double eta, double eps,
                       double angle = 0.0);

// position of the bump pocket used for a loop at a given boundary angle,
// exposed so callers can pre-refine the mesh there
struct PocketSpec {
    Vec2 center{0, 0};
    double radius = 0.0;
};
PocketSpec pocket_for(const Mesh& mesh, int loop, double eta, double angle = 0.0);

// Sequential composition of bumps, one loop entry per delta, slack eta
// split across the |delta|_1 steps. dvec has one entry per boundary loop
// (index 0 = outer).
BumpResult mutate_degrees(const ComplexField& u, const std::vector<int>& dvec, double eta,
                          double eps);

} // namespace gldeg
