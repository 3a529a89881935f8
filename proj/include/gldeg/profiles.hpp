#pragma once

#include <vector>

namespace gldeg {

// One-dimensional mode profiles on [1-delta, 1]:
//   f_k(h) = [e^{a(h-1)} - e^{-a(h-1+2 delta)}] / (1 - e^{-2 a delta}),
//   a = alpha_k = sqrt(k^2 + lambda - 1),
// normalized so f_k(1-delta) = 0 and f_k(1) = 1.
struct ProfileSet {
    double lambda = 1.0;
    double delta = 0.5;

    double alpha(int k) const;
    double f(int k, double h) const;
    double fp(int k, double h) const;

    // closed forms of the 1D quadratic functionals
    double phi_closed(int k) const;      // int f'^2 + alpha^2 f^2
    double int_f(int k) const;           // int f
    double int_ff(int k, int l) const;   // int f_k f_l, |k| != |l|
    double int_fpfp(int k, int l) const; // int f_k' f_l', |k| != |l|

    // cross-mode combinations entering the amplitude bound
    double X(int k, int l) const;
    double Y(int k, int l) const;
};

ProfileSet make_profiles(double lambda, double delta);

} // namespace gldeg
