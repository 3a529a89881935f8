#include "gldeg/profiles.hpp"

#include <cmath>

#include "gldeg/errors.hpp"

namespace gldeg {

double ProfileSet::alpha(int k) const { return std::sqrt(double(k) * k + lambda - 1.0); }

double ProfileSet::f(int k, double h) const {
    double a = alpha(k);
    return (std::exp(a * (h - 1)) - std::exp(-a * (h - 1 + 2 * delta))) /
           (1.0 - std::exp(-2 * a * delta));
}

double ProfileSet::fp(int k, double h) const {
    double a = alpha(k);
    return a * (std::exp(a * (h - 1)) + std::exp(-a * (h - 1 + 2 * delta))) /
           (1.0 - std::exp(-2 * a * delta));
}

double ProfileSet::phi_closed(int k) const {
    double a = alpha(k);
    return a * (1.0 + 2.0 / (std::expm1(2 * a * delta)));
}

double ProfileSet::int_f(int k) const {
    double a = alpha(k);
    return (1.0 - 2.0 / (std::exp(a * delta) + 1.0)) / a;
}

namespace {

// the two building blocks of the cross integrals
double plus_term(double ak, double al, double delta) {
    return -std::expm1(-2 * (ak + al) * delta) /
           ((ak + al) * (-std::expm1(-2 * ak * delta)) * (-std::expm1(-2 * al * delta)));
}

double minus_term(double ak, double al, double delta) {
    return -std::expm1(-2 * (ak - al) * delta) /
           ((ak - al) * (-std::expm1(-2 * ak * delta)) * std::expm1(2 * al * delta));
}

} // namespace

double ProfileSet::int_ff(int k, int l) const {
    double ak = alpha(k), al = alpha(l);
    return plus_term(ak, al, delta) - minus_term(ak, al, delta);
}

double ProfileSet::int_fpfp(int k, int l) const {
    double ak = alpha(k), al = alpha(l);
    return ak * al * (plus_term(ak, al, delta) + minus_term(ak, al, delta));
}

double ProfileSet::X(int k, int l) const {
    double ak = alpha(k), al = alpha(l);
    return (ak * al + double(k) * l + lambda - 1.0) * (-std::expm1(-2 * (ak + al) * delta)) /
           ((ak + al) * (-std::expm1(-2 * ak * delta)) * (-std::expm1(-2 * al * delta)));
}

double ProfileSet::Y(int k, int l) const {
    double ak = alpha(k), al = alpha(l);
    return (ak * al + double(k) * l + lambda - 1.0) * (-std::expm1(-2 * (ak - al) * delta)) /
           ((ak - al) * (-std::expm1(-2 * ak * delta)) * std::expm1(2 * al * delta));
}

ProfileSet make_profiles(double lambda, double delta) {
    if (lambda < 1.0 || delta <= 0.0 || delta >= 1.0)
        throw ParameterError("profiles need lambda >= 1 and delta in (0,1)");
    ProfileSet p;
    p.lambda = lambda;
    p.delta = delta;
    return p;
}

} // namespace gldeg
