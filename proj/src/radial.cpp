#include "gldeg/radial.hpp"

#include <cmath>
#include <cstddef>

#include "gldeg/errors.hpp"

namespace gldeg {

namespace {

// Thomas algorithm, overwrites inputs
void solve_tridiag(std::vector<double>& lo, std::vector<double>& di, std::vector<double>& up,
                   std::vector<double>& rhs) {
    const std::size_t n = di.size();
    for (std::size_t i = 1; i < n; ++i) {
        double m = lo[i] / di[i - 1];
        di[i] -= m * up[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= di[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - up[i] * rhs[i + 1]) / di[i];
}

} // namespace

RadialProfile solve_radial_profile(double a, double b, double fa, double fb, int d, double eps,
                                   int n) {
    if (!(b > a) || a < 0 || eps <= 0 || n < 16) throw ParameterError("bad radial profile parameters");
    const double h = (b - a) / n;
    std::vector<double> f(n + 1);
    for (int i = 0; i <= n; ++i) f[i] = fa + (fb - fa) * i / double(n);

    auto residual_at = [&](int i, const std::vector<double>& g) {
        double r = a + i * h;
        double fpp = (g[i + 1] - 2 * g[i] + g[i - 1]) / (h * h);
        double fp = (g[i + 1] - g[i - 1]) / (2 * h);
        return fpp + fp / r - d * d * g[i] / (r * r) + g[i] * (1 - g[i] * g[i]) / (eps * eps);
    };

    const int interior = n - 1;
    std::vector<double> lo(interior), di(interior), up(interior), rhs(interior);
    // the second difference loses ~eps_mach/h^2 to cancellation, so stop on
    // stagnation near that floor rather than on an absolute tolerance alone
    const double tight = 1e-12 / (eps * eps);
    const double loose = 1e-6 / (eps * eps);
    double last_norm = 1e300;
    for (int iter = 0; iter < 200; ++iter) {
        double norm = 0.0;
        for (int i = 1; i < n; ++i) {
            double r = a + i * h;
            double res = residual_at(i, f);
            rhs[i - 1] = -res;
            lo[i - 1] = 1.0 / (h * h) - 1.0 / (2 * h * r);
            up[i - 1] = 1.0 / (h * h) + 1.0 / (2 * h * r);
            di[i - 1] = -2.0 / (h * h) - d * d / (r * r) + (1 - 3 * f[i] * f[i]) / (eps * eps);
            norm = std::max(norm, std::fabs(res));
        }
        if (norm < tight) break;
        if (iter > 2 && norm > 0.5 * last_norm) {
            if (norm < loose) break; // stagnated at the rounding floor
            throw NumericError("radial profile Newton iteration did not converge");
        }
        // damp if the residual grew (far-from-solution safeguard)
        double step_scale = norm > last_norm ? 0.5 : 1.0;
        last_norm = norm;
        solve_tridiag(lo, di, up, rhs);
        for (int i = 1; i < n; ++i) f[i] += step_scale * rhs[i - 1];
        if (iter == 199) throw NumericError("radial profile Newton iteration did not converge");
    }

    RadialProfile p;
    p.a = a;
    p.b = b;
    p.f = f;
    p.fp.assign(n + 1, 0.0);
    for (int i = 0; i <= n; ++i) {
        auto val = [&](int j) { return f[std::min(std::max(j, 0), n)]; };
        if (i >= 2 && i <= n - 2)
            p.fp[i] = (-val(i + 2) + 8 * val(i + 1) - 8 * val(i - 1) + val(i - 2)) / (12 * h);
        else if (i == 0)
            p.fp[i] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h);
        else if (i == n)
            p.fp[i] = (3 * f[n] - 4 * f[n - 1] + f[n - 2]) / (2 * h);
        else
            p.fp[i] = (val(i + 1) - val(i - 1)) / (2 * h);
    }
    return p;
}

namespace {

// cubic Hermite on the containing interval
void hermite(const RadialProfile& p, double r, double& value, double& slope) {
    const int n = static_cast<int>(p.f.size()) - 1;
    const double h = (p.b - p.a) / n;
    double s = (r - p.a) / h;
    int i = static_cast<int>(std::floor(s));
    if (i < 0) i = 0;
    if (i >= n) i = n - 1;
    double t = s - i;
    double f0 = p.f[i], f1 = p.f[i + 1], m0 = p.fp[i] * h, m1 = p.fp[i + 1] * h;
    double t2 = t * t, t3 = t2 * t;
    value = (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * f1 +
            (t3 - t2) * m1;
    slope = ((6 * t2 - 6 * t) * f0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * f1 +
             (3 * t2 - 2 * t) * m1) /
            h;
}

} // namespace

double RadialProfile::eval(double r) const {
    double v, s;
    hermite(*this, r, v, s);
    return v;
}

double RadialProfile::deriv(double r) const {
    double v, s;
    hermite(*this, r, v, s);
    return s;
}

double radial_residual(const RadialProfile& p, int d, double eps) {
    const int n = static_cast<int>(p.f.size()) - 1;
    const double h = (p.b - p.a) / n;
    double worst = 0.0;
    for (int i = 1; i < n; ++i) {
        double r = p.a + i * h;
        double fpp = (p.f[i + 1] - 2 * p.f[i] + p.f[i - 1]) / (h * h);
        double fp = (p.f[i + 1] - p.f[i - 1]) / (2 * h);
        double res = fpp + fp / r - d * d * p.f[i] / (r * r) + p.f[i] * (1 - p.f[i] * p.f[i]) / (eps * eps);
        worst = std::max(worst, std::fabs(res));
    }
    return worst;
}

} // namespace gldeg
