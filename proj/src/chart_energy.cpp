#include "gldeg/chart_energy.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "gldeg/errors.hpp"
#include "gldeg/fft.hpp"

namespace gldeg {

namespace {
constexpr double kPi = std::numbers::pi;
}

void fft(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw ParameterError("fft size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = 2 * kPi / double(len) * (inverse ? 1.0 : -1.0);
        cplx wl = std::polar(1.0, ang);
        for (std::size_t i = 0; i < n; i += len) {
            cplx w = 1.0;
            for (std::size_t j = 0; j < len / 2; ++j) {
                cplx u = a[i + j], v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        // Newton from the Chebyshev-like initial guess
        double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::fabs(dt) < 1e-15) break;
        }
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (t * p1 - p0) / (t * t - 1.0);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    cache[n] = {x, w};
    return {x, w};
}

SplitCheck energy_split_check(const RadialProfile& f, int d, double eps, double ra, double rb,
                              const PolarFn& w, int nr, int nphi) {
    auto [gx, gw] = gauss_legendre(nr);
    SplitCheck out;
    double lhs = 0.0, e_u = 0.0, l_w = 0.0;
    for (int i = 0; i < nr; ++i) {
        double r = 0.5 * (ra + rb) + 0.5 * (rb - ra) * gx[i];
        double wr = 0.5 * (rb - ra) * gw[i];
        double fr = f.eval(r), fpr = f.deriv(r);
        for (int j = 0; j < nphi; ++j) {
            double phi = 2 * kPi * j / nphi;
            double wj = 2 * kPi / nphi * wr * r; // polar area element
            cplx wv = w.value(r, phi);
            cplx wdr = w.d_r(r, phi);
            cplx wdp = w.d_phi(r, phi);

            // E_eps(rho w) with rho w = f(r) w
            double grad2 = std::norm(fpr * wv + fr * wdr) + std::norm(fr * wdp / r);
            double s = 1.0 - fr * fr * std::norm(wv);
            lhs += wj * (0.5 * grad2 + s * s / (4 * eps * eps));

            // E_eps(u) for u = f e^{i d phi}
            double gu2 = fpr * fpr + d * d * fr * fr / (r * r);
            double su = 1.0 - fr * fr;
            e_u += wj * (0.5 * gu2 + su * su / (4 * eps * eps));

            // L_eps(w): grad theta = d/r, rho = f
            double gw2 = std::norm(wdr) + std::norm(wdp / r);
            double sw = 1.0 - std::norm(wv);
            l_w += wj * (0.5 * fr * fr * gw2 - 0.5 * std::norm(wv) * fr * fr * d * d / (r * r) +
                         fr * fr * fr * fr * sw * sw / (4 * eps * eps));
        }
    }
    out.lhs = lhs;
    out.e_u = e_u;
    out.l_w = l_w;
    out.rhs = e_u + l_w;
    return out;
}

namespace {

double m_lambda_integrand(cplx wv, cplx wt, cplx wh, double theta, double lambda) {
    cplx e = std::polar(1.0, theta);
    return 0.5 * (std::norm(wh) + std::norm(wt) - std::norm(wv) + lambda * std::norm(e - wv));
}

double m_lambda_quad(const ChartField& w, double delta, double lambda, int n_theta, int n_h,
                     bool clamped) {
    auto [gx, gw] = gauss_legendre(n_h);
    auto [tx, tw] = gauss_legendre(n_theta);
    const double panels[5] = {-2 * delta, -delta, 0.0, delta, 2 * delta};
    const double fd = 1e-6;
    auto eval = [&](double th, double h, cplx& wv, cplx& wt, cplx& wh) {
        if (!clamped) {
            wv = w.value(th, h);
            wt = w.d_theta(th, h);
            wh = w.d_h(th, h);
            return;
        }
        auto cl = [&](double a, double b) {
            cplx v = w.value(a, b);
            double m = std::abs(v);
            return m > 2.0 ? v * (2.0 / m) : v;
        };
        wv = cl(th, h);
        wt = (cl(th + fd, h) - cl(th - fd, h)) / (2 * fd);
        double hp = std::min(h + fd, 1.0), hm = std::max(h - fd, 1.0 - delta);
        wh = (cl(th, hp) - cl(th, hm)) / (hp - hm);
    };
    double total = 0.0;
    for (int p = 0; p < 4; ++p) {
        double t0 = panels[p], t1 = panels[p + 1];
        for (int i = 0; i < n_theta; ++i) {
            double th = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * tx[i];
            double wth = 0.5 * (t1 - t0) * tw[i];
            for (int j = 0; j < n_h; ++j) {
                double h = 1.0 - 0.5 * delta + 0.5 * delta * gx[j];
                double whj = 0.5 * delta * gw[j];
                cplx wv, wt, wh;
                eval(th, h, wv, wt, wh);
                total += wth * whj * m_lambda_integrand(wv, wt, wh, th, lambda);
            }
        }
    }
    return total;
}

} // namespace

double M_lambda_chart(const ChartField& w, double delta, double lambda, int n_theta, int n_h) {
    return m_lambda_quad(w, delta, lambda, n_theta, n_h, false);
}

double M_lambda_chart_clamped(const ChartField& w, double delta, double lambda, int n_theta,
                              int n_h) {
    return m_lambda_quad(w, delta, lambda, n_theta, n_h, true);
}

} // namespace gldeg
