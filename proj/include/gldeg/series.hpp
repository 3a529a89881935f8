#pragma once

#include <string>
#include <vector>

#include "gldeg/profiles.hpp"

namespace gldeg {

struct SeriesCheck {
    std::string tag;
    std::string params;
    double partial = 0.0; // partial sum / measured value
    double closed = 0.0;  // closed form / comparison value
    double bound = 0.0;   // truncation or stability bound
    bool pass = false;    // |partial - closed| <= bound + 1e-10
};

// K-term partial sum of one of the six power-series identities against its
// closed form. Tags: "A1" sum X^k/k = -ln(1-X); "A2" sum X^k = 1/(1-X);
// "A3" sum kX^k; "A4" sum sin(k delta) X^k; "A5" sum sin(k delta) X^k / k;
// "A6" the double sum sum sin(n delta) l/(n+2l) X^{n+2l}, whose closed form
// carries an additive constant that is eliminated by differencing the values
// at X and X/2.
SeriesCheck check_power_identity(const std::string& tag, double X, double delta, int K);

// S(delta, t) = sum_{k>l>0} c_k c_l sin((k-l)delta)/(k-l) * kl/(k+l) with
// c_k = (t-2)(1-t)^k. Direct double sum up to K; requires (1-t)^K < 1e-12.
double S_direct(double delta, double t, int K);

// The arctan closed form of S without its O(1) remainder.
double S_closed(double delta, double t);

// Asymptotic profile estimates at one (k, l) point, each reported as the
// scaled deviation at (k, l) in `partial` and at (2k, 2l) in `closed`; pass
// means the doubled-grid value stays within 50% growth (constant stability).
std::vector<SeriesCheck> check_fk_estimates(int k, int l, double lambda, double delta);

// Full default battery: all identities at X in {0.3, 0.9}, delta in
// {0.3, 0.7}, plus the estimate ladder. Produces well over 20 rows.
std::vector<SeriesCheck> default_series_suite();

std::string series_checks_to_csv(const std::vector<SeriesCheck>& checks);

} // namespace gldeg
