#pragma once

#include <vector>

#include "gldeg/energy.hpp"
#include "gldeg/fields.hpp"

namespace gldeg {

// Serial single-loop implementations of the hot kernels, kept as oracles for
// the parallel versions and as the baseline for the kernel benchmark. Same
// quadrature, plain left-to-right summation.
EnergyReport energy_GL_serial(const ComplexField& u, double eps);
std::vector<double> abdeg_serial(const ComplexField& u, const std::vector<ScalarField>& V);
double l2_distance_serial(const ComplexField& u, const ComplexField& v);

} // namespace gldeg
