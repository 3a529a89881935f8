#pragma once

#include <vector>

#include "gldeg/vec2.hpp"

namespace gldeg {

// In-place iterative radix-2 FFT; size must be a power of two.
// inverse=true applies the conjugate transform without the 1/n factor.
void fft(std::vector<cplx>& a, bool inverse = false);

} // namespace gldeg
