#pragma once

#include <complex>

namespace nlevel {

// log Gamma(z) for Re z > 0, continuous branch (principal near the real axis).
std::complex<double> log_gamma(std::complex<double> z);
// Gamma'/Gamma(z) for Re z > 0.
std::complex<double> digamma(std::complex<double> z);

}  // namespace nlevel
