#include "nlevel/special.hpp"

#include <boost/math/special_functions/bernoulli.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nlevel {

namespace {

constexpr double kShift = 16.0;
constexpr int kTerms = 14;

}  // namespace

std::complex<double> log_gamma(std::complex<double> z)
{
    if (!(z.real() > 0.0)) throw std::domain_error("log_gamma: requires Re z > 0");
    std::complex<double> acc = 0.0;
    while (std::abs(z) < kShift) {
        acc -= std::log(z);
        z += 1.0;
    }
    const std::complex<double> iz = 1.0 / z, iz2 = iz * iz;
    std::complex<double> series = 0.0, p = iz;
    for (int k = 1; k <= kTerms; ++k) {
        series += boost::math::bernoulli_b2n<double>(k) / (2.0 * k * (2.0 * k - 1.0)) * p;
        p *= iz2;
    }
    return acc + (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

std::complex<double> digamma(std::complex<double> z)
{
    if (!(z.real() > 0.0)) throw std::domain_error("digamma: requires Re z > 0");
    std::complex<double> acc = 0.0;
    while (std::abs(z) < kShift) {
        acc -= 1.0 / z;
        z += 1.0;
    }
    const std::complex<double> iz = 1.0 / z, iz2 = iz * iz;
    std::complex<double> series = 0.0, p = iz2;
    for (int k = 1; k <= kTerms; ++k) {
        series += boost::math::bernoulli_b2n<double>(k) / (2.0 * k) * p;
        p *= iz2;
    }
    return acc + std::log(z) - 0.5 * iz - series;
}

}  // namespace nlevel
