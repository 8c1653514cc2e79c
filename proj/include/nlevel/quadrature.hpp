#pragma once

#include <vector>

namespace nlevel {

struct QuadRule {
    std::vector<double> x;
    std::vector<double> w;
};

// Gauss-Legendre on [-1,1]; cached, safe to call concurrently.
const QuadRule& gauss_legendre(int n);

// Gauss-Hermite for the weight exp(-t^2) on the real line.
const QuadRule& gauss_hermite(int n);

template <typename F>
double integrate_gl(F&& f, double a, double b, int n)
{
    const QuadRule& r = gauss_legendre(n);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(c + h * r.x[i]);
    return s * h;
}

// Composite Gauss-Legendre over consecutive breakpoints.
template <typename F>
double integrate_gl_panels(F&& f, const std::vector<double>& breaks, int n)
{
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        if (breaks[i + 1] > breaks[i]) s += integrate_gl(f, breaks[i], breaks[i + 1], n);
    return s;
}

}  // namespace nlevel
