#pragma once

#include <functional>
#include <vector>

namespace nlevel {

// Even piecewise polynomial on the real line, stored on u >= 0 and
// evaluated at |u|. Piece k lives on [breaks[k], breaks[k+1]] with
// Chebyshev coefficients in the local variable t in [-1,1].
// The function is zero for |u| > breaks.back().
class EvenPiecewise {
public:
    EvenPiecewise() = default;
    EvenPiecewise(std::vector<double> breaks, std::vector<std::vector<double>> cheb);

    // Chebyshev interpolation of f on each piece with deg+1 nodes.
    static EvenPiecewise interpolate(std::vector<double> breaks, int deg,
                                     const std::function<double(double)>& f);
    static EvenPiecewise constant(double support, double value);

    double operator()(double u) const;
    double support() const { return breaks_.empty() ? 0.0 : breaks_.back(); }
    int degree() const;
    bool is_zero() const;
    const std::vector<double>& breaks() const { return breaks_; }
    const std::vector<std::vector<double>>& coefficients() const { return cheb_; }
    // Breakpoints on the whole line, -b_m .. b_m.
    std::vector<double> full_breaks() const;

    EvenPiecewise scaled(double c) const;
    double integral() const;  // over the real line, exact
    // Largest sum of |Chebyshev coefficients| over pieces relative to the
    // largest value at the nodes: a rough conditioning figure.
    double condition() const;

private:
    std::vector<double> breaks_;
    std::vector<std::vector<double>> cheb_;
};

// (a*b)(u) = int a(v) b(u-v) dv, exact up to round-off; support adds.
EvenPiecewise convolve(const EvenPiecewise& a, const EvenPiecewise& b);

// int_lo^hi of a product of even piecewise polynomials, each evaluated at
// sign[i]*u (signs only matter through evenness, kept for readability),
// times a polynomial weight given by its degree and evaluator.
double integrate_product(const std::vector<const EvenPiecewise*>& fs, double lo, double hi,
                         int weight_degree = 0,
                         const std::function<double(double)>& weight = nullptr);

}  // namespace nlevel
