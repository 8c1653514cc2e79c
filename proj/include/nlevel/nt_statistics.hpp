#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlevel/dirichlet.hpp"
#include "nlevel/lfunction.hpp"
#include "nlevel/test_functions.hpp"

namespace nlevel {

// Smooth weight supported in [1, 2].
class WeightFunction {
public:
    // exp(-1/((x-1)(2-x))) on (1, 2)
    static WeightFunction bump();
    WeightFunction(std::string name, std::function<double(double)> w);

    double operator()(double x) const { return (x > 1.0 && x < 2.0) ? w_(x) : 0.0; }
    // int_0^inf W(x) x^{s-1} dx, tanh-sinh quadrature on [1, 2]
    double mellin(double s) const;
    const std::string& name() const { return name_; }

private:
    std::string name_;
    std::function<double(double)> w_;
};

// sqrt(pi) sum_q W(q/Q) phi*(q)/phi(q)
double d_weight_exact(const WeightFunction& W, double Q);
// sqrt(pi) W~(1) Q prod_p (1 - p^-2 - p^-3)
double d_weight_asymptotic(const WeightFunction& W, double Q);

// Moduli q with W(q/Q) > 0 and at least one primitive character.
std::vector<std::int64_t> family_moduli(const WeightFunction& W, double Q);

// Zero tables for every primitive character of the family, to a common height.
struct ZeroSource {
    double height = 0.0;
    std::map<std::string, ZeroTable> tables;
    const ZeroTable& at(const DirichletCharacter& chi, double needed) const;
};

class MissingZerosError : public std::runtime_error {
public:
    MissingZerosError(const std::string& label, double have, double need);
    std::string label;
    double have, need;
};

ZeroSource build_zero_source(const WeightFunction& W, double Q, double T, int workers, ZeroCache* cache);

// Height where every f_i(U (gamma - shift)) times the zero density falls below tol.
double required_zero_height(const C4Family& f, double Q, double shift, double tol);

struct StatisticResult {
    std::string experiment_id;
    std::string statistic;  // "L0" or "L1"
    double value = 0.0;
    double Q = 0.0;
    int n = 0;
    std::vector<std::string> family;
    int t_nodes = 0;                // Gauss-Hermite nodes used (0 for L0)
    double quadrature_error = 0.0;  // |order 40 - order 20| style estimate
    double zero_height = 0.0;
    double tail_estimate = 0.0;     // expected size of zeros above the height
    std::int64_t characters = 0;
    std::int64_t zeros_used = 0;
};
nlohmann::json to_json(const StatisticResult& r);

StatisticResult l0_statistic(const C4Family& f, const WeightFunction& W, double Q, const ZeroSource& zeros,
                             int workers = 1);
StatisticResult l1_statistic(const C4Family& f, const WeightFunction& W, double Q, const ZeroSource& zeros,
                             int order = 40, int workers = 1);

// Distinct-index sum over one zero list at shift t, by lattice sieving and brute force.
double sharp_sum(const C4Family& f, const std::vector<double>& gamma, double U, double t);
double sharp_sum_brute(const C4Family& f, const std::vector<double>& gamma, double U, double t);

// Exact finite-Q value of the large-sieve object S(P; {1..k}, {k+1..k+r}).
// transforms[0..k-1] feed a_m, transforms[k..k+r-1] feed b_n.
struct AlsOptions {
    std::size_t max_tuples = 20'000'000;  // memory guard on prime-tuple enumeration
};
double als_sum_exact(std::int64_t P, int k, int r, const std::vector<const EvenPiecewise*>& transforms,
                     const WeightFunction& W, double Q, const AlsOptions& opt = {});
// Direct loop over (q, chi, m, n) used as an oracle for small cases.
double als_sum_brute(std::int64_t P, int k, int r, const std::vector<const EvenPiecewise*>& transforms,
                     const WeightFunction& W, double Q);

// int t^j e^{-t^2} e^{i xi t} dt = sqrt(pi) (i/2)^j H_j(xi/2) e^{-xi^2/4}, j <= 12
std::complex<double> gaussian_fourier_moment(int j, double xi);

}  // namespace nlevel
