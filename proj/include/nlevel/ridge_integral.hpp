#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "nlevel/piecewise.hpp"

namespace nlevel {

// Univariate building block g(s): piecewise polynomial of known degree with
// known breakpoints.
class Univariate {
public:
    virtual ~Univariate() = default;
    virtual double operator()(double s) const = 0;
    virtual std::vector<double> breaks() const = 0;
    virtual int degree() const = 0;
};

using UnivariatePtr = std::shared_ptr<const Univariate>;

UnivariatePtr uni_piecewise(const EvenPiecewise& p);  // stores a copy
UnivariatePtr uni_step_above(double c);               // 1 for s > c
UnivariatePtr uni_step_below(double c);               // 1 for s < c
UnivariatePtr uni_affine(double c0, double c1);       // c0 + c1 s

// g(a . x + b)
struct Ridge {
    std::vector<double> a;
    double b = 0.0;
    UnivariatePtr g;
};

struct IntegralResult {
    double value = 0.0;
    double error = 0.0;  // absolute; round-off level for exact rules
    bool exact = true;   // false when estimated by quasi Monte Carlo
    std::int64_t evaluations = 0;
};

struct RidgeIntegralOptions {
    int exact_max_dim = 3;
    int qmc_log2_points = 20;  // total points over all replicas
    int qmc_replicas = 16;
    std::uint64_t qmc_seed = 20240901;
};

// Integral over the box prod [lo_i, hi_i] of prod_k g_k(a_k . x + b_k).
// Up to exact_max_dim dimensions the integrand is split along every vertex
// of the breakpoint hyperplane arrangement and integrated with Gauss-Legendre
// rules of sufficient order, which is exact for these integrands; above
// that a randomly shifted Sobol rule is used with a replica standard error.
IntegralResult integrate_ridges(const std::vector<Ridge>& ridges, const std::vector<double>& lo,
                                const std::vector<double>& hi, const RidgeIntegralOptions& opt = {});

}  // namespace nlevel
