#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "nlevel/piecewise.hpp"
#include "nlevel/ridge_integral.hpp"
#include "nlevel/test_functions.hpp"

namespace nlevel {

// ---------------------------------------------------------------- Euler products

struct EulerValue {
    std::complex<double> value;    // truncated product (times the tail estimate when extrapolated)
    std::complex<double> partial;  // plain product over p <= p_max
    double tail_bound = 0.0;       // bound on |log(value/true)| from sum_{n > p_max} n^-a
    std::int64_t p_max = 0;
};

struct ArithmeticConstant {
    double partial = 0.0;       // prod_{p <= p_max} (1 - p^-2 - p^-3)
    double extrapolated = 0.0;  // partial * exp(-est), est from the prime number theorem
    double lower = 0.0;         // rigorous: partial * exp(-tail/(1 - 2/p_max^2)) <= true <= partial
    double upper = 0.0;
    double tail_bound = 0.0;    // sum_{n > p_max} (n^-2 + n^-3) bound
    std::int64_t p_max = 0;
};

// Primes up to at least n, cached across calls.
const std::vector<std::int64_t>& cached_primes(std::int64_t n);

ArithmeticConstant arithmetic_constant(std::int64_t p_max = 10'000'000);

using cplx = std::complex<double>;

// B(s) = prod_p (1 + 1/((p-1) p^{s+1})), Re s > -1
EulerValue euler_B(cplx s, std::int64_t p_max = 1'000'000);
// B1(s,m) = prod_{p|m} (1 - p^{-s-1}) (1 + 1/((p-1)p^{s+1}))^{-1}
cplx euler_B1(cplx s, std::int64_t m);
// B2(s,c) = prod_{p|c} (1 + 1/((p-1)p^{s+1}))^{-1}
cplx euler_B2(cplx s, std::int64_t c);
// B3(s,c) = sum_{a|c} mu(a) B2(s,a)/(a phi(a)), evaluated as its product form
cplx euler_B3(cplx s, std::int64_t c);
// same quantity from the divisor sum, for cross-checks
cplx euler_B3_divisor_sum(cplx s, std::int64_t c);
// B4(s,P) = sum_{l|P} mu(l) B2(s,l)/phi(l), product form
cplx euler_B4(cplx s, std::int64_t P);
cplx euler_B4_divisor_sum(cplx s, std::int64_t P);
// B5(s) = prod_p (1 + 1/((p-1)p^{1-s})) (1 - p^{s-2}), Re s < 3/2
EulerValue euler_B5(cplx s, std::int64_t p_max = 1'000'000);
// B6(s,P) = sum_{(c,P)=1} mu(c) B3(-s,c)/(c^s phi(c)) = prod_{p not | P} (1 - B3(-s,p)/(p^s (p-1))), Re s > 0
EulerValue euler_B6(cplx s, std::int64_t P, std::int64_t p_max = 1'000'000);

// ---------------------------------------------------------------- diagonal terms

// int_0^inf v Fa(-v) Fb(v) dv
double diagonal_pair_integral(const EvenPiecewise& fa, const EvenPiecewise& fb);

// Permanent by Ryser's formula (Gray-code order); 1 for the empty matrix.
double permanent(const std::vector<std::vector<double>>& m);
double permanent_brute_force(const std::vector<std::vector<double>>& m);

// Sum over bijections sigma: S1 -> S2 of prod M[l][sigma(l)].
// Different sizes give 0, both empty give 1.
double pairing_sum(const std::vector<int>& S1, const std::vector<int>& S2,
                   const std::vector<std::vector<double>>& M);

// ---------------------------------------------------------------- off-diagonal integrals

struct OffDiagonalOptions {
    RidgeIntegralOptions ridge;
};

// I(S12, S22): S12, S22 are index lists into `transforms` (listed
// increasingly as alpha_1.., beta_1..). The delta constraint is solved for
// u_{beta_{j2}}.
IntegralResult I_integral(const std::vector<int>& S12, const std::vector<int>& S22,
                          const std::vector<const EvenPiecewise*>& transforms, const OffDiagonalOptions& opt = {});

// --------------------------------------------------------------- main term

struct SplitTerm {
    std::vector<int> S1, S2, S3;
    double f0_product = 1.0;
    double diagonal = 0.0;
    double off_diagonal = 0.0;
    double error = 0.0;
};

struct PartitionTerm {
    std::string partition;
    std::int64_t mu = 0;
    std::vector<double> kappa;
    std::vector<SplitTerm> splits;
    double diagonal = 0.0;
    double off_diagonal = 0.0;
    double error = 0.0;
};

struct MainTermReport {
    std::vector<PartitionTerm> partitions;
    double total = 0.0;
    double error = 0.0;  // summed absolute error budget
    bool exact = true;   // false when any integral used quasi Monte Carlo
};

MainTermReport main_term(const C4Family& family, const OffDiagonalOptions& opt = {});
nlohmann::json to_json(const MainTermReport& r);

// --------------------------------------------------------------- prime sums

// sum_p (log p)^2/p Fa(-log p/log Q) Fb(log p/log Q), p <= Q^{min kappa}, p not excluded
double prime_diagonal_sum(const EvenPiecewise& fa, const EvenPiecewise& fb, double Q,
                          const std::vector<std::int64_t>& excluded = {});

// ------------------------------------------------------------ contour identity

struct ContourCheck {
    std::complex<double> lhs;  // line integral
    std::complex<double> rhs;  // case formula
    double residual = 0.0;
    int which_case = 0;        // 1: delta < Re w1, 2: between, 3: delta > Re w2
};

// (1/2 pi i) int_{(delta)} F(iz) (1/(z-w1) - 1/(z-w2)) dz against the
// three-case formula in terms of Fhat.
ContourCheck contour_identity_check(const ProductTestFunction& F, std::complex<double> w1, std::complex<double> w2,
                                    double delta, double y_max = 400.0);

}  // namespace nlevel
