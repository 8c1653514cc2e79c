#include <cmath>
#include <random>

#include "doctest.h"
#include "nlevel/arith.hpp"
#include "nlevel/prediction.hpp"
#include "nlevel/quadrature.hpp"

using namespace nlevel;

TEST_CASE("euler products: special values")
{
    auto b5 = euler_B5(1.0, 100000);
    CHECK(std::abs(b5.value - 1.0) < 1e-12);
    CHECK(std::abs(euler_B1(0.0, 1) - 1.0) < 1e-15);
    CHECK(std::abs(euler_B2(0.0, 1) - 1.0) < 1e-15);
    CHECK_THROWS_AS(euler_B5(1.6, 1000), std::domain_error);
    CHECK_THROWS_AS(euler_B6(0.0, 1, 1000), std::domain_error);

    const auto A = arithmetic_constant(1'000'000);
    for (std::int64_t P : {1, 2, 3, 6, 30, 210}) {
        double local = 1.0;
        for (auto [p, e] : factorize(P)) {
            const double dp = double(p);
            local *= (1.0 - 1.0 / dp) / (1.0 - 1.0 / (dp * dp) - 1.0 / (dp * dp * dp));
        }
        auto b6 = euler_B6(1.0, P, 1'000'000);
        auto prod = euler_B4(-1.0, P) * b6.value;
        CHECK(std::abs(prod - A.partial * local) < 1e-12);
        CHECK(std::abs(euler_B4(-1.0, P) - euler_phi(P) / double(P)) < 1e-14);
    }
}

TEST_CASE("euler products: divisor sums match products")
{
    for (cplx s : {cplx(0.0), cplx(1.0), cplx(-0.5), cplx(0.3, 2.0)}) {
        for (std::int64_t c : {1, 2, 6, 30, 42, 210, 2310}) {
            CHECK(std::abs(euler_B3(s, c) - euler_B3_divisor_sum(s, c)) < 1e-13);
            CHECK(std::abs(euler_B4(s, c) - euler_B4_divisor_sum(s, c)) < 1e-13);
        }
    }
}

TEST_CASE("arithmetic constant bounds")
{
    auto a6 = arithmetic_constant(1'000'000);
    auto a7 = arithmetic_constant(10'000'000);
    CHECK(a6.lower <= a6.upper);
    CHECK(a7.lower >= a6.lower);
    CHECK(a7.upper <= a6.upper);
    CHECK(a7.extrapolated >= a7.lower);
    CHECK(a7.extrapolated <= a7.upper);
    CHECK(std::abs(a6.extrapolated - a7.extrapolated) < 1e-6);
    CHECK(a7.upper - a7.lower < 2e-7);
    auto a100 = arithmetic_constant(100);
    CHECK(a100.partial < 5.0 / 8.0);
    CHECK(a100.partial > 0.0);
}

TEST_CASE("diagonal integrals and permanents")
{
    auto h = make_hat(1.0);
    CHECK(diagonal_pair_integral(h.fhat(), h.fhat()) == doctest::Approx(1.0 / 12.0).epsilon(1e-14));

    CHECK(permanent({}) == 1.0);
    CHECK(permanent({{1, 2}, {3, 4}}) == doctest::Approx(10.0));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int n = 1; n <= 6; ++n) {
        std::vector<std::vector<double>> m(n, std::vector<double>(n));
        for (auto& row : m)
            for (auto& x : row) x = U(rng);
        CHECK(permanent(m) == doctest::Approx(permanent_brute_force(m)).epsilon(1e-12));
    }
    std::vector<std::vector<double>> M{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
    CHECK(pairing_sum({0}, {0, 1}, M) == 0.0);
    CHECK(pairing_sum({}, {}, M) == 1.0);
    CHECK(pairing_sum({0, 2}, {1, 2}, M) == doctest::Approx(2 * 9 + 3 * 8));
}

namespace {

// Plain Monte Carlo of I(S12,S22) straight from the zone description; the last
// beta coordinate is solved from the delta constraint.
std::pair<double, double> I_monte_carlo(const std::vector<const EvenPiecewise*>& a,
                                        const std::vector<const EvenPiecewise*>& b, int samples, unsigned seed)
{
    const int k = int(a.size()), r = int(b.size());
    std::mt19937_64 rng(seed);
    double sum = 0, sum2 = 0, volume = 1;
    std::vector<double> kap;
    for (auto* f : a) kap.push_back(f->support());
    for (auto* f : b) kap.push_back(f->support());
    for (int i = 0; i + 1 < k + r; ++i) volume *= 2 * kap[i];
    std::vector<double> u(k + r);
    for (int s = 0; s < samples; ++s) {
        double tot = 0;
        for (int i = 0; i + 1 < k + r; ++i) {
            u[i] = std::uniform_real_distribution<double>(-kap[i], kap[i])(rng);
            tot += u[i];
        }
        u[k + r - 1] = -tot;
        double prod = 1;
        for (int i = 0; i < k; ++i) prod *= (*a[i])(u[i]);
        for (int i = 0; i < r; ++i) prod *= (*b[i])(u[k + i]);
        if (prod == 0) continue;
        double val = 0;
        for (int j1 = 0; j1 < k; ++j1) {
            for (int j2 = 0; j2 < r; ++j2) {
                // zone 1 members fixed by sign: T1 if negative, W1 if positive
                double base = u[j1];
                bool ok = true;
                int w = 0;
                for (int i = 0; i < j1; ++i)
                    if (u[i] < 0) base += u[i];
                for (int i = 0; i < j2; ++i)
                    if (u[k + i] < 0) base += u[k + i];
                std::vector<double> free;  // zone 2 must be positive, zone 3 negative
                for (int i = j1 + 1; i < k; ++i) {
                    if (u[i] <= 0) ok = false;
                    free.push_back(u[i]);
                }
                for (int i = j2 + 1; i < r; ++i) {
                    if (u[k + i] >= 0) ok = false;
                    free.push_back(u[k + i]);
                }
                if (!ok) continue;
                for (unsigned m = 0; m < (1u << free.size()); ++m) {
                    double t = base;
                    w = 0;
                    for (unsigned q = 0; q < free.size(); ++q) {
                        if (m >> q & 1) t += free[q];
                        else ++w;
                    }
                    if (t <= 1) continue;
                    const int e = (j1 + 1) + r + w;
                    val += (e % 2 ? -1.0 : 1.0) * (1 - t);
                }
            }
        }
        const double x = prod * val * volume;
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / samples;
    return {mean, std::sqrt((sum2 / samples - mean * mean) / samples)};
}

}  // namespace

TEST_CASE("off-diagonal integral: one and one")
{
    auto h2 = make_hat(2.0);
    std::vector<const EvenPiecewise*> t{&h2.fhat(), &h2.fhat()};
    auto r = I_integral({0}, {1}, t);
    CHECK(r.exact);
    CHECK(r.value == doctest::Approx(-1.0 / 48.0).epsilon(1e-13));

    auto h12 = make_hat(1.2);
    t = {&h12.fhat(), &h12.fhat()};
    // closed form: -(1/1.44) (0.2^3 * 0.2/3 - 0.2^4/4)
    const double expect = (std::pow(0.2, 4) / 4 - 0.2 * std::pow(0.2, 3) / 3) / 1.44;
    CHECK(I_integral({0}, {1}, t).value == doctest::Approx(expect).epsilon(1e-12));

    auto h = make_hat(0.9);
    t = {&h.fhat(), &h.fhat()};
    CHECK(I_integral({0}, {1}, t).value == 0.0);
    CHECK_THROWS_AS(I_integral({}, {1}, t), std::domain_error);
}

TEST_CASE("off-diagonal integral: larger sets against Monte Carlo")
{
    auto a = make_hat(1.3), b = make_bspline(1.1, 3), c = make_hat(0.8);
    std::vector<const EvenPiecewise*> t{&a.fhat(), &b.fhat(), &c.fhat()};
    struct Case {
        std::vector<int> S12, S22;
    };
    for (const auto& cs : {Case{{0, 1}, {2}}, Case{{0}, {1, 2}}, Case{{2, 0}, {1}}}) {
        auto r = I_integral(cs.S12, cs.S22, t);
        std::vector<const EvenPiecewise*> A, B;
        for (int i : cs.S12) A.push_back(t[i]);
        for (int i : cs.S22) B.push_back(t[i]);
        auto [mc, se] = I_monte_carlo(A, B, 2'000'000, 11);
        CHECK(r.exact);
        CHECK(std::abs(r.value - mc) < 5 * se + 1e-7);
    }
}

TEST_CASE("main term: one and two levels")
{
    auto fam1 = parse_family({"bspline:1.7:3"});
    auto r1 = main_term(fam1);
    CHECK(r1.total == doctest::Approx(fam1.functions[0].fhat(0.0)).epsilon(1e-14));

    for (auto specs : {std::vector<std::string>{"hat:0.8", "hat:0.8"}, {"hat:1.5", "hat:1.5"},
                       {"hat:1.9", "bspline:1.2:3"}, {"rcos:1.4", "hat:1.1"}}) {
        auto fam = parse_family(specs);
        const auto& f1 = fam.functions[0].fhat();
        const auto& f2 = fam.functions[1].fhat();
        std::vector<double> br;
        for (double x : f1.full_breaks()) br.push_back(x);
        for (double x : f2.full_breaks()) br.push_back(x);
        br.push_back(-1);
        br.push_back(0);
        br.push_back(1);
        std::sort(br.begin(), br.end());
        const double expect = f1(0) * f2(0) - integrate_gl_panels(
                                                  [&](double u) { return f1(u) * f2(-u) * std::max(0.0, 1 - std::abs(u)); },
                                                  br, 40);
        auto r = main_term(fam);
        CHECK(r.total == doctest::Approx(expect).epsilon(1e-11));
        CHECK(r.exact);
    }
    CHECK_THROWS_AS(main_term(parse_family({"hat:2", "hat:2"})), std::domain_error);
}

TEST_CASE("prime diagonal sums")
{
    auto h = make_hat(1.0);
    const double m = diagonal_pair_integral(h.fhat(), h.fhat());
    double last = 0;
    for (double Q : {1e3, 1e4, 1e5}) {
        const double L = std::log(Q);
        const double ratio = prime_diagonal_sum(h.fhat(), h.fhat(), Q) / (L * L * m);
        CHECK(std::abs(ratio - 1) < 3.0 / L);
        if (last != 0) CHECK(std::abs(ratio - 1) < std::abs(last - 1));
        last = ratio;
    }
    EvenPiecewise zero;
    CHECK(prime_diagonal_sum(h.fhat(), zero, 1e4) == 0.0);
    const double full = prime_diagonal_sum(h.fhat(), h.fhat(), 1e4);
    const double cut = prime_diagonal_sum(h.fhat(), h.fhat(), 1e4, {2, 3});
    const double L = std::log(1e4);
    CHECK(full - cut > 0);
    CHECK(full - cut < L * (std::log(2.) * std::log(2.) / 2 + std::log(3.) * std::log(3.) / 3));
}

TEST_CASE("contour identity")
{
    ProductTestFunction F({make_hat(1.0)});
    for (double delta : {-0.6, 0.1, 0.7}) {
        auto c = contour_identity_check(F, {-0.3, 0.2}, {0.4, -1.0}, delta);
        CHECK(c.residual < 1e-6);
    }
    ProductTestFunction G({make_bspline(1.3, 3), make_hat(0.7)});
    CHECK(contour_identity_check(G, {-0.3, 0.0}, {0.4, 0.0}, 0.05).residual < 1e-6);
    CHECK(contour_identity_check(ProductTestFunction{}, {-0.3, 0}, {0.4, 0}, 0.0).residual == 0.0);
    CHECK_THROWS_AS(contour_identity_check(F, {-0.3, 0}, {0.4, 0}, 0.4), std::domain_error);
}
