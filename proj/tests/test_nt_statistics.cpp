#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nlevel/arith.hpp"
#include "nlevel/nt_statistics.hpp"
#include "nlevel/quadrature.hpp"

using namespace nlevel;

namespace {

constexpr double kPi = std::numbers::pi;

const ZeroSource& small_family()
{
    static const ZeroSource src = build_zero_source(WeightFunction::bump(), 5.0, 20.0, 1, nullptr);
    return src;
}

}  // namespace

TEST_CASE("bump weight and Mellin transform")
{
    auto W = WeightFunction::bump();
    CHECK(W(1.0) == 0.0);
    CHECK(W(2.0) == 0.0);
    CHECK(W(1.5) == doctest::Approx(std::exp(-4.0)).epsilon(1e-15));
    // composite Gauss-Legendre oracle
    std::vector<double> br;
    for (int i = 0; i <= 64; ++i) br.push_back(1.0 + i / 64.0);
    for (double s : {1.0, 0.5, 2.0}) {
        double ref = integrate_gl_panels([&](double x) { return W(x) * std::pow(x, s - 1.0); }, br, 20);
        CHECK(std::abs(W.mellin(s) - ref) < 1e-13);
    }
}

TEST_CASE("normaliser D")
{
    auto W = WeightFunction::bump();
    for (double Q : {7.3, 100.0, 1000.0}) {
        double direct = 0.0;
        for (std::int64_t q = 1; q <= 3 * static_cast<std::int64_t>(Q); ++q)
            direct += W(q / Q) * double(phi_star(q)) / double(euler_phi(q));
        CHECK(d_weight_exact(W, Q) == doctest::Approx(std::sqrt(kPi) * direct).epsilon(1e-14));
    }
    // relative gap between exact and asymptotic shrinks with Q
    double g1 = std::abs(d_weight_exact(W, 200.0) / d_weight_asymptotic(W, 200.0) - 1.0);
    double g2 = std::abs(d_weight_exact(W, 5000.0) / d_weight_asymptotic(W, 5000.0) - 1.0);
    CHECK(g2 < 0.02);
    CHECK(g2 < g1 + 1e-3);
    CHECK_THROWS_AS(d_weight_exact(W, 1.0), std::domain_error);
    for (auto q : family_moduli(W, 5.0)) CHECK(phi_star(q) > 0);
}

TEST_CASE("sharp sum: sieve against brute force")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    std::vector<double> g(14);
    for (auto& x : g) x = u(rng);
    for (auto specs : std::vector<std::vector<std::string>>{{"hat:1"}, {"hat:1", "bspline:1:2"},
                                                           {"hat:0.8", "raised_cosine:0.9", "hat:1.1"},
                                                           {"hat:0.5", "hat:0.6", "hat:0.7", "hat:0.9"}}) {
        auto f = parse_family(specs);
        for (double t : {0.0, 1.3}) {
            double a = sharp_sum(f, g, 0.5, t);
            double b = sharp_sum_brute(f, g, 0.5, t);
            CHECK(std::abs(a - b) < 1e-11 * (1.0 + std::abs(b)));
        }
    }
}

TEST_CASE("L0 and L1 against direct oracles")
{
    const auto& src = small_family();
    auto W = WeightFunction::bump();
    const double Q = 5.0, U = std::log(Q) / (2 * kPi);
    auto f = parse_family({"bspline:1:2", "hat:1"});
    auto l0 = l0_statistic(f, W, Q, src);
    auto l1 = l1_statistic(f, W, Q, src, 40, 2);
    auto l1h = l1_statistic(f, W, Q, src, 80, 1);

    double ref0 = 0.0;
    std::vector<std::pair<std::vector<double>, double>> lists;
    for (auto q : family_moduli(W, Q))
        for (const auto& chi : enumerate_primitive(q)) {
            const auto& z = src.at(chi, 20.0).zeros;
            ref0 += W(q / Q) / double(euler_phi(q)) * sharp_sum_brute(f, z, U, 0.0);
            lists.push_back({z, W(q / Q) / double(euler_phi(q))});
        }
    CHECK(l0.value == doctest::Approx(ref0).epsilon(1e-12));
    CHECK(l0.characters == 11);

    std::vector<double> br;
    for (int i = 0; i <= 96; ++i) br.push_back(-6.0 + i * 0.125);
    double ref1 = integrate_gl_panels(
        [&](double t) {
            double s = 0.0;
            for (const auto& [z, c] : lists) s += c * sharp_sum(f, z, U, t);
            return s * std::exp(-t * t);
        },
        br, 20);
    CHECK(std::abs(l1.value - ref1) < 1e-8 * std::abs(ref1) + 1e-12);
    CHECK(std::abs(l1.value - l1h.value) < 1e-8);
    CHECK(l1.quadrature_error < 1e-6);
    CHECK(l1.tail_estimate > 0.0);
    auto js = to_json(l1);
    CHECK(js["diagnostics"]["statistic"] == "L1");
    CHECK(js.contains("value"));
}

TEST_CASE("missing zeros are reported, not skipped")
{
    auto W = WeightFunction::bump();
    ZeroSource src = small_family();
    src.tables.erase(src.tables.begin());
    CHECK_THROWS_AS(l0_statistic(parse_family({"hat:1"}), W, 5.0, src), MissingZerosError);
    ZeroSource higher = small_family();
    higher.height = 40.0;
    CHECK_THROWS_AS(l0_statistic(parse_family({"hat:1"}), W, 5.0, higher), MissingZerosError);
}

TEST_CASE("required zero height")
{
    auto f = parse_family({"bspline:1:4"});
    double T = required_zero_height(f, 100.0, 2.0, 1e-10);
    const double U = std::log(100.0) / (2 * kPi);
    CHECK(f.functions[0].envelope(U * (T - 2.0)) * std::log(200.0 * T / (2 * kPi)) / (2 * kPi) <= 1.0001e-10);
    CHECK(required_zero_height(f, 100.0, 2.0, 1e-6) < T);
}

TEST_CASE("large-sieve object: exact against brute force")
{
    auto W = WeightFunction::bump();
    auto h = make_hat(0.4);
    auto g = make_hat(0.7);
    std::vector<const EvenPiecewise*> t11{&h.fhat(), &h.fhat()};
    double a = als_sum_exact(1, 1, 1, t11, W, 20.0);
    double b = als_sum_brute(1, 1, 1, t11, W, 20.0);
    CHECK(std::abs(a - b) < 1e-10 * std::max(1.0, std::abs(b)));
    CHECK(a != 0.0);

    std::vector<const EvenPiecewise*> t21{&g.fhat(), &h.fhat(), &g.fhat()};
    for (std::int64_t P : {1, 2, 6}) {
        double x = als_sum_exact(P, 2, 1, t21, W, 20.0);
        double y = als_sum_brute(P, 2, 1, t21, W, 20.0);
        CHECK(std::abs(x - y) < 1e-10 * std::max(1.0, std::abs(y)));
    }
    // swapping the sides conjugates the characters; the sum is real
    std::vector<const EvenPiecewise*> t12{&g.fhat(), &g.fhat(), &h.fhat()};
    CHECK(als_sum_exact(1, 1, 2, t12, W, 20.0) == doctest::Approx(als_sum_exact(1, 2, 1, t21, W, 20.0)).epsilon(1e-12));
    // no primes below Q^0.2 = 1.8
    auto tiny = make_hat(0.2);
    std::vector<const EvenPiecewise*> tt{&tiny.fhat(), &tiny.fhat()};
    CHECK(als_sum_exact(1, 1, 1, tt, W, 20.0) == 0.0);
    CHECK_THROWS_AS(als_sum_exact(4, 1, 1, t11, W, 20.0), std::domain_error);
    AlsOptions guard;
    guard.max_tuples = 1;
    CHECK_THROWS_AS(als_sum_exact(1, 1, 1, t11, W, 20.0, guard), std::length_error);
}

TEST_CASE("Gaussian Fourier moments")
{
    for (int j = 0; j <= 6; ++j)
        for (double xi : {0.0, 0.7, 2.5}) {
            std::vector<double> br;
            for (int i = 0; i <= 80; ++i) br.push_back(-10.0 + i * 0.25);
            double re = integrate_gl_panels([&](double t) { return std::pow(t, j) * std::exp(-t * t) * std::cos(xi * t); }, br, 20);
            double im = integrate_gl_panels([&](double t) { return std::pow(t, j) * std::exp(-t * t) * std::sin(xi * t); }, br, 20);
            auto m = gaussian_fourier_moment(j, xi);
            CHECK(std::abs(m.real() - re) < 1e-12);
            CHECK(std::abs(m.imag() - im) < 1e-12);
        }
}
