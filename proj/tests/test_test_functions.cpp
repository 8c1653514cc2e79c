#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nlevel/quadrature.hpp"
#include "nlevel/test_functions.hpp"

using namespace nlevel;
constexpr double kPi = std::numbers::pi;

namespace {

// int fhat(u) cos(2 pi x u) du by fine Gauss-Legendre panels
double inverse_numeric(const TestFunction& g, double x)
{
    std::vector<double> br;
    auto fb = g.fhat().full_breaks();
    for (std::size_t k = 0; k + 1 < fb.size(); ++k)
        for (int j = 0; j < 8; ++j) br.push_back(fb[k] + (fb[k + 1] - fb[k]) * j / 8.0);
    br.push_back(fb.back());
    return integrate_gl_panels([&](double u) { return g.fhat(u) * std::cos(2 * kPi * x * u); }, br, 30);
}

// int over R of h, for h decaying at least like x^-4
template <typename H>
double line_integral(H h, double X)
{
    std::vector<double> br;
    for (double x = -X; x <= X + 1e-9; x += 0.5) br.push_back(x);
    return integrate_gl_panels(h, br, 20);
}

std::vector<TestFunction> catalogue()
{
    return {make_hat(1.0), make_hat(0.7), make_bspline(1.5, 3), make_bspline(1.0, 6), make_raised_cosine(1.0),
            make_raised_cosine(0.6)};
}

}  // namespace

TEST_CASE("hat closed forms")
{
    auto h = make_hat(1.3);
    CHECK(h.fhat(0.0) == 1.0);
    CHECK(h.f(0.0) == doctest::Approx(1.3).epsilon(1e-15));
    CHECK(h.fhat(1.3) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(h.fhat(2.0) == 0.0);
    CHECK(h.fhat(0.65) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(make_hat(0.0), std::domain_error);
    CHECK_THROWS_AS(make_bspline(1.0, 7), std::domain_error);
}

TEST_CASE("inverse transform matches closed form on a grid")
{
    for (const auto& g : catalogue()) {
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            double x = -10.0 + 20.0 * i / 999.0;
            worst = std::max(worst, std::abs(g.f(x) - inverse_numeric(g, x)));
        }
        INFO(g.spec());
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("evenness is exact")
{
    for (const auto& g : catalogue())
        for (double x : {0.1, 0.37, 1.9, 5.5}) {
            CHECK(g.f(x) == g.f(-x));
            CHECK(g.fhat(x * g.eta() / 6) == g.fhat(-x * g.eta() / 6));
        }
}

TEST_CASE("bspline family")
{
    auto b2 = make_bspline(1.7, 2), h = make_hat(1.7);
    for (double u = 0; u <= 1.8; u += 0.01) CHECK(b2.fhat(u) == doctest::Approx(h.fhat(u)).epsilon(1e-14));
    for (double x : {0.0, 0.3, 2.2}) CHECK(b2.f(x) == doctest::Approx(h.f(x)).epsilon(1e-13));
    for (int m = 2; m <= 6; ++m) {
        auto b = make_bspline(1.2, m);
        CHECK(b.fhat(0.0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(b.fhat().support() == 1.2);
        double q = 0;
        const auto br = b.fhat().full_breaks();
        for (std::size_t i = 0; i + 1 < br.size(); ++i)
            q += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                [&](double u) { return b.fhat(u); }, br[i], br[i + 1], 5, 1e-15);
        CHECK(b.fhat().integral() == doctest::Approx(q).epsilon(1e-12));
        CHECK(b.fhat().integral() == doctest::Approx(b.f(0.0)).epsilon(1e-12));
    }
}

TEST_CASE("convolution")
{
    auto h = make_hat(1.0);
    auto c = convolve_fhat(h, h);
    CHECK(c.support() == 2.0);
    CHECK(c(0.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(c(2.5) == 0.0);
    for (double u : {0.2, 0.9, 1.4}) CHECK(c(u) == c(-u));
    EvenPiecewise zero = EvenPiecewise::constant(0.5, 0.0);
    CHECK(convolve(h.fhat(), zero).is_zero());
    auto r = make_raised_cosine(0.8), b = make_bspline(1.1, 4);
    auto rb = convolve_fhat(r, b);
    CHECK(rb.support() == doctest::Approx(1.9).epsilon(1e-15));
    // transform of the pointwise product
    for (double u : {0.0, 0.3, 1.0, 1.7}) {
        double direct = 2.0 * integrate_gl_panels(
                                  [&](double x) { return r.f(x) * b.f(x) * std::cos(2 * kPi * x * u); },
                                  [] {
                                      std::vector<double> v;
                                      for (double x = 0; x <= 60.0; x += 0.25) v.push_back(x);
                                      return v;
                                  }(),
                                  16);
        CHECK(rb(u) == doctest::Approx(direct).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("products over blocks")
{
    C4Family fam = parse_family({"hat:1", "hat:1", "bspline:0.5:3"});
    auto s = product_for_block(fam, {2});
    CHECK(s.kappa() == 0.5);
    for (double u : {0.0, 0.1, 0.33}) CHECK(s.fhat(u) == fam.functions[2].fhat(u));
    auto p = product_for_block(fam, {0, 1});
    CHECK(p.kappa() == 2.0);
    double q = line_integral([&](double x) { return p.f(x); }, 1000.0);
    CHECK(p.fhat(0.0) == doctest::Approx(q).epsilon(1e-9));
    auto t = product_for_block(fam, {0, 1, 2});
    CHECK(t.kappa() == 2.5);
    double q3 = line_integral([&](double x) { return t.f(x); }, 600.0);
    CHECK(t.fhat(0.0) == doctest::Approx(q3).epsilon(1e-9));
    CHECK_THROWS_AS(product_for_block(fam, {}), std::domain_error);
}

TEST_CASE("C4 check")
{
    auto a = check_c4(parse_family({"hat:1", "hat:1", "hat:1"}));
    CHECK(a.ok);
    CHECK(a.eta_total == 3.0);
    CHECK(a.epsilon == 1.0);
    auto b = check_c4(parse_family({"hat:2", "hat:2"}));
    CHECK_FALSE(b.ok);
    CHECK(b.violating_index == 1);
    CHECK(b.cumulative_eta == 4.0);
    CHECK_FALSE(b.message.empty());
    auto c = check_c4(C4Family{});
    CHECK(c.ok);
    CHECK(c.eta_total == 0.0);
}

TEST_CASE("Plancherel")
{
    for (const auto& g : {make_hat(1.0), make_bspline(1.5, 3), make_bspline(0.8, 5)}) {
        double lhs = line_integral([&](double x) { return g.f(x) * g.f(x); }, 1000.0);
        double rhs = integrate_product({&g.fhat(), &g.fhat()}, -g.eta(), g.eta());
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
    }
}

TEST_CASE("spec strings")
{
    CHECK(parse_test_function("hat:1.0").spec() == "hat:1");
    CHECK(parse_test_function("bspline:1.5:3").order() == 3);
    CHECK(parse_test_function("rcos:0.5").kind() == TestFunction::Kind::raised_cosine);
    CHECK_THROWS_AS(parse_test_function("gauss:1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_test_function("hat"), std::invalid_argument);
}

TEST_CASE("decay envelopes dominate")
{
    for (auto spec : {"hat:1", "hat:0.4", "bspline:1.5:3", "bspline:0.9:6", "rcos:1", "rcos:0.35"}) {
        auto f = parse_test_function(spec);
        for (double x = 0.0; x < 40.0; x += 0.37) {
            const double e = f.envelope(x);
            for (double y = x; y < x + 20.0; y += 0.013) CHECK(std::abs(f.f(y)) <= e * (1 + 1e-12));
        }
    }
    ProductTestFunction p({make_hat(1.0), make_raised_cosine(0.5)});
    for (double x : {0.0, 1.0, 5.0, 30.0}) CHECK(p.envelope(x) == doctest::Approx(make_hat(1.0).envelope(x) * make_raised_cosine(0.5).envelope(x)));
}
