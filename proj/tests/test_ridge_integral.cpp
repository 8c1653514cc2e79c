#include <cmath>

#include "doctest.h"
#include "nlevel/ridge_integral.hpp"
#include "nlevel/test_functions.hpp"

using namespace nlevel;

namespace {

std::vector<double> unit(int d, int i)
{
    std::vector<double> a(d, 0.0);
    a[i] = 1.0;
    return a;
}

}  // namespace

TEST_CASE("ridge: polynomial boxes")
{
    auto x = uni_affine(0.0, 1.0);
    auto r = integrate_ridges({{unit(2, 0), 0.0, x}, {unit(2, 1), 0.0, x}}, {0, 0}, {1, 1});
    CHECK(r.exact);
    CHECK(r.value == doctest::Approx(0.25).epsilon(1e-14));

    // (x + y - 1)_+ over the unit square
    auto above = uni_step_above(1.0);
    auto lin = uni_affine(-1.0, 1.0);
    r = integrate_ridges({{{1, 1}, 0.0, above}, {{1, 1}, 0.0, lin}}, {0, 0}, {1, 1});
    CHECK(r.value == doctest::Approx(1.0 / 6.0).epsilon(1e-13));

    auto below = uni_step_below(1.0);
    r = integrate_ridges({{{1, 1, 1}, 0.0, below}}, {0, 0, 0}, {1, 1, 1});
    CHECK(r.value == doctest::Approx(1.0 / 6.0).epsilon(1e-13));

    CHECK(integrate_ridges({{unit(1, 0), 0.0, x}}, {1}, {1}).value == 0.0);
    CHECK(integrate_ridges({}, {}, {}).value == 1.0);
}

TEST_CASE("ridge: convolution of piecewise transforms")
{
    auto h = make_hat(1.0);
    auto g = uni_piecewise(h.fhat());
    auto c = convolve_fhat(h, h);
    for (double s : {0.0, 0.3, 0.77, 1.5}) {
        auto r = integrate_ridges({{{1.0}, 0.0, g}, {{-1.0}, s, g}}, {-1.0}, {1.0});
        CHECK(r.value == doctest::Approx(c(s)).epsilon(1e-12));
    }
    // triple convolution at 0.4 using two variables
    auto c3 = [&](double s) {
        return integrate_ridges({{{1, 0}, 0.0, g}, {{0, 1}, 0.0, g}, {{-1, -1}, s, g}}, {-1, -1}, {1, 1}).value;
    };
    auto cc = [&](double s) { return integrate_ridges({{{1.0}, 0.0, g}, {{-1.0}, s, uni_piecewise(c)}}, {-1.0}, {1.0}).value; };
    CHECK(c3(0.4) == doctest::Approx(cc(0.4)).epsilon(1e-11));
}

TEST_CASE("ridge: quasi Monte Carlo above the exact dimension")
{
    auto below = uni_step_below(1.0);
    auto r = integrate_ridges({{{1, 1, 1, 1}, 0.0, below}}, {0, 0, 0, 0}, {1, 1, 1, 1});
    CHECK_FALSE(r.exact);
    CHECK(r.error > 0.0);
    CHECK(std::abs(r.value - 1.0 / 24.0) < 6.0 * r.error + 1e-6);

    // exact rule forced to QMC on a 3d case agrees with the exact value
    RidgeIntegralOptions opt;
    opt.exact_max_dim = 2;
    r = integrate_ridges({{{1, 1, 1}, 0.0, below}}, {0, 0, 0}, {1, 1, 1}, opt);
    CHECK_FALSE(r.exact);
    CHECK(std::abs(r.value - 1.0 / 6.0) < 6.0 * r.error + 1e-6);
}
