#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nlevel/quadrature.hpp"
#include "nlevel/rmt_cue.hpp"

using namespace nlevel;

namespace {

constexpr double kPi = std::numbers::pi;

double window_integral(const TestFunction& f, double half)
{
    std::vector<double> br;
    const int panels = static_cast<int>(std::ceil(2 * half / 0.25));
    for (int i = 0; i <= panels; ++i) br.push_back(-half + 2 * half * i / panels);
    return integrate_gl_panels([&](double x) { return f.f(x); }, br, 16);
}

}  // namespace

TEST_CASE("sine kernel determinant")
{
    CHECK(sine_kernel(0.3, 0.3) == 1.0);
    CHECK(sine_kernel(0.3, 1.1) == sine_kernel(1.1, 0.3));
    CHECK(w_n({0.7}) == 1.0);
    CHECK(w_n({0.0, 0.5}) == doctest::Approx(1.0 - 4.0 / (kPi * kPi)).epsilon(1e-14));
    CHECK(std::abs(w_n({0.2, 1.3, 0.2})) < 1e-14);
    std::vector<double> x{0.1, 0.9, -0.4, 2.2};
    const double w = w_n(x);
    std::sort(x.begin(), x.end());
    do {
        CHECK(std::abs(w_n(x) - w) < 1e-12);
    } while (std::next_permutation(x.begin(), x.end()));
}

TEST_CASE("CUE sampling")
{
    auto a = sample_cue(12, 99);
    auto b = sample_cue(12, 99);
    CHECK(a.angles == b.angles);
    CHECK(sample_cue(12, 100).angles != a.angles);
    CHECK(std::is_sorted(a.angles.begin(), a.angles.end()));
    for (double t : a.angles) CHECK((t >= -kPi && t < kPi));

    // spectral density is uniform; counts in an arc of length 2 pi / N average 1
    const int N = 10, M = 10000, bins = 20;
    std::vector<double> hist(bins, 0.0);
    double arc = 0.0, arc2 = 0.0;
    CueStream st(N, 7, 0);
    for (int s = 0; s < M; ++s) {
        auto smp = st.next();
        int c = 0;
        for (double t : smp.angles) {
            hist[std::min(bins - 1, static_cast<int>((t + kPi) / (2 * kPi) * bins))] += 1;
            if (t >= 0.3 && t < 0.3 + 2 * kPi / N) ++c;
        }
        arc += c;
        arc2 += double(c) * c;
    }
    const double expect = double(N) * M / bins, sd = std::sqrt(expect * (1.0 - 1.0 / bins));
    for (double h : hist) CHECK(std::abs(h - expect) < 4 * sd);
    const double mean = arc / M, se = std::sqrt((arc2 / M - mean * mean) / M);
    CHECK(std::abs(mean - 1.0) < 3 * se + 1e-12);
}

TEST_CASE("star statistic")
{
    auto s = sample_cue(9, 3);
    auto one = [](const std::vector<double>&) { return 1.0; };
    CHECK(star_statistic(one, s, 1) == doctest::Approx(9.0));
    CHECK(star_statistic(one, s, 2) == doctest::Approx(72.0));
    CHECK(star_statistic(one, s, 3) == doctest::Approx(504.0));
    CHECK(star_statistic(one, s, 10) == 0.0);

    auto fam = parse_family({"hat:1", "bspline:1.5:2", "hat:0.7"});
    auto g = [&](const std::vector<double>& x) { return fam.f(x); };
    double brute = 0.0;
    const int N = 9;
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
            for (int c = 0; c < N; ++c) {
                if (a == b || b == c || a == c) continue;
                brute += fam.f({N * s.angles[a] / (2 * kPi), N * s.angles[b] / (2 * kPi), N * s.angles[c] / (2 * kPi)});
            }
    CHECK(star_statistic(g, s, 3) == doctest::Approx(brute).epsilon(1e-12));
    CHECK(star_statistic(fam, s) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("finite-N density")
{
    auto h = make_hat(1.0);
    for (int N : {10, 30}) {
        auto d = finite_n_density(parse_family({"hat:1"}), N);
        CHECK(d.value == doctest::Approx(window_integral(h, 0.5 * N)).epsilon(1e-12));
    }
    // n = 2 closed form: (int f)^2 - int int f f K_N^2 matched by an independent 2D rule
    {
        const int N = 10;
        auto fam = parse_family({"hat:1", "hat:1"});
        auto d = finite_n_density(fam, N);
        const QuadRule& r = gauss_legendre(16);
        double ref = 0.0;
        for (int p = 0; p < 80; ++p)
            for (int q = 0; q < 80; ++q)
                for (std::size_t i = 0; i < r.x.size(); ++i)
                    for (std::size_t j = 0; j < r.x.size(); ++j) {
                        const double x = -5 + (p + 0.5) * 0.125 + 0.0625 * r.x[i];
                        const double y = -5 + (q + 0.5) * 0.125 + 0.0625 * r.x[j];
                        const double dd = x - y;
                        const double K = dd == 0.0 ? 1.0 : std::sin(kPi * dd) / (N * std::sin(kPi * dd / N));
                        ref += 0.0625 * 0.0625 * r.w[i] * r.w[j] * h.f(x) * h.f(y) * (1.0 - K * K);
                    }
        CHECK(d.value == doctest::Approx(ref).epsilon(1e-10));
        CHECK(d.error < 1e-10);
    }
    // trend toward the sine-kernel limit
    for (auto specs : std::vector<std::vector<std::string>>{{"hat:1", "hat:1"}, {"bspline:1:4", "bspline:1.2:4", "bspline:0.8:4"}}) {
        auto fam = parse_family(specs);
        const double lim = integral_f_wn(fam).value;
        const double e10 = std::abs(finite_n_density(fam, 10).value - lim);
        const double e40 = std::abs(finite_n_density(fam, 40).value - lim);
        CHECK(e40 < e10);
        CHECK(e40 < 2e-2);
    }
    CHECK_THROWS_AS(finite_n_density(parse_family({"hat:1", "hat:1", "hat:1"}), 2), std::domain_error);
}

TEST_CASE("integral of f W^(n)")
{
    auto a = make_hat(0.8), b = make_hat(1.3);
    auto fam = parse_family({"hat:0.8", "hat:1.3"});
    std::vector<double> br{-1.0, -0.8, 0.0, 0.8, 1.0};
    const double tri = integrate_gl_panels([&](double u) { return a.fhat(u) * b.fhat(-u) * std::max(0.0, 1 - std::abs(u)); }, br, 8);
    CHECK(integral_f_wn(fam).value == doctest::Approx(a.fhat(0) * b.fhat(0) - tri).epsilon(1e-13));
    CHECK(integral_f_wn(parse_family({"hat:1.7"})).value == doctest::Approx(1.0));
}

TEST_CASE("J against I with the other variable eliminated")
{
    std::vector<TestFunction> fs{make_hat(1.3), make_hat(1.7), make_bspline(1.5, 2), make_hat(1.1)};
    std::vector<const EvenPiecewise*> tr;
    for (auto& f : fs) tr.push_back(&f.fhat());
    for (auto [S12, S22] : std::vector<std::pair<std::vector<int>, std::vector<int>>>{
             {{0}, {1}}, {{1}, {0}}, {{0, 1}, {2}}, {{2}, {0, 1}}, {{0, 3}, {1, 2}}}) {
        auto J = J_integral(S12, S22, tr);
        auto I = I_integral(S12, S22, tr);
        const double sgn = (S12.size() + S22.size()) % 2 ? -1.0 : 1.0;
        CHECK(std::abs(J.value - sgn * I.value) < 1e-12 + 1e-9 * std::abs(I.value));
    }
    auto h2 = make_hat(2.0);
    std::vector<const EvenPiecewise*> t2{&h2.fhat(), &h2.fhat()};
    std::vector<std::vector<double>> M(2, std::vector<double>(2, 1.0 / 12));
    CHECK(j1_term({0}, {1}, t2, M).value == doctest::Approx(-1.0 / 48).epsilon(1e-12));
    auto small = make_hat(0.9);
    std::vector<const EvenPiecewise*> ts{&small.fhat(), &small.fhat()};
    CHECK(j1_term({0}, {1}, ts, M).value == 0.0);
    CHECK(j0_term({}, {}, M) == 1.0);
    CHECK(j0_term({0}, {1}, M) == doctest::Approx(1.0 / 12));
}

TEST_CASE("finite-N singleton J* term approaches the limit")
{
    auto f = make_hat(1.5);
    std::vector<const EvenPiecewise*> tr{&f.fhat(), &f.fhat()};
    const double lim = I_integral({0}, {1}, tr).value;
    const double e20 = std::abs(j1_singleton_finite_n(f, f, 20) - lim);
    const double e40 = std::abs(j1_singleton_finite_n(f, f, 40) - lim);
    MESSAGE("J1 limit " << lim << ", errors N=20 " << e20 << ", N=40 " << e40);
    CHECK(e40 < e20);
    CHECK(e40 < 4.0 / 40 * std::abs(lim) + 1e-3);
}

TEST_CASE("RMT prediction")
{
    CHECK(rmt_prediction(parse_family({"hat:1.5"})).total == doctest::Approx(1.0));
    for (auto specs : std::vector<std::vector<std::string>>{{"hat:0.8", "hat:0.8"}, {"hat:1.9", "hat:1.9"},
                                                           {"hat:1.2", "hat:1.2", "hat:1.2"}, {"hat:1.5", "bspline:1.8:2"}}) {
        auto fam = parse_family(specs);
        auto r = rmt_prediction(fam);
        auto m = main_term(fam);
        auto w = integral_f_wn(fam);
        CHECK(std::abs(r.total - m.total) < 1e-9 * std::abs(r.total) + 1e-12);
        CHECK(std::abs(r.total - w.value) < 1e-9 * std::abs(w.value) + 1e-12);
    }
    CHECK(rmt_prediction(parse_family({"hat:1.9", "hat:1.9"})).r1 != 0.0);
    CHECK(to_json(rmt_prediction(parse_family({"hat:1"}))).contains("r1"));
}

TEST_CASE("CUE Monte Carlo against the finite-N density")
{
    std::vector<C4Family> fams{parse_family({"hat:1"}), parse_family({"hat:1", "hat:1"})};
    auto mc = cue_monte_carlo(fams, 10, 20000, 5, 4, 2);
    auto again = cue_monte_carlo(fams, 10, 20000, 5, 4, 1);
    for (std::size_t k = 0; k < fams.size(); ++k) {
        CHECK(mc[k].mean == again[k].mean);
        const double d = finite_n_density(fams[k], 10).value;
        CHECK(std::abs(mc[k].mean - d) < 4 * mc[k].stderr_);
    }
    auto js = to_json(mc[1]);
    CHECK(js["n"] == 2);
    CHECK(js.contains("stderr"));
}
