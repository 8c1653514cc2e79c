#include "nlevel/prediction.hpp"

#include <algorithm>
#include <boost/math/special_functions/expint.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "nlevel/arith.hpp"
#include "nlevel/partition_lattice.hpp"
#include "nlevel/quadrature.hpp"

namespace nlevel {

namespace {

constexpr double kPi = std::numbers::pi;

// sum_{n > P} n^-a <= P^{1-a}/(a-1)
double integer_tail(double P, double a)
{
    if (!(a > 1.0)) return INFINITY;
    return std::pow(P, 1.0 - a) / (a - 1.0);
}

template <typename Local>
EulerValue euler_product(Local local, std::int64_t p_max, double a, std::int64_t skip_divisors_of = 1)
{
    const auto& primes = cached_primes(p_max);
    EulerValue r;
    r.p_max = p_max;
    std::complex<double> prod = 1.0;
    for (std::int64_t p : primes) {
        if (p > p_max) break;
        if (skip_divisors_of > 1 && skip_divisors_of % p == 0) continue;
        prod *= local(static_cast<double>(p));
    }
    r.partial = r.value = prod;
    r.tail_bound = 2.0 * integer_tail(static_cast<double>(p_max), a);
    return r;
}

std::vector<std::int64_t> prime_divisors(std::int64_t n)
{
    std::vector<std::int64_t> out;
    for (auto [p, e] : factorize(n)) out.push_back(p);
    return out;
}

cplx b_local_inverse(cplx s, double p)
{
    return 1.0 / (1.0 + 1.0 / ((p - 1.0) * std::pow(p, s + 1.0)));
}

}  // namespace

const std::vector<std::int64_t>& cached_primes(std::int64_t n)
{
    static std::mutex m;
    static std::vector<std::int64_t> primes;
    static std::int64_t limit = 0;
    std::lock_guard<std::mutex> lk(m);
    if (n > limit) {
        limit = std::max<std::int64_t>(n, 2 * limit);
        primes = primes_upto(limit);
    }
    return primes;
}

ArithmeticConstant arithmetic_constant(std::int64_t p_max)
{
    if (p_max < 100) throw std::domain_error("arithmetic_constant: p_max must be at least 100");
    ArithmeticConstant c;
    c.p_max = p_max;
    const auto& primes = cached_primes(p_max);
    double logsum = 0.0;
    for (std::int64_t p : primes) {
        if (p > p_max) break;
        const double x = 1.0 / (double(p) * double(p));
        logsum += std::log1p(-x - x / double(p));
    }
    c.partial = std::exp(logsum);
    const double P = static_cast<double>(p_max);
    c.tail_bound = integer_tail(P, 2.0) + integer_tail(P, 3.0);
    const double xm = 1.0 / (P * P) + 1.0 / (P * P * P);
    c.lower = c.partial * std::exp(-c.tail_bound / (1.0 - xm));
    c.upper = c.partial;
    const double lp = std::log(P);
    const double est = boost::math::expint(1, lp) + boost::math::expint(1, 2.0 * lp);
    c.extrapolated = c.partial * std::exp(-est);
    return c;
}

EulerValue euler_B(cplx s, std::int64_t p_max)
{
    if (!(s.real() > -1.0)) throw std::domain_error("euler_B: requires Re s > -1");
    return euler_product([s](double p) { return 1.0 + 1.0 / ((p - 1.0) * std::pow(p, s + 1.0)); }, p_max,
                         s.real() + 2.0);
}

cplx euler_B1(cplx s, std::int64_t m)
{
    cplx r = 1.0;
    for (auto p : prime_divisors(m)) {
        const double dp = static_cast<double>(p);
        r *= (1.0 - std::pow(dp, -s - 1.0)) * b_local_inverse(s, dp);
    }
    return r;
}

cplx euler_B2(cplx s, std::int64_t c)
{
    cplx r = 1.0;
    for (auto p : prime_divisors(c)) r *= b_local_inverse(s, static_cast<double>(p));
    return r;
}

cplx euler_B3(cplx s, std::int64_t c)
{
    cplx r = 1.0;
    for (auto p : prime_divisors(c)) {
        const double dp = static_cast<double>(p);
        r *= 1.0 - b_local_inverse(s, dp) / (dp * (dp - 1.0));
    }
    return r;
}

cplx euler_B3_divisor_sum(cplx s, std::int64_t c)
{
    cplx r = 0.0;
    for (auto a : divisors(c)) {
        int mu = moebius_mu(a);
        if (mu == 0) continue;
        r += double(mu) * euler_B2(s, a) / (double(a) * double(euler_phi(a)));
    }
    return r;
}

cplx euler_B4(cplx s, std::int64_t P)
{
    cplx r = 1.0;
    for (auto p : prime_divisors(P)) {
        const double dp = static_cast<double>(p);
        r *= 1.0 - b_local_inverse(s, dp) / (dp - 1.0);
    }
    return r;
}

cplx euler_B4_divisor_sum(cplx s, std::int64_t P)
{
    cplx r = 0.0;
    for (auto l : divisors(P)) {
        int mu = moebius_mu(l);
        if (mu == 0) continue;
        r += double(mu) * euler_B2(s, l) / double(euler_phi(l));
    }
    return r;
}

EulerValue euler_B5(cplx s, std::int64_t p_max)
{
    if (!(s.real() < 1.5)) throw std::domain_error("euler_B5: requires Re s < 3/2");
    const double a = std::min(3.0 - s.real(), 4.0 - 2.0 * s.real());
    return euler_product(
        [s](double p) { return (1.0 + 1.0 / ((p - 1.0) * std::pow(p, 1.0 - s))) * (1.0 - std::pow(p, s - 2.0)); },
        p_max, a);
}

EulerValue euler_B6(cplx s, std::int64_t P, std::int64_t p_max)
{
    if (!(s.real() > 0.0)) throw std::domain_error("euler_B6: requires Re s > 0");
    return euler_product(
        [s](double p) {
            const auto ip = static_cast<std::int64_t>(p);
            return 1.0 - euler_B3(-s, ip) / (std::pow(p, s) * (p - 1.0));
        },
        p_max, s.real() + 1.0, P);
}

double diagonal_pair_integral(const EvenPiecewise& fa, const EvenPiecewise& fb)
{
    const double hi = std::min(fa.support(), fb.support());
    return integrate_product({&fa, &fb}, 0.0, hi, 1, [](double v) { return v; });
}

double permanent(const std::vector<std::vector<double>>& m)
{
    const int n = static_cast<int>(m.size());
    if (n == 0) return 1.0;
    if (n > 30) throw std::length_error("permanent: matrix too large");
    std::vector<double> rowsum(n, 0.0);
    double total = 0.0;
    std::uint64_t gray = 0;
    for (std::uint64_t k = 1; k < (std::uint64_t{1} << n); ++k) {
        std::uint64_t g = k ^ (k >> 1);
        std::uint64_t changed = g ^ gray;
        int j = __builtin_ctzll(changed);
        double sgn = (g & changed) ? 1.0 : -1.0;
        for (int i = 0; i < n; ++i) rowsum[i] += sgn * m[i][j];
        gray = g;
        double prod = 1.0;
        for (int i = 0; i < n; ++i) prod *= rowsum[i];
        total += (__builtin_popcountll(g) % 2 == n % 2 ? 1.0 : -1.0) * prod;
    }
    return total;
}

double permanent_brute_force(const std::vector<std::vector<double>>& m)
{
    const int n = static_cast<int>(m.size());
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    double total = 0.0;
    do {
        double prod = 1.0;
        for (int i = 0; i < n; ++i) prod *= m[i][perm[i]];
        total += prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

double pairing_sum(const std::vector<int>& S1, const std::vector<int>& S2, const std::vector<std::vector<double>>& M)
{
    if (S1.size() != S2.size()) return 0.0;
    std::vector<std::vector<double>> sub(S1.size(), std::vector<double>(S2.size()));
    for (std::size_t i = 0; i < S1.size(); ++i)
        for (std::size_t j = 0; j < S2.size(); ++j) sub[i][j] = M[S1[i]][S2[j]];
    return permanent(sub);
}

IntegralResult I_integral(const std::vector<int>& S12, const std::vector<int>& S22,
                          const std::vector<const EvenPiecewise*>& transforms, const OffDiagonalOptions& opt)
{
    if (S12.empty() || S22.empty()) throw std::domain_error("I_integral: both index sets must be nonempty");
    const int k = static_cast<int>(S12.size()), r = static_cast<int>(S22.size());
    // variables: positions 0..k-1 are alpha_1..alpha_k, k..k+r-1 are beta_1..beta_r
    std::vector<double> kap(k + r);
    std::vector<UnivariatePtr> g(k + r);
    for (int i = 0; i < k + r; ++i) {
        const EvenPiecewise* t = transforms.at(i < k ? S12[i] : S22[i - k]);
        kap[i] = t->support();
        g[i] = uni_piecewise(*t);
    }
    auto step = uni_step_above(1.0);
    auto lin = uni_affine(1.0, -1.0);
    IntegralResult total{0.0, 0.0, true, 0};

    for (int j1 = 0; j1 < k; ++j1) {
        for (int j2 = 0; j2 < r; ++j2) {
            const int pivot = k + j2;  // eliminated coordinate
            // zone of each variable: 1, 2, 3, or 0 for the two distinguished ones
            std::vector<int> zone(k + r, 0), members;
            for (int i = 0; i < j1; ++i) zone[i] = 1;
            for (int i = j1 + 1; i < k; ++i) zone[i] = 2;
            for (int i = 0; i < j2; ++i) zone[k + i] = 1;
            for (int i = j2 + 1; i < r; ++i) zone[k + i] = 3;
            for (int i = 0; i < k + r; ++i)
                if (zone[i]) members.push_back(i);
            // quick reachability: u_{alpha_j1} + u(T) <= kappa_{alpha_j1} + sum of zone-2 supports
            double reach = kap[j1];
            for (int i = j1 + 1; i < k; ++i) reach += kap[i];
            if (reach <= 1.0) continue;

            const int m = static_cast<int>(members.size());
            // free variables: all but the pivot, in order
            std::vector<int> freev;
            for (int i = 0; i < k + r; ++i)
                if (i != pivot) freev.push_back(i);
            const int d = static_cast<int>(freev.size());
            std::vector<int> pos(k + r, -1);
            for (int c = 0; c < d; ++c) pos[freev[c]] = c;

            // each member is T (bit set) or W (bit clear) within its zone
            for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
                std::vector<char> inT(k + r, 0);
                int w2 = 0, w3 = 0;
                for (int b = 0; b < m; ++b) {
                    const int i = members[b];
                    if (mask >> b & 1) inT[i] = 1;
                    else if (zone[i] == 2) ++w2;
                    else if (zone[i] == 3) ++w3;
                }
                std::vector<double> lo(d), hi(d);
                for (int c = 0; c < d; ++c) {
                    const int i = freev[c];
                    const bool neg = (zone[i] == 1 && inT[i]) || zone[i] == 3;
                    const bool posz = (zone[i] == 1 && !inT[i]) || zone[i] == 2;
                    lo[c] = posz ? 0.0 : -kap[i];
                    hi[c] = neg ? 0.0 : kap[i];
                }
                std::vector<Ridge> ridges;
                for (int c = 0; c < d; ++c) {
                    std::vector<double> a(d, 0.0);
                    a[c] = 1.0;
                    ridges.push_back({a, 0.0, g[freev[c]]});
                }
                // u_pivot = -sum of free; Fhat even so Fhat(-u_pivot) = Fhat(sum)
                ridges.push_back({std::vector<double>(d, 1.0), 0.0, g[pivot]});
                std::vector<double> c1(d, 0.0);
                c1[pos[j1]] = 1.0;
                for (int i = 0; i < k + r; ++i)
                    if (inT[i]) c1[pos[i]] = 1.0;
                ridges.push_back({c1, 0.0, step});
                ridges.push_back({c1, 0.0, lin});
                auto res = integrate_ridges(ridges, lo, hi, opt.ridge);
                const int sign_exp = (j1 + 1) + r + w2 + w3;
                const double sgn = sign_exp % 2 ? -1.0 : 1.0;
                total.value += sgn * res.value;
                total.error += res.error;
                total.exact = total.exact && res.exact;
                total.evaluations += res.evaluations;
            }
        }
    }
    return total;
}

MainTermReport main_term(const C4Family& family, const OffDiagonalOptions& opt)
{
    auto chk = check_c4(family);
    if (!chk.ok) throw std::domain_error("main_term: " + chk.message);
    MainTermReport rep;
    const int n = family.n();
    if (n == 0) {
        rep.total = 1.0;
        return rep;
    }
    for (const auto& G : enumerate_partitions(n)) {
        PartitionTerm pt;
        pt.partition = G.to_string();
        pt.mu = moebius_from_bottom(G);
        const int nu = G.num_blocks();
        std::vector<ProductTestFunction> F;
        for (const auto& b : G.blocks) F.push_back(product_for_block(family, b));
        std::vector<const EvenPiecewise*> tr;
        for (const auto& f : F) {
            tr.push_back(&f.fhat());
            pt.kappa.push_back(f.kappa());
        }
        std::vector<std::vector<double>> M(nu, std::vector<double>(nu));
        for (int a = 0; a < nu; ++a)
            for (int b = 0; b < nu; ++b) M[a][b] = diagonal_pair_integral(*tr[a], *tr[b]);
        std::map<std::pair<std::vector<int>, std::vector<int>>, IntegralResult> memo;
        auto I = [&](const std::vector<int>& a, const std::vector<int>& b) {
            auto key = std::make_pair(a, b);
            auto it = memo.find(key);
            if (it == memo.end()) it = memo.emplace(key, I_integral(a, b, tr, opt)).first;
            return it->second;
        };
        int total3 = 1;
        for (int i = 0; i < nu; ++i) total3 *= 3;
        for (int code = 0; code < total3; ++code) {
            SplitTerm st;
            int c = code;
            for (int l = 0; l < nu; ++l, c /= 3) {
                if (c % 3 == 0) st.S1.push_back(l);
                else if (c % 3 == 1) st.S2.push_back(l);
                else st.S3.push_back(l);
            }
            for (int l : st.S3) st.f0_product *= F[l].fhat(0.0);
            st.diagonal = pairing_sum(st.S1, st.S2, M);
            const int a = static_cast<int>(st.S1.size()), b = static_cast<int>(st.S2.size());
            double off = 0.0;
            for (int m1 = 1; m1 < (1 << a); ++m1) {
                for (int m2 = 1; m2 < (1 << b); ++m2) {
                    std::vector<int> S11, S12, S21, S22;
                    for (int i = 0; i < a; ++i) (m1 >> i & 1 ? S12 : S11).push_back(st.S1[i]);
                    for (int i = 0; i < b; ++i) (m2 >> i & 1 ? S22 : S21).push_back(st.S2[i]);
                    if (S11.size() != S21.size()) continue;
                    const double perm = pairing_sum(S11, S21, M);
                    if (perm == 0.0) continue;
                    auto res = I(S12, S22);
                    off += res.value * perm;
                    st.error += std::abs(perm) * res.error;
                    rep.exact = rep.exact && res.exact;
                }
            }
            st.off_diagonal = ((a + b) % 2 ? -1.0 : 1.0) * off;
            st.error *= std::abs(st.f0_product);
            pt.diagonal += st.f0_product * st.diagonal;
            pt.off_diagonal += st.f0_product * st.off_diagonal;
            pt.error += st.error;
            pt.splits.push_back(std::move(st));
        }
        rep.total += static_cast<double>(pt.mu) * (pt.diagonal + pt.off_diagonal);
        rep.error += std::abs(static_cast<double>(pt.mu)) * pt.error;
        rep.partitions.push_back(std::move(pt));
    }
    return rep;
}

nlohmann::json to_json(const MainTermReport& r)
{
    nlohmann::json j;
    j["total"] = r.total;
    j["error"] = r.error;
    j["exact"] = r.exact;
    j["partitions"] = nlohmann::json::array();
    for (const auto& p : r.partitions) {
        nlohmann::json jp;
        jp["partition"] = p.partition;
        jp["mu"] = p.mu;
        jp["kappa"] = p.kappa;
        jp["diagonal"] = p.diagonal;
        jp["off_diagonal"] = p.off_diagonal;
        jp["error"] = p.error;
        jp["splits"] = nlohmann::json::array();
        for (const auto& s : p.splits) {
            if (s.diagonal == 0.0 && s.off_diagonal == 0.0) continue;
            jp["splits"].push_back({{"S1", s.S1},
                                    {"S2", s.S2},
                                    {"S3", s.S3},
                                    {"f0_product", s.f0_product},
                                    {"diagonal", s.diagonal},
                                    {"off_diagonal", s.off_diagonal},
                                    {"error", s.error}});
        }
        j["partitions"].push_back(jp);
    }
    return j;
}

double prime_diagonal_sum(const EvenPiecewise& fa, const EvenPiecewise& fb, double Q,
                          const std::vector<std::int64_t>& excluded)
{
    if (!(Q >= 10.0)) throw std::domain_error("prime_diagonal_sum: Q must be at least 10");
    const double L = std::log(Q);
    const double kmin = std::min(fa.support(), fb.support());
    const auto pmax = static_cast<std::int64_t>(std::floor(std::exp(kmin * L) * (1.0 + 1e-12)));
    double s = 0.0;
    for (std::int64_t p : cached_primes(pmax)) {
        if (p > pmax) break;
        if (std::find(excluded.begin(), excluded.end(), p) != excluded.end()) continue;
        const double lp = std::log(double(p));
        s += lp * lp / double(p) * fa(-lp / L) * fb(lp / L);
    }
    return s;
}

ContourCheck contour_identity_check(const ProductTestFunction& F, std::complex<double> w1,
                                    std::complex<double> w2, double delta, double y_max)
{
    const double d1 = w1.real(), d2 = w2.real();
    if (!(d1 < d2)) throw std::domain_error("contour_identity_check: need Re w1 < Re w2");
    if (std::abs(delta - d1) < 1e-9 || std::abs(delta - d2) < 1e-9)
        throw std::domain_error("contour_identity_check: delta lies on a pole line");
    ContourCheck c;
    c.which_case = delta < d1 ? 1 : (delta < d2 ? 2 : 3);
    const bool zero = F.fhat().is_zero();
    if (zero) return c;
    // z = delta + i y, dz = i dy
    std::vector<double> br;
    for (double y = -y_max; y <= y_max + 1e-9; y += 0.25) br.push_back(y);
    const QuadRule& rule = gauss_legendre(16);
    std::complex<double> lhs = 0.0;
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        const double c0 = 0.5 * (br[k] + br[k + 1]), h = 0.5 * (br[k + 1] - br[k]);
        for (std::size_t q = 0; q < rule.x.size(); ++q) {
            std::complex<double> z(delta, c0 + h * rule.x[q]);
            lhs += rule.w[q] * h * F.f(std::complex<double>(0.0, 1.0) * z) * (1.0 / (z - w1) - 1.0 / (z - w2));
        }
    }
    c.lhs = lhs / (2.0 * kPi);
    // int over u of Fhat(-u) exp(-2 pi u w) on (-inf,0] or [0,inf)
    auto half = [&](std::complex<double> w, bool positive) {
        std::vector<double> b;
        for (double x : F.fhat().breaks()) b.push_back(positive ? x : -x);
        std::sort(b.begin(), b.end());
        std::complex<double> s = 0.0;
        const QuadRule& r = gauss_legendre(40);
        for (std::size_t k = 0; k + 1 < b.size(); ++k) {
            const double c0 = 0.5 * (b[k] + b[k + 1]), h = 0.5 * (b[k + 1] - b[k]);
            for (std::size_t q = 0; q < r.x.size(); ++q) {
                const double u = c0 + h * r.x[q];
                s += r.w[q] * h * F.fhat(-u) * std::exp(-2.0 * kPi * u * w);
            }
        }
        return s;
    };
    switch (c.which_case) {
    case 1: c.rhs = half(w2, true) - half(w1, true); break;
    case 2: c.rhs = half(w1, false) + half(w2, true); break;
    default: c.rhs = half(w1, false) - half(w2, false); break;
    }
    c.residual = std::abs(c.lhs - c.rhs);
    return c;
}

}  // namespace nlevel
