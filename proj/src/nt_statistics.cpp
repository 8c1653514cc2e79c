#include "nlevel/nt_statistics.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/hermite.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

#include "nlevel/arith.hpp"
#include "nlevel/partition_lattice.hpp"
#include "nlevel/prediction.hpp"
#include "nlevel/quadrature.hpp"

namespace nlevel {

namespace {

constexpr double kPi = std::numbers::pi;

double zero_density(double q, double g) { return std::log(std::max(2.0, q * std::abs(g) / (2.0 * kPi))) / (2.0 * kPi); }

// expected |sum| over zeros with |gamma| > T of env(U (gamma - t)), both signs
double tail_of(const TestFunction& f, double q, double U, double T, double t)
{
    if (T <= std::abs(t)) return INFINITY;
    boost::math::quadrature::exp_sinh<double> es;
    auto g = [&](double x) { return f.envelope(U * (T + x - std::abs(t))) * zero_density(q, T + x); };
    return 2.0 * es.integrate(g);
}

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn fn)
{
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < std::max(1, workers); ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
}

}  // namespace

WeightFunction::WeightFunction(std::string name, std::function<double(double)> w)
    : name_(std::move(name)), w_(std::move(w))
{
}

WeightFunction WeightFunction::bump()
{
    return WeightFunction("bump", [](double x) { return std::exp(-1.0 / ((x - 1.0) * (2.0 - x))); });
}

double WeightFunction::mellin(double s) const
{
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate([&](double x) { return (*this)(x) * std::pow(x, s - 1.0); }, 1.0, 2.0, 1e-12);
}

std::vector<std::int64_t> family_moduli(const WeightFunction& W, double Q)
{
    std::vector<std::int64_t> out;
    for (auto q = static_cast<std::int64_t>(std::ceil(Q)); q <= static_cast<std::int64_t>(std::floor(2.0 * Q)); ++q)
        if (q >= 3 && W(q / Q) > 0.0 && phi_star(q) > 0) out.push_back(q);
    return out;
}

double d_weight_exact(const WeightFunction& W, double Q)
{
    if (!(Q >= 2.0)) throw std::domain_error("d_weight_exact: Q must be at least 2");
    double s = 0.0;
    for (auto q : family_moduli(W, Q)) s += W(q / Q) * double(phi_star(q)) / double(euler_phi(q));
    return std::sqrt(kPi) * s;
}

double d_weight_asymptotic(const WeightFunction& W, double Q)
{
    if (!(Q >= 2.0)) throw std::domain_error("d_weight_asymptotic: Q must be at least 2");
    static const double A = arithmetic_constant(10'000'000).extrapolated;
    return std::sqrt(kPi) * W.mellin(1.0) * Q * A;
}

MissingZerosError::MissingZerosError(const std::string& lab, double h, double n)
    : std::runtime_error("zeros for " + lab + " cover height " + std::to_string(h) + ", need " + std::to_string(n)),
      label(lab), have(h), need(n)
{
}

const ZeroTable& ZeroSource::at(const DirichletCharacter& chi, double needed) const
{
    auto it = tables.find(chi.label());
    if (it == tables.end()) throw MissingZerosError(chi.label(), 0.0, needed);
    if (it->second.height_max < needed) throw MissingZerosError(chi.label(), it->second.height_max, needed);
    return it->second;
}

ZeroSource build_zero_source(const WeightFunction& W, double Q, double T, int workers, ZeroCache* cache)
{
    std::vector<DirichletCharacter> chars;
    for (auto q : family_moduli(W, Q))
        for (const auto& c : enumerate_primitive(q)) chars.push_back(c);
    ZeroSource src;
    src.height = T;
    for (auto& t : zero_tables(chars, T, workers, cache)) src.tables.emplace(t.label, std::move(t));
    return src;
}

double required_zero_height(const C4Family& f, double Q, double shift, double tol)
{
    const double U = std::log(Q) / (2.0 * kPi);
    auto worst = [&](double T) {
        double m = 0.0;
        for (const auto& g : f.functions) m = std::max(m, g.envelope(U * (T - shift)));
        return m * zero_density(2.0 * Q, T);
    };
    double lo = shift + 1.0, hi = shift + 1.0;
    while (worst(hi) > tol && hi < 1e9) hi *= 2.0;
    for (int i = 0; i < 100 && hi - lo > 1e-6 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (worst(mid) > tol ? lo : hi) = mid;
    }
    return hi;
}

double sharp_sum(const C4Family& f, const std::vector<double>& gamma, double U, double t)
{
    const int n = f.n();
    if (n > 16) throw std::length_error("sharp_sum: too many factors");
    // subset sums over zeros of prod_{i in S} f_i
    std::vector<double> subset(std::size_t{1} << n, 0.0);
    std::vector<double> v(n);
    std::vector<double> prod(std::size_t{1} << n);
    for (double g : gamma) {
        for (int i = 0; i < n; ++i) v[i] = f.functions[i].f(U * (g - t));
        prod[0] = 1.0;
        for (std::size_t m = 1; m < prod.size(); ++m) {
            const int low = __builtin_ctzll(m);
            prod[m] = prod[m & (m - 1)] * v[low];
            subset[m] += prod[m];
        }
    }
    return sieve_product_sum<double>(n, [&](const std::vector<int>& block) {
        std::size_t m = 0;
        for (int i : block) m |= std::size_t{1} << i;
        return subset[m];
    });
}

double sharp_sum_brute(const C4Family& f, const std::vector<double>& gamma, double U, double t)
{
    const int n = f.n();
    const int Z = static_cast<int>(gamma.size());
    std::vector<int> idx(n, 0);
    double total = 0.0;
    if (Z < n) return 0.0;
    while (true) {
        bool distinct = true;
        for (int a = 0; a < n && distinct; ++a)
            for (int b = a + 1; b < n; ++b)
                if (idx[a] == idx[b]) {
                    distinct = false;
                    break;
                }
        if (distinct) {
            double p = 1.0;
            for (int i = 0; i < n; ++i) p *= f.functions[i].f(U * (gamma[idx[i]] - t));
            total += p;
        }
        int i = n - 1;
        for (; i >= 0; --i) {
            if (++idx[i] < Z) break;
            idx[i] = 0;
        }
        if (i < 0) break;
    }
    return total;
}

namespace {

struct CharTerm {
    double value = 0.0, value_coarse = 0.0, tail = 0.0;
    std::int64_t zeros = 0;
};

StatisticResult statistic(const C4Family& f, const WeightFunction& W, double Q, const ZeroSource& zeros,
                          const std::vector<double>& nodes, const std::vector<double>& weights,
                          const std::vector<double>& nodes_c, const std::vector<double>& weights_c, int workers)
{
    auto chk = check_c4(f);
    if (!chk.ok) throw std::domain_error("statistic: " + chk.message);
    const double U = std::log(Q) / (2.0 * kPi);
    std::vector<std::pair<DirichletCharacter, double>> chars;
    for (auto q : family_moduli(W, Q)) {
        const double c = W(q / Q) / double(euler_phi(q));
        for (const auto& chi : enumerate_primitive(q)) chars.push_back({chi, c});
    }
    std::vector<CharTerm> terms(chars.size());
    parallel_for(chars.size(), workers, [&](std::size_t i) {
        const auto& [chi, c] = chars[i];
        const ZeroTable& z = zeros.at(chi, zeros.height);
        CharTerm& ct = terms[i];
        ct.zeros = static_cast<std::int64_t>(z.zeros.size());
        const double T = z.height_max;
        auto at = [&](double t) { return sharp_sum(f, z.zeros, U, t); };
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            ct.value += weights[k] * at(nodes[k]);
            // tail: one factor beyond T, the others summed over all zeros
            double tail = 0.0;
            for (int a = 0; a < f.n(); ++a) {
                double p = tail_of(f.functions[a], double(chi.q()), U, T, nodes[k]);
                for (int b = 0; b < f.n(); ++b) {
                    if (b == a) continue;
                    double s = tail_of(f.functions[b], double(chi.q()), U, T, nodes[k]);
                    for (double g : z.zeros) s += std::abs(f.functions[b].f(U * (g - nodes[k])));
                    p *= s;
                }
                tail += p;
            }
            ct.tail += weights[k] * tail;
        }
        for (std::size_t k = 0; k < nodes_c.size(); ++k) ct.value_coarse += weights_c[k] * at(nodes_c[k]);
        ct.value *= c;
        ct.value_coarse *= c;
        ct.tail *= c;
    });
    StatisticResult r;
    r.Q = Q;
    r.n = f.n();
    for (const auto& g : f.functions) r.family.push_back(g.spec());
    r.zero_height = zeros.height;
    r.characters = static_cast<std::int64_t>(chars.size());
    double coarse = 0.0;
    for (const auto& t : terms) {
        r.value += t.value;
        coarse += t.value_coarse;
        r.tail_estimate += t.tail;
        r.zeros_used += t.zeros;
    }
    r.quadrature_error = nodes_c.empty() ? 0.0 : std::abs(r.value - coarse);
    return r;
}

// Gauss-Hermite nodes with weights below 1e-17 of the largest dropped
void hermite_nodes(int order, std::vector<double>& x, std::vector<double>& w)
{
    const auto rule = gauss_hermite(order);
    const double wmax = *std::max_element(rule.w.begin(), rule.w.end());
    x.clear();
    w.clear();
    for (std::size_t i = 0; i < rule.x.size(); ++i)
        if (rule.w[i] > 1e-17 * wmax) {
            x.push_back(rule.x[i]);
            w.push_back(rule.w[i]);
        }
}

}  // namespace

nlohmann::json to_json(const StatisticResult& r)
{
    return {{"experiment_id", r.experiment_id},
            {"Q", r.Q},
            {"n", r.n},
            {"value", r.value},
            {"diagnostics",
             {{"statistic", r.statistic},
              {"family", r.family},
              {"t_nodes", r.t_nodes},
              {"quadrature_error", r.quadrature_error},
              {"zero_height", r.zero_height},
              {"tail_estimate", r.tail_estimate},
              {"characters", r.characters},
              {"zeros_used", r.zeros_used}}}};
}

StatisticResult l0_statistic(const C4Family& f, const WeightFunction& W, double Q, const ZeroSource& zeros, int workers)
{
    auto r = statistic(f, W, Q, zeros, {0.0}, {1.0}, {}, {}, workers);
    r.statistic = "L0";
    return r;
}

StatisticResult l1_statistic(const C4Family& f, const WeightFunction& W, double Q, const ZeroSource& zeros, int order,
                             int workers)
{
    if (order < 2) throw std::domain_error("l1_statistic: Gauss-Hermite order must be at least 2");
    std::vector<double> x, w, xc, wc;
    hermite_nodes(order, x, w);
    hermite_nodes(std::max(2, order / 2), xc, wc);
    auto r = statistic(f, W, Q, zeros, x, w, xc, wc, workers);
    r.statistic = "L1";
    r.t_nodes = static_cast<int>(x.size());
    return r;
}

// ------------------------------------------------------------ large sieve object

namespace {

// products of ordered tuples of distinct primes with their coefficient
std::map<std::int64_t, double> tuple_coefficients(const std::vector<const EvenPiecewise*>& fs, double sign,
                                                  std::int64_t P, double Q, const AlsOptions& opt)
{
    const double L = std::log(Q);
    std::vector<std::vector<std::pair<std::int64_t, double>>> cand(fs.size());
    for (std::size_t j = 0; j < fs.size(); ++j) {
        const auto pmax = static_cast<std::int64_t>(std::floor(std::exp(fs[j]->support() * L) * (1 + 1e-12)));
        for (auto p : primes_upto(std::max<std::int64_t>(pmax, 1))) {
            if (P % p == 0) continue;
            const double lp = std::log(double(p));
            const double c = lp * (*fs[j])(sign * lp / L);
            if (c != 0.0) cand[j].push_back({p, c});
        }
    }
    std::map<std::int64_t, double> out;
    std::size_t visited = 0;
    std::vector<std::int64_t> used;
    std::function<void(std::size_t, std::int64_t, double)> rec = [&](std::size_t j, std::int64_t m, double c) {
        if (j == fs.size()) {
            out[m] += c;
            return;
        }
        for (auto [p, w] : cand[j]) {
            if (std::find(used.begin(), used.end(), p) != used.end()) continue;
            if (++visited > opt.max_tuples) throw std::length_error("als_sum_exact: prime tuple enumeration exceeds the memory guard");
            used.push_back(p);
            rec(j + 1, m * p, c * w);
            used.pop_back();
        }
    };
    if (!fs.empty()) rec(0, 1, 1.0);
    return out;
}

}  // namespace

double als_sum_exact(std::int64_t P, int k, int r, const std::vector<const EvenPiecewise*>& transforms,
                     const WeightFunction& W, double Q, const AlsOptions& opt)
{
    if (k < 1 || r < 1 || static_cast<int>(transforms.size()) != k + r)
        throw std::domain_error("als_sum_exact: need k, r >= 1 and k + r transforms");
    if (!is_squarefree(P)) throw std::domain_error("als_sum_exact: P must be squarefree");
    std::vector<const EvenPiecewise*> fa(transforms.begin(), transforms.begin() + k), fb(transforms.begin() + k, transforms.end());
    const auto A = tuple_coefficients(fa, -1.0, P, Q, opt);
    const auto B = tuple_coefficients(fb, 1.0, P, Q, opt);
    if (A.empty() || B.empty()) return 0.0;
    // per modulus: weight and the divisor expansion of the primitive-character sum
    struct Mod {
        std::int64_t q;
        double c;
        std::vector<std::pair<std::int64_t, double>> d;  // d | q with phi(d) mu(q/d) != 0
    };
    std::vector<Mod> mods;
    for (auto q = static_cast<std::int64_t>(std::ceil(Q)); q <= static_cast<std::int64_t>(std::floor(2 * Q)); ++q) {
        if (std::gcd(q, P) != 1 || !(W(q / Q) > 0.0)) continue;
        Mod m{q, W(q / Q) / double(euler_phi(q)), {}};
        for (auto d : divisors(q)) {
            const int mu = moebius_mu(q / d);
            if (mu != 0) m.d.push_back({d, double(mu) * double(euler_phi(d))});
        }
        mods.push_back(std::move(m));
    }
    const double sqpi = std::sqrt(kPi);
    double total = 0.0;
    for (const auto& [m, a] : A) {
        for (const auto& [n, b] : B) {
            if (std::gcd(m, n) != 1) continue;
            const double diff = static_cast<double>(std::llabs(m - n));
            double C = 0.0;
            for (const auto& md : mods) {
                if (std::gcd(md.q, m * n) != 1) continue;
                double s = 0.0;
                for (auto [d, w] : md.d)
                    if (std::fmod(diff, double(d)) == 0.0) s += w;
                C += md.c * s;
            }
            if (C == 0.0) continue;
            const double lr = std::log(double(n) / double(m));
            total += a * b / std::sqrt(double(m) * double(n)) * sqpi * std::exp(-0.25 * lr * lr) * C;
        }
    }
    return total;
}

double als_sum_brute(std::int64_t P, int k, int r, const std::vector<const EvenPiecewise*>& transforms,
                     const WeightFunction& W, double Q)
{
    const double L = std::log(Q);
    std::vector<std::vector<std::int64_t>> primes(k + r);
    for (int j = 0; j < k + r; ++j)
        primes[j] = primes_upto(static_cast<std::int64_t>(std::floor(std::exp(transforms[j]->support() * L) * (1 + 1e-12))));
    double total = 0.0;
    for (auto q = static_cast<std::int64_t>(std::ceil(Q)); q <= static_cast<std::int64_t>(std::floor(2 * Q)); ++q) {
        if (std::gcd(q, P) != 1 || !(W(q / Q) > 0.0) || q < 3) continue;
        const double wq = W(q / Q) / double(euler_phi(q));
        for (const auto& chi : enumerate_primitive(q)) {
            const auto v = chi.values();
            std::vector<std::int64_t> tuple(k + r);
            std::function<void(int)> rec = [&](int j) {
                if (j == k + r) {
                    std::int64_t m = 1, n = 1;
                    double c = 1.0;
                    for (int i = 0; i < k + r; ++i) {
                        const double lp = std::log(double(tuple[i]));
                        c *= lp * (*transforms[i])((i < k ? -1.0 : 1.0) * lp / L);
                        (i < k ? m : n) *= tuple[i];
                    }
                    if (c == 0.0) return;
                    const double lr = std::log(double(n) / double(m));
                    const std::complex<double> chis = v[m % q] * std::conj(v[n % q]);
                    total += wq * c / std::sqrt(double(m) * double(n)) * std::sqrt(kPi) * std::exp(-0.25 * lr * lr) * chis.real();
                    return;
                }
                for (auto p : primes[j]) {
                    if (P % p == 0) continue;
                    // distinct primes: squarefree m and n and (m, n) = 1
                    if (std::find(tuple.begin(), tuple.begin() + j, p) != tuple.begin() + j) continue;
                    tuple[j] = p;
                    rec(j + 1);
                }
            };
            rec(0);
        }
    }
    return total;
}

std::complex<double> gaussian_fourier_moment(int j, double xi)
{
    if (j < 0 || j > 12) throw std::domain_error("gaussian_fourier_moment: need 0 <= j <= 12");
    std::complex<double> ij = std::pow(std::complex<double>(0.0, 0.5), j);
    return std::sqrt(kPi) * ij * boost::math::hermite(static_cast<unsigned>(j), 0.5 * xi) * std::exp(-0.25 * xi * xi);
}

}  // namespace nlevel
