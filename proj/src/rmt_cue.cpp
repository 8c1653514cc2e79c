#include "nlevel/rmt_cue.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "nlevel/partition_lattice.hpp"
#include "nlevel/quadrature.hpp"

namespace nlevel {

namespace {

constexpr double kPi = std::numbers::pi;

// permutations of 0..n-1 as cycle lists, with sign
struct CycleType {
    std::vector<std::vector<int>> cycles;
    int sign = 1;
};

std::vector<CycleType> all_cycle_types(int n)
{
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::vector<CycleType> out;
    do {
        CycleType ct;
        std::vector<char> seen(n, 0);
        for (int i = 0; i < n; ++i) {
            if (seen[i]) continue;
            std::vector<int> c;
            for (int j = i; !seen[j]; j = p[j]) {
                seen[j] = 1;
                c.push_back(j);
            }
            if (c.size() % 2 == 0) ct.sign = -ct.sign;
            ct.cycles.push_back(std::move(c));
        }
        out.push_back(std::move(ct));
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

double sinc_pi(double d) { return d == 0.0 ? 1.0 : std::sin(kPi * d) / (kPi * d); }

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

double sine_kernel(double x, double y) { return sinc_pi(x - y); }

EigenangleSample sample_cue(int N, std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
{
    if (N < 2 || N > 200) throw std::domain_error("sample_cue: need 2 <= N <= 200");
    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq sq{lo(seed), hi(seed), lo(stream), hi(stream), lo(index), hi(index)};
    std::mt19937_64 rng(sq);
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    Eigen::MatrixXcd Z(N, N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) Z(i, j) = {g(rng), g(rng)};
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Z);
    Eigen::MatrixXcd U = qr.householderQ();
    const auto& R = qr.matrixQR();
    for (int j = 0; j < N; ++j) {
        const auto d = R(j, j);
        U.col(j) *= d / std::abs(d);
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(U, false);
    EigenangleSample s{N, {}, seed, stream, index};
    for (int i = 0; i < N; ++i) {
        double a = std::arg(es.eigenvalues()(i));
        if (a >= kPi) a = -kPi;
        s.angles.push_back(a);
    }
    std::sort(s.angles.begin(), s.angles.end());
    return s;
}

CueStream::CueStream(int N, std::uint64_t seed, std::uint64_t stream) : N_(N), seed_(seed), stream_(stream) {}

EigenangleSample CueStream::next() { return sample_cue(N_, seed_, stream_, count_++); }

double star_statistic(const std::function<double(const std::vector<double>&)>& f, const EigenangleSample& s, int n)
{
    const int N = static_cast<int>(s.angles.size());
    if (n > N) return 0.0;
    std::vector<double> x(N);
    for (int j = 0; j < N; ++j) x[j] = N * s.angles[j] / (2 * kPi);
    std::vector<double> arg(n);
    if (n == 1) {
        double t = 0.0;
        for (int j = 0; j < N; ++j) t += f({x[j]});
        return t;
    }
    if (n == 2) {
        double t = 0.0;
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
                if (a != b) t += f({x[a], x[b]});
        return t;
    }
    return sieve_distinct_sum<double>(
        n,
        [&](std::span<const int> idx) {
            for (int i = 0; i < n; ++i) arg[i] = x[idx[i]];
            return f(arg);
        },
        N);
}

double star_statistic(const C4Family& f, const EigenangleSample& s)
{
    const int N = static_cast<int>(s.angles.size()), n = f.n();
    if (n > N) return 0.0;
    std::vector<std::vector<double>> v(n, std::vector<double>(N));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < N; ++j) v[i][j] = f.functions[i].f(N * s.angles[j] / (2 * kPi));
    return sieve_product_sum<double>(n, [&](const std::vector<int>& block) {
        double t = 0.0;
        for (int j = 0; j < N; ++j) {
            double p = 1.0;
            for (int i : block) p *= v[i][j];
            t += p;
        }
        return t;
    });
}

double w_n(const std::vector<double>& x)
{
    const int n = static_cast<int>(x.size());
    if (n == 0) return 1.0;
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) K(i, j) = sine_kernel(x[i], x[j]);
    return K.partialPivLu().determinant();
}

// ------------------------------------------------------------ finite-N density

namespace {

double finite_n_nystrom(const C4Family& f, int N, int order, double panel)
{
    const int n = f.n();
    const QuadRule& rule = gauss_legendre(order);
    std::vector<double> x, w;
    const int panels = static_cast<int>(std::ceil(N / panel));
    const double h = double(N) / panels;
    for (int p = 0; p < panels; ++p) {
        const double c = -0.5 * N + (p + 0.5) * h;
        for (std::size_t q = 0; q < rule.x.size(); ++q) {
            x.push_back(c + 0.5 * h * rule.x[q]);
            w.push_back(0.5 * h * rule.w[q]);
        }
    }
    const int G = static_cast<int>(x.size());
    Eigen::MatrixXd K(G, G);
    for (int a = 0; a < G; ++a)
        for (int b = 0; b < G; ++b) {
            const double d = x[a] - x[b];
            K(a, b) = d == 0.0 ? 1.0 : std::sin(kPi * d) / (N * std::sin(kPi * d / N));
        }
    std::vector<Eigen::VectorXd> D(n, Eigen::VectorXd(G));
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < G; ++a) D[i](a) = w[a] * f.functions[i].f(x[a]);
    std::map<std::vector<int>, double> memo;
    auto cycle = [&](const std::vector<int>& c) {
        auto it = memo.find(c);
        if (it != memo.end()) return it->second;
        double v;
        if (c.size() == 1) {
            v = D[c[0]].sum();
        } else {
            // trace(D_c0 K D_c1 K ... D_cL K)
            Eigen::MatrixXd A = D[c[0]].asDiagonal() * K;
            for (std::size_t m = 1; m + 1 < c.size(); ++m) A = A * (D[c[m]].asDiagonal() * K);
            Eigen::MatrixXd B = D[c.back()].asDiagonal() * K;
            v = A.cwiseProduct(B.transpose()).sum();
        }
        memo.emplace(c, v);
        return v;
    };
    double total = 0.0;
    for (const auto& ct : all_cycle_types(n)) {
        double p = ct.sign;
        for (auto c : ct.cycles) {
            std::rotate(c.begin(), std::min_element(c.begin(), c.end()), c.end());
            p *= cycle(c);
        }
        total += p;
    }
    return total;
}

}  // namespace

DensityResult finite_n_density(const C4Family& f, int N)
{
    if (f.n() < 1 || N < f.n()) throw std::domain_error("finite_n_density: need 1 <= n <= N");
    if (f.n() > 6) throw std::length_error("finite_n_density: n above 6 exceeds the quadrature budget");
    const double fine = finite_n_nystrom(f, N, 12, 0.5);
    const double coarse = finite_n_nystrom(f, N, 8, 0.5);
    return {fine, std::abs(fine - coarse)};
}

DensityResult integral_f_wn(const C4Family& f, const RidgeIntegralOptions& opt)
{
    const int n = f.n();
    if (n > 6) throw std::length_error("integral_f_wn: n above 6 is not supported");
    std::vector<UnivariatePtr> g(n);
    for (int i = 0; i < n; ++i) g[i] = uni_piecewise(f.functions[i].fhat());
    auto pos = uni_step_above(0.0);
    auto below1 = uni_step_below(1.0);
    auto one_minus = uni_affine(1.0, -1.0);
    std::map<std::vector<int>, IntegralResult> memo;
    // int_{sum u = 0} prod fhat_{c_m}(u_m) (1 - range of partial sums)_+
    auto cycle = [&](const std::vector<int>& c) {
        auto it = memo.find(c);
        if (it != memo.end()) return it->second;
        const int L = static_cast<int>(c.size());
        IntegralResult res{0.0, 0.0, true, 0};
        if (L == 1) {
            res.value = f.functions[c[0]].fhat(0.0);
        } else {
            const int d = L - 1;
            std::vector<double> lo(d), hi(d);
            std::vector<Ridge> base;
            for (int m = 0; m < d; ++m) {
                const double k = f.functions[c[m + 1]].fhat().support();
                lo[m] = -k;
                hi[m] = k;
                std::vector<double> a(d, 0.0);
                a[m] = 1.0;
                base.push_back({a, 0.0, g[c[m + 1]]});
            }
            base.push_back({std::vector<double>(d, 1.0), 0.0, g[c[0]]});
            // partial sums s_0 = 0, s_m = u_1 + ... + u_m
            auto s = [&](int m) {
                std::vector<double> a(d, 0.0);
                for (int i = 0; i < m; ++i) a[i] = 1.0;
                return a;
            };
            std::vector<int> order(L);
            std::iota(order.begin(), order.end(), 0);
            do {
                auto ridges = base;
                for (int j = 0; j + 1 < L; ++j) {
                    auto a = s(order[j + 1]), b = s(order[j]);
                    for (int i = 0; i < d; ++i) a[i] -= b[i];
                    ridges.push_back({a, 0.0, pos});
                }
                auto rg = s(order[L - 1]), b = s(order[0]);
                for (int i = 0; i < d; ++i) rg[i] -= b[i];
                ridges.push_back({rg, 0.0, below1});
                ridges.push_back({rg, 0.0, one_minus});
                auto r = integrate_ridges(ridges, lo, hi, opt);
                res.value += r.value;
                res.error += r.error;
                res.exact = res.exact && r.exact;
                res.evaluations += r.evaluations;
            } while (std::next_permutation(order.begin(), order.end()));
        }
        memo.emplace(c, res);
        return res;
    };
    DensityResult out;
    for (const auto& ct : all_cycle_types(n)) {
        double p = ct.sign, err = 0.0;
        for (auto c : ct.cycles) {
            std::rotate(c.begin(), std::min_element(c.begin(), c.end()), c.end());
            const auto r = cycle(c);
            // first-order propagation of the cycle errors
            err = err * std::abs(r.value) + std::abs(p) * r.error;
            p *= r.value;
        }
        out.value += p;
        out.error += err;
    }
    return out;
}

// ------------------------------------------------------------ J terms

double j0_term(const std::vector<int>& S1, const std::vector<int>& S2, const std::vector<std::vector<double>>& M)
{
    return pairing_sum(S1, S2, M);
}

IntegralResult J_integral(const std::vector<int>& S12, const std::vector<int>& S22,
                          const std::vector<const EvenPiecewise*>& transforms, const RidgeIntegralOptions& opt)
{
    if (S12.empty() || S22.empty()) throw std::domain_error("J_integral: both index sets must be nonempty");
    const int k = static_cast<int>(S12.size()), r = static_cast<int>(S22.size());
    std::vector<double> kap(k + r);
    std::vector<UnivariatePtr> g(k + r);
    for (int i = 0; i < k + r; ++i) {
        const EvenPiecewise* t = transforms.at(i < k ? S12[i] : S22[i - k]);
        kap[i] = t->support();
        g[i] = uni_piecewise(*t);
    }
    auto below = uni_step_below(-1.0);
    auto lin = uni_affine(1.0, 1.0);
    IntegralResult total{0.0, 0.0, true, 0};
    for (int j1 = 0; j1 < k; ++j1) {
        for (int j2 = 0; j2 < r; ++j2) {
            // zones: 1 = alpha_l, beta_l before the pivots; 2 = alpha after; 3 = beta after
            std::vector<int> zone(k + r, 0), members;
            for (int i = 0; i < j1; ++i) zone[i] = 1;
            for (int i = j1 + 1; i < k; ++i) zone[i] = 2;
            for (int i = 0; i < j2; ++i) zone[k + i] = 1;
            for (int i = j2 + 1; i < r; ++i) zone[k + i] = 3;
            for (int i = 0; i < k + r; ++i)
                if (zone[i]) members.push_back(i);
            std::vector<int> freev;
            for (int i = 0; i < k + r; ++i)
                if (i != j1) freev.push_back(i);
            const int d = static_cast<int>(freev.size());
            std::vector<int> pos(k + r, -1);
            for (int c = 0; c < d; ++c) pos[freev[c]] = c;
            const int m = static_cast<int>(members.size());
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
                // u_{alpha_j1} = -(sum of the rest)
                ridges.push_back({std::vector<double>(d, 1.0), 0.0, g[j1]});
                // u_{alpha_j1} + u(T) > 1  <=>  u(W) + u_{beta_j2} < -1
                std::vector<double> c1(d, 0.0);
                c1[pos[k + j2]] = 1.0;
                for (int i : members)
                    if (!inT[i]) c1[pos[i]] = 1.0;
                ridges.push_back({c1, 0.0, below});
                ridges.push_back({c1, 0.0, lin});
                auto res = integrate_ridges(ridges, lo, hi, opt);
                const int sign_exp = (j1 + 1) + k + w2 + w3;
                total.value += (sign_exp % 2 ? -1.0 : 1.0) * res.value;
                total.error += res.error;
                total.exact = total.exact && res.exact;
                total.evaluations += res.evaluations;
            }
        }
    }
    return total;
}

IntegralResult j1_term(const std::vector<int>& S1, const std::vector<int>& S2,
                       const std::vector<const EvenPiecewise*>& transforms, const std::vector<std::vector<double>>& M,
                       const RidgeIntegralOptions& opt)
{
    IntegralResult out{0.0, 0.0, true, 0};
    const int a = static_cast<int>(S1.size()), b = static_cast<int>(S2.size());
    for (int m1 = 1; m1 < (1 << a); ++m1)
        for (int m2 = 1; m2 < (1 << b); ++m2) {
            std::vector<int> S11, S12, S21, S22;
            for (int i = 0; i < a; ++i) (m1 >> i & 1 ? S12 : S11).push_back(S1[i]);
            for (int i = 0; i < b; ++i) (m2 >> i & 1 ? S22 : S21).push_back(S2[i]);
            if (S11.size() != S21.size()) continue;
            const double perm = j0_term(S11, S21, M);
            if (perm == 0.0) continue;
            const auto J = J_integral(S12, S22, transforms, opt);
            out.value += perm * J.value;
            out.error += std::abs(perm) * J.error;
            out.exact = out.exact && J.exact;
            out.evaluations += J.evaluations;
        }
    return out;
}

RmtPrediction rmt_prediction(const C4Family& f, const RidgeIntegralOptions& opt)
{
    auto chk = check_c4(f);
    if (!chk.ok) throw std::domain_error("rmt_prediction: " + chk.message);
    RmtPrediction out;
    const int n = f.n();
    if (n == 0) {
        out.total = out.r0 = 1.0;
        return out;
    }
    for (const auto& G : enumerate_partitions(n)) {
        const double mu = static_cast<double>(moebius_from_bottom(G));
        const int nu = G.num_blocks();
        std::vector<ProductTestFunction> F;
        for (const auto& b : G.blocks) F.push_back(product_for_block(f, b));
        std::vector<const EvenPiecewise*> tr;
        for (const auto& p : F) tr.push_back(&p.fhat());
        std::vector<std::vector<double>> M(nu, std::vector<double>(nu));
        for (int a = 0; a < nu; ++a)
            for (int b = 0; b < nu; ++b) M[a][b] = diagonal_pair_integral(*tr[a], *tr[b]);
        int total3 = 1;
        for (int i = 0; i < nu; ++i) total3 *= 3;
        for (int code = 0; code < total3; ++code) {
            std::vector<int> S1, S2;
            double f0 = 1.0;
            int c = code;
            for (int l = 0; l < nu; ++l, c /= 3) {
                if (c % 3 == 0) S1.push_back(l);
                else if (c % 3 == 1) S2.push_back(l);
                else f0 *= F[l].fhat(0.0);
            }
            if (f0 == 0.0) continue;
            out.r0 += mu * f0 * j0_term(S1, S2, M);
            const auto j1 = j1_term(S1, S2, tr, M, opt);
            out.r1 += mu * f0 * j1.value;
            out.error += std::abs(mu * f0) * j1.error;
            out.exact = out.exact && j1.exact;
        }
    }
    out.total = out.r0 + out.r1;
    return out;
}

nlohmann::json to_json(const RmtPrediction& p)
{
    return {{"total", p.total}, {"r0", p.r0}, {"r1", p.r1}, {"error", p.error}, {"exact", p.exact}};
}

double j1_singleton_finite_n(const TestFunction& fa, const TestFunction& fb, int N, double delta_scaled)
{
    if (N < 2) throw std::domain_error("j1_singleton_finite_n: N must be at least 2");
    const double delta = 2 * kPi * delta_scaled / N;
    const QuadRule& rule = gauss_legendre(8);
    const double panel = 0.125;
    const int panels = static_cast<int>(std::ceil(N / panel));
    const double h = double(N) / panels;
    // grid in y in [-pi, pi]
    std::vector<double> y, w;
    for (int p = 0; p < panels; ++p) {
        const double c = -0.5 * N + (p + 0.5) * h;
        for (std::size_t q = 0; q < rule.x.size(); ++q) {
            y.push_back(2 * kPi / N * (c + 0.5 * h * rule.x[q]));
            w.push_back(2 * kPi / N * 0.5 * h * rule.w[q]);
        }
    }
    const std::complex<double> I(0.0, 1.0);
    const std::size_t G = y.size();
    std::vector<std::complex<double>> A(G), B(G), za(G), zb(G);
    for (std::size_t i = 0; i < G; ++i) {
        za[i] = {-delta, y[i]};
        zb[i] = {delta, y[i]};
        A[i] = w[i] * fa.f(I * double(N) * za[i] / (2 * kPi));
        B[i] = w[i] * fb.f(I * double(N) * zb[i] / (2 * kPi));
    }
    std::complex<double> total = 0.0;
    for (std::size_t i = 0; i < G; ++i)
        for (std::size_t j = 0; j < G; ++j) {
            const auto x = za[i] - zb[j];
            total += A[i] * B[j] * std::exp(double(N) * x) / ((1.0 - std::exp(x)) * (1.0 - std::exp(-x)));
        }
    return total.real() / (4 * kPi * kPi);
}

// ------------------------------------------------------------ Monte Carlo

nlohmann::json to_json(const MonteCarloResult& r)
{
    return {{"N", r.N}, {"n", r.n}, {"samples", r.samples}, {"mean", r.mean}, {"stderr", r.stderr_}, {"seed", r.seed}};
}

std::vector<MonteCarloResult> cue_monte_carlo(const std::vector<C4Family>& families, int N, std::int64_t samples,
                                              std::uint64_t seed, int streams, int workers)
{
    if (samples < 2) throw std::domain_error("cue_monte_carlo: need at least 2 samples");
    streams = std::max(1, streams);
    const std::size_t F = families.size();
    std::vector<std::vector<double>> sum(streams, std::vector<double>(F, 0.0)), sq = sum;
    parallel_for(static_cast<std::size_t>(streams), workers, [&](std::size_t s) {
        const std::int64_t count = samples / streams + (static_cast<std::int64_t>(s) < samples % streams ? 1 : 0);
        CueStream st(N, seed, s);
        for (std::int64_t i = 0; i < count; ++i) {
            const auto smp = st.next();
            for (std::size_t k = 0; k < F; ++k) {
                const double v = star_statistic(families[k], smp);
                sum[s][k] += v;
                sq[s][k] += v * v;
            }
        }
    });
    std::vector<MonteCarloResult> out;
    for (std::size_t k = 0; k < F; ++k) {
        double S = 0.0, S2 = 0.0;
        for (int s = 0; s < streams; ++s) {
            S += sum[s][k];
            S2 += sq[s][k];
        }
        const double mean = S / double(samples);
        const double var = std::max(0.0, (S2 - double(samples) * mean * mean) / double(samples - 1));
        out.push_back({N, families[k].n(), samples, mean, std::sqrt(var / double(samples)), seed});
    }
    return out;
}

}  // namespace nlevel
