#include "nlevel/arith.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nlevel {

std::vector<std::int64_t> primes_upto(std::int64_t n)
{
    std::vector<std::int64_t> out;
    if (n < 2) return out;
    std::vector<bool> comp(static_cast<std::size_t>(n) + 1, false);
    for (std::int64_t i = 2; i <= n; ++i) {
        if (comp[i]) continue;
        out.push_back(i);
        if (i <= n / i)
            for (std::int64_t j = i * i; j <= n; j += i) comp[j] = true;
    }
    return out;
}

std::vector<PrimePower> factorize(std::int64_t n)
{
    if (n < 1) throw std::domain_error("factorize: n must be positive");
    std::vector<PrimePower> f;
    for (std::int64_t p = 2; p <= n / p; ++p) {
        if (n % p) continue;
        int e = 0;
        while (n % p == 0) { n /= p; ++e; }
        f.emplace_back(p, e);
    }
    if (n > 1) f.emplace_back(n, 1);
    return f;
}

std::int64_t ipow(std::int64_t b, int e)
{
    std::int64_t r = 1;
    while (e-- > 0) r *= b;
    return r;
}

std::int64_t powmod(std::int64_t b, std::int64_t e, std::int64_t m)
{
    __int128 r = 1 % m, x = ((b % m) + m) % m;
    while (e > 0) {
        if (e & 1) r = r * x % m;
        x = x * x % m;
        e >>= 1;
    }
    return static_cast<std::int64_t>(r);
}

std::int64_t euler_phi(std::int64_t n)
{
    std::int64_t r = n;
    for (auto [p, e] : factorize(n)) r = r / p * (p - 1);
    return r;
}

int moebius_mu(std::int64_t n)
{
    int s = 1;
    for (auto [p, e] : factorize(n)) {
        if (e > 1) return 0;
        s = -s;
    }
    return s;
}

bool is_squarefree(std::int64_t n) { return moebius_mu(n) != 0; }

std::int64_t phi_star(std::int64_t q)
{
    // multiplicative: p -> p-2, p^k -> p^(k-2)(p-1)^2
    std::int64_t r = 1;
    for (auto [p, e] : factorize(q)) {
        if (e == 1) r *= p - 2;
        else r *= ipow(p, e - 2) * (p - 1) * (p - 1);
    }
    return r;
}

double von_mangoldt(std::int64_t n)
{
    if (n < 2) return 0.0;
    auto f = factorize(n);
    return f.size() == 1 ? std::log(static_cast<double>(f[0].first)) : 0.0;
}

std::vector<PrimePowerEntry> prime_powers_upto(std::int64_t x)
{
    std::vector<PrimePowerEntry> out;
    for (std::int64_t p : primes_upto(x)) {
        std::int64_t m = p;
        while (true) {
            out.push_back({m, p});
            if (m > x / p) break;
            m *= p;
        }
    }
    std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.m < b.m; });
    return out;
}

std::vector<std::int64_t> divisors(std::int64_t n)
{
    std::vector<std::int64_t> d{1};
    for (auto [p, e] : factorize(n)) {
        std::size_t k = d.size();
        std::int64_t pk = 1;
        for (int i = 1; i <= e; ++i) {
            pk *= p;
            for (std::size_t j = 0; j < k; ++j) d.push_back(d[j] * pk);
        }
    }
    std::sort(d.begin(), d.end());
    return d;
}

ArithTables::ArithTables(std::int64_t n)
    : phi(n + 1), phistar(n + 1), mu(n + 1)
{
    std::vector<std::int64_t> rem(n + 1);
    std::iota(rem.begin(), rem.end(), 0);
    for (std::int64_t i = 1; i <= n; ++i) { phi[i] = i; phistar[i] = 1; mu[i] = 1; }
    for (std::int64_t p : primes_upto(n)) {
        for (std::int64_t m = p; m <= n; m += p) {
            int e = 0;
            while (rem[m] % p == 0) { rem[m] /= p; ++e; }
            phi[m] = phi[m] / p * (p - 1);
            phistar[m] *= e == 1 ? p - 2 : ipow(p, e - 2) * (p - 1) * (p - 1);
            mu[m] = e > 1 ? 0 : -mu[m];
        }
    }
}

}  // namespace nlevel
