#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace nlevel {

// Elementary multiplicative arithmetic on 64-bit integers.

using PrimePower = std::pair<std::int64_t, int>;  // (p, e)

std::vector<std::int64_t> primes_upto(std::int64_t n);
std::vector<PrimePower> factorize(std::int64_t n);

std::int64_t euler_phi(std::int64_t n);
int moebius_mu(std::int64_t n);
bool is_squarefree(std::int64_t n);
std::int64_t ipow(std::int64_t b, int e);
std::int64_t powmod(std::int64_t b, std::int64_t e, std::int64_t m);

// Number of primitive characters mod q: sum over cd=q of phi(c) mu(d).
std::int64_t phi_star(std::int64_t q);

// Lambda(n) = log p if n = p^k, else 0.
double von_mangoldt(std::int64_t n);

// All prime powers m = p^k <= x with their prime p, in increasing order of m.
struct PrimePowerEntry {
    std::int64_t m;
    std::int64_t p;
};
std::vector<PrimePowerEntry> prime_powers_upto(std::int64_t x);

std::vector<std::int64_t> divisors(std::int64_t n);

// Tables over 1..n, index 0 unused.
struct ArithTables {
    std::vector<std::int64_t> phi;
    std::vector<std::int64_t> phistar;
    std::vector<int> mu;
    explicit ArithTables(std::int64_t n);
};

}  // namespace nlevel
