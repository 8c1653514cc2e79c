#include "nlevel/dirichlet.hpp"

#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "nlevel/arith.hpp"

namespace nlevel {

namespace {

std::int64_t primitive_root_prime(std::int64_t p)
{
    if (p == 2) return 1;
    const auto fac = factorize(p - 1);
    for (std::int64_t g = 2;; ++g) {
        bool ok = true;
        for (auto [r, e] : fac)
            if (powmod(g, (p - 1) / r, p) == 1) {
                ok = false;
                break;
            }
        if (ok) return g;
    }
}

// x with x = a mod m and x = 1 mod q/m, m coprime to q/m
std::int64_t crt_lift(std::int64_t a, std::int64_t m, std::int64_t q)
{
    const std::int64_t rest = q / m;
    if (rest == 1) return ((a % m) + m) % m;
    // x = 1 + rest * t, rest * t = a - 1 mod m
    std::int64_t inv = 0;
    {
        std::int64_t r0 = rest % m, r1 = m, s0 = 1, s1 = 0;
        while (r1) {
            std::int64_t qq = r0 / r1;
            std::tie(r0, r1) = std::make_pair(r1, r0 - qq * r1);
            std::tie(s0, s1) = std::make_pair(s1, s0 - qq * s1);
        }
        inv = ((s0 % m) + m) % m;
    }
    const std::int64_t t = static_cast<std::int64_t>((static_cast<__int128>(((a - 1) % m + m) % m) * inv) % m);
    return (1 + rest * t) % q;
}

}  // namespace

bool UnitGroup::is_unit(std::int64_t n) const
{
    return std::gcd(((n % q) + q) % q, q) == 1;
}

std::vector<int> UnitGroup::dlog(std::int64_t n) const
{
    const std::int64_t r = ((n % q) + q) % q;
    const std::size_t k = generators.size();
    if (k == 0) return {};
    if (table_[r * k] < 0) return {};
    std::vector<int> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = table_[r * k + i];
    return out;
}

std::shared_ptr<const UnitGroup> unit_group(std::int64_t q)
{
    if (q < 1) throw std::domain_error("unit_group: q must be positive");
    if (q > 50'000'000) throw std::length_error("unit_group: modulus too large for tables");
    static std::mutex m;
    static std::map<std::int64_t, std::shared_ptr<const UnitGroup>> cache;
    {
        std::lock_guard<std::mutex> lk(m);
        auto it = cache.find(q);
        if (it != cache.end()) return it->second;
    }
    auto g = std::make_shared<UnitGroup>();
    g->q = q;
    const auto fac = factorize(q);
    for (std::size_t pi = 0; pi < fac.size(); ++pi) {
        const auto [p, e] = fac[pi];
        const std::int64_t pe = ipow(p, e);
        g->prime_powers.push_back(pe);
        if (p == 2) {
            if (e >= 2) {
                g->generators.push_back(crt_lift(pe - 1, pe, q));
                g->orders.push_back(2);
                g->prime_index.push_back(static_cast<int>(pi));
            }
            if (e >= 3) {
                g->generators.push_back(crt_lift(5, pe, q));
                g->orders.push_back(pe / 4);
                g->prime_index.push_back(static_cast<int>(pi));
            }
        } else {
            std::int64_t r = primitive_root_prime(p);
            if (e >= 2 && powmod(r, p - 1, p * p) == 1) r += p;
            g->generators.push_back(crt_lift(r, pe, q));
            g->orders.push_back(pe / p * (p - 1));
            g->prime_index.push_back(static_cast<int>(pi));
        }
    }
    const std::size_t k = g->generators.size();
    for (auto o : g->orders) {
        g->exponent = std::lcm(g->exponent, o);
        g->size *= o;
    }
    if (k > 0) {
        g->table_.assign(static_cast<std::size_t>(q) * k, -1);
        std::vector<int> a(k, 0);
        std::int64_t x = 1 % q;
        // odometer over exponent tuples, keeping x = prod g_i^a_i
        while (true) {
            for (std::size_t i = 0; i < k; ++i) g->table_[x * k + i] = a[i];
            std::size_t i = 0;
            for (; i < k; ++i) {
                x = static_cast<std::int64_t>(static_cast<__int128>(x) * g->generators[i] % q);
                if (++a[i] < g->orders[i]) break;
                a[i] = 0;  // x returned to its value before this digit started
            }
            if (i == k) break;
        }
    }
    std::lock_guard<std::mutex> lk(m);
    return cache.emplace(q, std::move(g)).first->second;
}

DirichletCharacter::DirichletCharacter(std::shared_ptr<const UnitGroup> g, std::vector<int> exponents)
    : group_(std::move(g)), exponents_(std::move(exponents))
{
    const auto& G = *group_;
    if (exponents_.size() != G.generators.size())
        throw std::invalid_argument("DirichletCharacter: exponent vector has wrong length");
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
        const auto o = G.orders[i];
        exponents_[i] = static_cast<int>(((exponents_[i] % o) + o) % o);
        order_ = std::lcm(order_, o / std::gcd<std::int64_t>(o, exponents_[i]));
    }
    // primitive iff each local component is
    primitive_ = true;
    for (std::size_t pi = 0; pi < G.prime_powers.size(); ++pi) {
        const std::int64_t pe = G.prime_powers[pi];
        const auto p = factorize(pe)[0].first;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < G.generators.size(); ++i)
            if (G.prime_index[i] == static_cast<int>(pi)) idx.push_back(i);
        bool ok;
        if (p == 2) {
            if (pe == 2) ok = false;
            else if (pe == 4) ok = exponents_[idx[0]] == 1;
            else ok = exponents_[idx[1]] % 2 == 1;
        } else if (pe == p) {
            ok = exponents_[idx[0]] != 0;
        } else {
            ok = exponents_[idx[0]] % p != 0;
        }
        primitive_ = primitive_ && ok;
    }
    if (G.q == 1) primitive_ = true;
    auto a = angle(G.q - 1);
    parity_ = (a && a->first != 0) ? 1 : 0;
}

std::optional<std::pair<std::int64_t, std::int64_t>> DirichletCharacter::angle(std::int64_t n) const
{
    const auto& G = *group_;
    if (!G.is_unit(n)) return std::nullopt;
    if (G.generators.empty()) return std::make_pair<std::int64_t, std::int64_t>(0, 1);
    const auto d = G.dlog(n);
    std::int64_t num = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
        num = (num + static_cast<std::int64_t>(exponents_[i]) * d[i] % G.orders[i] * (G.exponent / G.orders[i])) %
              G.exponent;
    // values are order_-th roots of unity, so scale divides num
    const std::int64_t scale = G.exponent / order_;
    return std::make_pair(num / scale, order_);
}

std::complex<double> DirichletCharacter::operator()(std::int64_t n) const
{
    auto a = angle(n);
    if (!a) return 0.0;
    return std::polar(1.0, 2.0 * std::numbers::pi * double(a->first) / double(a->second));
}

std::vector<std::complex<double>> DirichletCharacter::values() const
{
    const auto Q = q();
    std::vector<std::complex<double>> roots(order_);
    for (std::int64_t j = 0; j < order_; ++j) roots[j] = std::polar(1.0, 2.0 * std::numbers::pi * double(j) / double(order_));
    std::vector<std::complex<double>> v(Q, 0.0);
    for (std::int64_t n = 0; n < Q; ++n) {
        auto a = angle(n);
        if (a) v[n] = roots[a->first];
    }
    return v;
}

std::int64_t DirichletCharacter::conductor() const
{
    const auto Q = q();
    for (auto d : divisors(Q)) {
        bool trivial = true;
        for (std::int64_t n = 1; n < Q && trivial; n += d) {
            auto a = angle(n);
            if (a && a->first != 0) trivial = false;
        }
        if (trivial) return d;
    }
    return Q;
}

DirichletCharacter DirichletCharacter::conj() const
{
    std::vector<int> e(exponents_.size());
    for (std::size_t i = 0; i < e.size(); ++i)
        e[i] = static_cast<int>((group_->orders[i] - exponents_[i]) % group_->orders[i]);
    DirichletCharacter c(group_, e);
    if (primitive_) {
        for (const auto& x : enumerate_primitive(q()))
            if (x == c) return x;
    }
    return c;
}

bool DirichletCharacter::is_real() const { return order_ <= 2; }

std::string DirichletCharacter::label() const
{
    return std::to_string(q()) + "." + std::to_string(index_);
}

std::vector<DirichletCharacter> all_characters(std::int64_t q)
{
    auto G = unit_group(q);
    const std::size_t k = G->generators.size();
    std::vector<DirichletCharacter> out;
    std::vector<int> e(k, 0);
    while (true) {
        out.emplace_back(G, e);
        int i = static_cast<int>(k) - 1;
        for (; i >= 0; --i) {
            if (++e[i] < G->orders[i]) break;
            e[i] = 0;
        }
        if (i < 0) break;
    }
    return out;
}

std::vector<DirichletCharacter> enumerate_primitive(std::int64_t q)
{
    if (q < 2) throw std::domain_error("enumerate_primitive: q must be at least 2");
    static std::mutex m;
    static std::map<std::int64_t, std::vector<DirichletCharacter>> cache;
    {
        std::lock_guard<std::mutex> lk(m);
        auto it = cache.find(q);
        if (it != cache.end()) return it->second;
    }
    std::vector<DirichletCharacter> out;
    for (auto& c : all_characters(q))
        if (c.primitive_) {
            c.index_ = static_cast<int>(out.size()) + 1;
            out.push_back(std::move(c));
        }
    std::lock_guard<std::mutex> lk(m);
    return cache.emplace(q, std::move(out)).first->second;
}

DirichletCharacter character_from_label(const std::string& label)
{
    const auto dot = label.find('.');
    if (dot == std::string::npos) throw std::invalid_argument("character label must look like q.k: " + label);
    std::int64_t q = 0, k = 0;
    try {
        std::size_t p1 = 0, p2 = 0;
        q = std::stoll(label.substr(0, dot), &p1);
        k = std::stoll(label.substr(dot + 1), &p2);
        if (p1 != dot || p2 != label.size() - dot - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw std::invalid_argument("character label must look like q.k: " + label);
    }
    if (q < 2) throw std::invalid_argument("character label modulus must be at least 2: " + label);
    auto prim = enumerate_primitive(q);
    if (k < 1 || k > static_cast<std::int64_t>(prim.size()))
        throw std::invalid_argument("character label index out of range: " + label);
    return prim[k - 1];
}

std::complex<double> gauss_sum(const DirichletCharacter& chi)
{
    if (!chi.primitive()) throw std::domain_error("gauss_sum: character is not primitive");
    const auto q = chi.q();
    const auto v = chi.values();
    std::complex<double> s = 0.0;
    for (std::int64_t a = 1; a < q; ++a)
        if (v[a] != 0.0) s += v[a] * std::polar(1.0, 2.0 * std::numbers::pi * double(a) / double(q));
    return s;
}

}  // namespace nlevel
