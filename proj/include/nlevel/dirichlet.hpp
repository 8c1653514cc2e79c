#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nlevel {

// (Z/qZ)* as a product of cyclic groups on fixed generators: one per odd
// prime power (a primitive root lifted by CRT), and -1, 5 for 2^k.
struct UnitGroup {
    std::int64_t q = 1;
    std::vector<std::int64_t> generators;
    std::vector<std::int64_t> orders;
    std::vector<int> prime_index;    // which prime power of q each generator belongs to
    std::vector<std::int64_t> prime_powers;
    std::int64_t exponent = 1;       // lcm of orders
    std::int64_t size = 1;

    bool is_unit(std::int64_t n) const;
    // discrete log vector of n (reduced mod q); empty for non-units and for the trivial group
    std::vector<int> dlog(std::int64_t n) const;

private:
    friend std::shared_ptr<const UnitGroup> unit_group(std::int64_t q);
    std::vector<std::int32_t> table_;  // q * generators.size(), -1 for non-units
};

// Cached per modulus; q >= 1.
std::shared_ptr<const UnitGroup> unit_group(std::int64_t q);

class DirichletCharacter {
public:
    DirichletCharacter(std::shared_ptr<const UnitGroup> g, std::vector<int> exponents);

    std::int64_t q() const { return group_->q; }
    const std::vector<int>& exponents() const { return exponents_; }
    const UnitGroup& group() const { return *group_; }
    std::int64_t order() const { return order_; }
    bool primitive() const { return primitive_; }
    int parity() const { return parity_; }  // chi(-1) = (-1)^parity

    // chi(n) = exp(2 pi i num/den), nullopt when gcd(n,q) > 1
    std::optional<std::pair<std::int64_t, std::int64_t>> angle(std::int64_t n) const;
    std::complex<double> operator()(std::int64_t n) const;
    // chi(0..q-1)
    std::vector<std::complex<double>> values() const;

    std::int64_t conductor() const;  // by direct search over divisors of q
    DirichletCharacter conj() const;
    bool is_real() const;

    // rank among primitive characters of the modulus, 1-based; 0 if imprimitive
    int index() const { return index_; }
    std::string label() const;  // "q.k"

    bool operator==(const DirichletCharacter& o) const { return q() == o.q() && exponents_ == o.exponents_; }

private:
    friend std::vector<DirichletCharacter> enumerate_primitive(std::int64_t q);
    std::shared_ptr<const UnitGroup> group_;
    std::vector<int> exponents_;
    std::int64_t order_ = 1;
    bool primitive_ = false;
    int parity_ = 0;
    int index_ = 0;
};

// Every character mod q in lexicographic exponent order.
std::vector<DirichletCharacter> all_characters(std::int64_t q);
// Primitive characters mod q, in the same order, indexed 1..phi*(q).
std::vector<DirichletCharacter> enumerate_primitive(std::int64_t q);
// Inverse of label(); throws std::invalid_argument.
DirichletCharacter character_from_label(const std::string& label);

// tau(chi) = sum_a chi(a) e(a/q); requires chi primitive.
std::complex<double> gauss_sum(const DirichletCharacter& chi);

}  // namespace nlevel
