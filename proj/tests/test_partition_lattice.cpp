#include <random>

#include "doctest.h"
#include "nlevel/partition_lattice.hpp"

using namespace nlevel;

namespace {

std::int64_t bell_triangle(int n)
{
    std::vector<std::int64_t> row{1};
    for (int i = 1; i < n; ++i) {
        std::vector<std::int64_t> next{row.back()};
        for (auto x : row) next.push_back(next.back() + x);
        row = next;
    }
    return row.back();
}

SetPartition P(int n, std::vector<std::vector<int>> one_based)
{
    for (auto& b : one_based)
        for (auto& x : b) --x;
    return SetPartition::from_blocks(n, one_based);
}

}  // namespace

TEST_CASE("enumeration counts and order")
{
    CHECK(enumerate_partitions(1).size() == 1);
    CHECK(enumerate_partitions(3).size() == 5);
    CHECK(enumerate_partitions(4).size() == 15);
    for (int n = 1; n <= 9; ++n) {
        auto ps = enumerate_partitions(n);
        CHECK(static_cast<std::int64_t>(ps.size()) == bell_triangle(n));
        CHECK(ps.front() == SetPartition::bottom(n));
        CHECK(ps.back() == SetPartition::top(n));
        for (std::size_t i = 1; i < ps.size(); ++i) CHECK(ps[i - 1].rgs() > ps[i].rgs());
    }
    CHECK_THROWS_AS(enumerate_partitions(0), SizeLimitError);
    CHECK_THROWS_AS(enumerate_partitions(13), SizeLimitError);
}

TEST_CASE("refinement")
{
    CHECK(refines(P(4, {{1, 4}, {2}, {3}}), P(4, {{1, 4}, {2, 3}})));
    CHECK_FALSE(refines(P(3, {{1, 2}, {3}}), P(3, {{1, 3}, {2}})));
    for (const auto& G : enumerate_partitions(5)) CHECK(refines(SetPartition::bottom(5), G));
    CHECK_THROWS_AS(refines(SetPartition::bottom(3), SetPartition::bottom(4)), std::domain_error);
}

TEST_CASE("canonical form")
{
    auto a = SetPartition::from_blocks(4, {{3, 0}, {2}, {1}});
    CHECK(a.to_string() == "{{1,4},{2},{3}}");
    CHECK(a == P(4, {{1, 4}, {2}, {3}}));
    CHECK_THROWS_AS(SetPartition::from_blocks(3, {{0, 1}, {1, 2}}), std::domain_error);
    CHECK_THROWS_AS(SetPartition::from_blocks(3, {{0, 1}}), std::domain_error);
}

TEST_CASE("moebius from bottom")
{
    CHECK(moebius_from_bottom(SetPartition::bottom(5)) == 1);
    CHECK(moebius_from_bottom(SetPartition::top(3)) == 2);
    CHECK(moebius_from_bottom(P(4, {{1, 2}, {3, 4}})) == 1);
    CHECK(moebius_from_bottom(SetPartition::top(4)) == -6);
}

TEST_CASE("moebius recursion agrees with bottom formula and closed form")
{
    for (int n = 1; n <= 6; ++n) {
        PartitionLattice L(n);
        const auto O = L.index_of(SetPartition::bottom(n));
        for (std::size_t g = 0; g < L.size(); ++g) CHECK(L.moebius(O, g) == moebius_from_bottom(L.elements()[g]));
    }
    PartitionLattice L(5);
    for (std::size_t h = 0; h < L.size(); ++h)
        for (std::size_t g = 0; g < L.size(); ++g)
            CHECK(L.moebius(h, g) == PartitionLattice::moebius_closed_form(L.elements()[h], L.elements()[g]));
}

TEST_CASE("moebius inversion round trip")
{
    std::mt19937_64 rng(7);
    for (int n = 1; n <= 6; ++n) {
        PartitionLattice L(n);
        const std::size_t m = L.size();
        std::uniform_int_distribution<int> d(-50, 50);
        std::vector<std::int64_t> R(m), C(m, 0);
        for (auto& r : R) r = d(rng);
        for (std::size_t h = 0; h < m; ++h)
            for (std::size_t g = 0; g < m; ++g)
                if (L.leq(h, g)) C[h] += R[g];
        bool ok = true;
        for (std::size_t h = 0; h < m; ++h) {
            std::int64_t back = 0;
            for (std::size_t g = 0; g < m; ++g)
                if (L.leq(h, g)) back += L.moebius(h, g) * C[g];
            ok = ok && back == R[h];
        }
        CHECK(ok);
    }
}

TEST_CASE("embedding")
{
    std::vector<double> x{1.5, 2.5, 3.5};
    auto y = embed<double>(P(4, {{1, 4}, {2}, {3}}), x);
    CHECK(y == std::vector<double>{1.5, 2.5, 3.5, 1.5});
    CHECK(embed<double>(SetPartition::bottom(3), x) == x);
    std::vector<double> a{7.0};
    CHECK(embed<double>(SetPartition::top(2), a) == std::vector<double>{7.0, 7.0});
    CHECK_THROWS_AS(embed<double>(SetPartition::top(2), x), std::domain_error);
}

TEST_CASE("sieving identity")
{
    using G = std::function<std::int64_t(std::span<const int>)>;
    G one = [](std::span<const int>) { return std::int64_t{1}; };
    for (int m = 1; m <= 6; ++m) CHECK(sieve_distinct_sum<std::int64_t>(2, one, m) == m * (m - 1));
    for (int n = 1; n <= 5; ++n) {
        std::int64_t fall = 1;
        for (int i = 0; i < n; ++i) fall *= 7 - i;
        CHECK(sieve_distinct_sum<std::int64_t>(n, one, 7) == fall);
    }
    G plain = [](std::span<const int> i) { return std::int64_t{3 * i[0] + 1}; };
    CHECK(sieve_distinct_sum<std::int64_t>(1, plain, 5) == 35);

    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> d(-9, 9);
    int matches = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 1 + rep % 3, range = 5;
        std::vector<std::int64_t> table(125);
        for (auto& t : table) t = d(rng);
        G g = [&](std::span<const int> i) {
            int k = 0;
            for (int a : i) k = 5 * k + a;
            return table[k];
        };
        matches += sieve_distinct_sum<std::int64_t>(n, g, range) == brute_distinct_sum<std::int64_t>(n, g, range);
    }
    CHECK(matches == 100);
}
