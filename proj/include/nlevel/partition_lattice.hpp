#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlevel {

// A set partition of {0..n-1}. Blocks are sorted by minimum element and
// elements within a block ascend, so equality is structural.
struct SetPartition {
    int n = 0;
    std::vector<std::vector<int>> blocks;

    static SetPartition from_blocks(int n, std::vector<std::vector<int>> blocks);
    // Restricted growth string: rgs[i] = block index of element i.
    static SetPartition from_rgs(const std::vector<int>& rgs);
    static SetPartition bottom(int n);  // all singletons
    static SetPartition top(int n);     // one block

    std::vector<int> rgs() const;
    int num_blocks() const { return static_cast<int>(blocks.size()); }
    std::string to_string() const;  // 1-based, e.g. {{1,4},{2},{3}}

    bool operator==(const SetPartition&) const = default;
    auto operator<=>(const SetPartition& o) const { return rgs() <=> o.rgs(); }
};

class SizeLimitError : public std::length_error {
public:
    using std::length_error::length_error;
};

inline constexpr int kMaxPartitionN = 12;

// All partitions of {0..n-1}, in decreasing lexicographic order of their
// restricted growth strings: the first entry is the bottom O = 01..(n-1),
// the last is the top 00..0. Throws SizeLimitError unless 1 <= n <= 12.
std::vector<SetPartition> enumerate_partitions(int n);

// H refines G: every block of G is a union of blocks of H.
bool refines(const SetPartition& H, const SetPartition& G);

// mu(O, G) = prod_j (-1)^{|G_j|-1} (|G_j|-1)!
std::int64_t moebius_from_bottom(const SetPartition& G);

// x has one entry per block of G; y[l] = x[j] for l in G_j.
template <typename T>
std::vector<T> embed(const SetPartition& G, std::span<const T> x)
{
    if (static_cast<int>(x.size()) != G.num_blocks())
        throw std::domain_error("embed: length of x must equal number of blocks");
    std::vector<T> y(G.n);
    for (std::size_t j = 0; j < G.blocks.size(); ++j)
        for (int l : G.blocks[j]) y[l] = x[j];
    return y;
}

// The interval structure of Pi_n with a memoised general Moebius function.
// Holds the full order relation, so n is limited to 8.
class PartitionLattice {
public:
    explicit PartitionLattice(int n);

    int n() const { return n_; }
    const std::vector<SetPartition>& elements() const { return parts_; }
    std::size_t size() const { return parts_.size(); }
    std::size_t index_of(const SetPartition& G) const;
    bool leq(std::size_t h, std::size_t g) const { return order_[h * size() + g]; }

    // mu(H,G) from sum_{H<=K<=G} mu(H,K) = [H=G]; 0 if H does not refine G.
    std::int64_t moebius(std::size_t h, std::size_t g) const;
    // Closed form: product over blocks of G of the bottom formula applied
    // to the number of H-blocks inside each block.
    static std::int64_t moebius_closed_form(const SetPartition& H, const SetPartition& G);
    std::int64_t moebius(const SetPartition& H, const SetPartition& G) const
    {
        return moebius(index_of(H), index_of(G));
    }

private:
    int n_;
    std::vector<SetPartition> parts_;
    std::map<std::vector<int>, std::size_t> index_;
    std::vector<char> order_;
    mutable std::vector<std::int64_t> mu_;
    mutable std::vector<char> mu_known_;
    mutable std::mutex mu_lock_;
    std::int64_t moebius_locked(std::size_t h, std::size_t g) const;
};

// Sum of g over index tuples in {0..range-1}^n with pairwise distinct entries,
// computed as sum_G mu(O,G) * (unrestricted sum of g o iota_G).
template <typename T>
T sieve_distinct_sum(int n, const std::function<T(std::span<const int>)>& g, int range)
{
    T total{};
    for (const auto& G : enumerate_partitions(n)) {
        const int nu = G.num_blocks();
        std::vector<int> x(nu, 0), y(n);
        T part{};
        bool done = range <= 0;
        while (!done) {
            for (int j = 0; j < nu; ++j)
                for (int l : G.blocks[j]) y[l] = x[j];
            part += g(std::span<const int>(y));
            int k = 0;
            while (k < nu && ++x[k] == range) x[k++] = 0;
            done = k == nu;
        }
        total += static_cast<T>(moebius_from_bottom(G)) * part;
    }
    return total;
}

// Brute-force distinct-tuple sum, used as an oracle.
template <typename T>
T brute_distinct_sum(int n, const std::function<T(std::span<const int>)>& g, int range)
{
    T total{};
    std::vector<int> y(n, 0);
    if (range <= 0) return total;
    while (true) {
        bool distinct = true;
        for (int a = 0; a < n && distinct; ++a)
            for (int b = a + 1; b < n; ++b)
                if (y[a] == y[b]) { distinct = false; break; }
        if (distinct) total += g(std::span<const int>(y));
        int k = 0;
        while (k < n && ++y[k] == range) y[k++] = 0;
        if (k == n) break;
    }
    return total;
}

// For product integrands the unrestricted sum over iota_G factorises into
// per-block sums; block_sum(block) returns sum_j prod_{i in block} f_i(x_j).
template <typename T>
T sieve_product_sum(int n, const std::function<T(const std::vector<int>&)>& block_sum)
{
    T total{};
    for (const auto& G : enumerate_partitions(n)) {
        T prod = static_cast<T>(moebius_from_bottom(G));
        for (const auto& b : G.blocks) prod *= block_sum(b);
        total += prod;
    }
    return total;
}

}  // namespace nlevel
