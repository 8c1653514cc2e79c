#include "nlevel/partition_lattice.hpp"

#include <algorithm>
#include <sstream>

namespace nlevel {

SetPartition SetPartition::from_blocks(int n, std::vector<std::vector<int>> blocks)
{
    std::vector<int> seen(n, 0);
    for (auto& b : blocks) {
        if (b.empty()) throw std::domain_error("SetPartition: empty block");
        for (int x : b) {
            if (x < 0 || x >= n) throw std::domain_error("SetPartition: element out of range");
            if (seen[x]++) throw std::domain_error("SetPartition: blocks overlap");
        }
        std::sort(b.begin(), b.end());
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        throw std::domain_error("SetPartition: blocks do not cover the ground set");
    std::sort(blocks.begin(), blocks.end(), [](auto& a, auto& b) { return a[0] < b[0]; });
    return SetPartition{n, std::move(blocks)};
}

SetPartition SetPartition::from_rgs(const std::vector<int>& rgs)
{
    SetPartition p;
    p.n = static_cast<int>(rgs.size());
    for (int i = 0; i < p.n; ++i) {
        int b = rgs[i];
        if (b < 0 || b > static_cast<int>(p.blocks.size()))
            throw std::domain_error("SetPartition: not a restricted growth string");
        if (b == static_cast<int>(p.blocks.size())) p.blocks.emplace_back();
        p.blocks[b].push_back(i);
    }
    return p;
}

SetPartition SetPartition::bottom(int n)
{
    std::vector<int> r(n);
    for (int i = 0; i < n; ++i) r[i] = i;
    return from_rgs(r);
}

SetPartition SetPartition::top(int n) { return from_rgs(std::vector<int>(n, 0)); }

std::vector<int> SetPartition::rgs() const
{
    std::vector<int> r(n, -1);
    for (std::size_t j = 0; j < blocks.size(); ++j)
        for (int x : blocks[j]) r[x] = static_cast<int>(j);
    return r;
}

std::string SetPartition::to_string() const
{
    std::ostringstream os;
    os << '{';
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        if (j) os << ',';
        os << '{';
        for (std::size_t k = 0; k < blocks[j].size(); ++k) os << (k ? "," : "") << blocks[j][k] + 1;
        os << '}';
    }
    os << '}';
    return os.str();
}

std::vector<SetPartition> enumerate_partitions(int n)
{
    if (n < 1 || n > kMaxPartitionN)
        throw SizeLimitError("enumerate_partitions: n must be in [1, 12]");
    // a[i] <= 1 + max(a[0..i-1]); walk downward from 0,1,..,n-1
    std::vector<int> a(n), mx(n);
    for (int i = 0; i < n; ++i) { a[i] = i; mx[i] = i; }
    std::vector<SetPartition> out;
    while (true) {
        out.push_back(SetPartition::from_rgs(a));
        int i = n - 1;
        while (i > 0 && a[i] == 0) --i;
        if (i == 0) break;
        --a[i];
        mx[i] = std::max(mx[i - 1], a[i]);
        for (int j = i + 1; j < n; ++j) {
            a[j] = mx[j - 1] + 1;
            mx[j] = a[j];
        }
    }
    return out;
}

bool refines(const SetPartition& H, const SetPartition& G)
{
    if (H.n != G.n) throw std::domain_error("refines: ground sets differ");
    auto g = G.rgs();
    for (const auto& b : H.blocks)
        for (int x : b)
            if (g[x] != g[b[0]]) return false;
    return true;
}

std::int64_t moebius_from_bottom(const SetPartition& G)
{
    std::int64_t r = 1;
    for (const auto& b : G.blocks) {
        const int k = static_cast<int>(b.size());
        for (int i = 2; i < k; ++i) r *= i;
        if ((k - 1) % 2) r = -r;
    }
    return r;
}

PartitionLattice::PartitionLattice(int n) : n_(n)
{
    if (n < 1 || n > 8) throw SizeLimitError("PartitionLattice: n must be in [1, 8]");
    parts_ = enumerate_partitions(n);
    const std::size_t m = parts_.size();
    for (std::size_t i = 0; i < m; ++i) index_[parts_[i].rgs()] = i;
    order_.assign(m * m, 0);
    for (std::size_t h = 0; h < m; ++h)
        for (std::size_t g = 0; g < m; ++g) order_[h * m + g] = refines(parts_[h], parts_[g]);
    mu_.assign(m * m, 0);
    mu_known_.assign(m * m, 0);
}

std::size_t PartitionLattice::index_of(const SetPartition& G) const
{
    auto it = index_.find(G.rgs());
    if (G.n != n_ || it == index_.end()) throw std::domain_error("PartitionLattice: foreign partition");
    return it->second;
}

std::int64_t PartitionLattice::moebius(std::size_t h, std::size_t g) const
{
    std::lock_guard<std::mutex> lk(mu_lock_);
    return moebius_locked(h, g);
}

std::int64_t PartitionLattice::moebius_closed_form(const SetPartition& H, const SetPartition& G)
{
    if (!refines(H, G)) return 0;
    auto h = H.rgs();
    std::int64_t r = 1;
    for (const auto& b : G.blocks) {
        std::vector<int> seen;
        for (int x : b)
            if (std::find(seen.begin(), seen.end(), h[x]) == seen.end()) seen.push_back(h[x]);
        const int k = static_cast<int>(seen.size());
        for (int i = 2; i < k; ++i) r *= i;
        if ((k - 1) % 2) r = -r;
    }
    return r;
}

std::int64_t PartitionLattice::moebius_locked(std::size_t h, std::size_t g) const
{
    const std::size_t m = size();
    std::size_t key = h * m + g;
    if (mu_known_[key]) return mu_[key];
    std::int64_t v = 0;
    if (h == g) {
        v = 1;
    } else if (leq(h, g)) {
        for (std::size_t k = 0; k < m; ++k)
            if (k != g && leq(h, k) && leq(k, g)) v -= moebius_locked(h, k);
    }
    mu_[key] = v;
    mu_known_[key] = 1;
    return v;
}

}  // namespace nlevel
