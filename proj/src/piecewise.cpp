#include "nlevel/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nlevel/quadrature.hpp"

namespace nlevel {

namespace {

double clenshaw(const std::vector<double>& c, double t)
{
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t j = c.size(); j-- > 1;) {
        double b0 = 2.0 * t * b1 - b2 + c[j];
        b2 = b1;
        b1 = b0;
    }
    return t * b1 - b2 + (c.empty() ? 0.0 : c[0]);
}

std::vector<double> merge_breaks(std::vector<double> b, double scale)
{
    std::sort(b.begin(), b.end());
    std::vector<double> out;
    const double tol = 1e-13 * std::max(1.0, scale);
    for (double x : b) {
        if (out.empty() || x - out.back() > tol) out.push_back(x);
    }
    return out;
}

}  // namespace

EvenPiecewise::EvenPiecewise(std::vector<double> breaks, std::vector<std::vector<double>> cheb)
    : breaks_(std::move(breaks)), cheb_(std::move(cheb))
{
    if (breaks_.empty()) {
        if (!cheb_.empty()) throw std::domain_error("EvenPiecewise: pieces without breaks");
        return;
    }
    if (breaks_.front() != 0.0 || breaks_.size() != cheb_.size() + 1)
        throw std::domain_error("EvenPiecewise: breaks must start at 0 and bound every piece");
    for (std::size_t k = 0; k + 1 < breaks_.size(); ++k)
        if (!(breaks_[k + 1] > breaks_[k])) throw std::domain_error("EvenPiecewise: breaks must increase");
}

EvenPiecewise EvenPiecewise::interpolate(std::vector<double> breaks, int deg,
                                         const std::function<double(double)>& f)
{
    const int n = deg + 1;
    std::vector<std::vector<double>> cheb;
    std::vector<double> tk(n), fk(n);
    for (int k = 0; k < n; ++k) tk[k] = std::cos(std::numbers::pi * (k + 0.5) / n);
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double c = 0.5 * (breaks[p] + breaks[p + 1]), h = 0.5 * (breaks[p + 1] - breaks[p]);
        for (int k = 0; k < n; ++k) fk[k] = f(c + h * tk[k]);
        std::vector<double> a(n, 0.0);
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += fk[k] * std::cos(std::numbers::pi * j * (k + 0.5) / n);
            a[j] = (j == 0 ? 1.0 : 2.0) * s / n;
        }
        cheb.push_back(std::move(a));
    }
    return EvenPiecewise(std::move(breaks), std::move(cheb));
}

EvenPiecewise EvenPiecewise::constant(double support, double value)
{
    return EvenPiecewise({0.0, support}, {{value}});
}

double EvenPiecewise::operator()(double u) const
{
    u = std::abs(u);
    if (breaks_.empty() || u > breaks_.back()) return 0.0;
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), u);
    std::size_t k = it == breaks_.begin() ? 0 : static_cast<std::size_t>(it - breaks_.begin()) - 1;
    if (k >= cheb_.size()) k = cheb_.size() - 1;
    const double c = 0.5 * (breaks_[k] + breaks_[k + 1]), h = 0.5 * (breaks_[k + 1] - breaks_[k]);
    return clenshaw(cheb_[k], (u - c) / h);
}

int EvenPiecewise::degree() const
{
    int d = 0;
    for (const auto& c : cheb_) d = std::max(d, static_cast<int>(c.size()) - 1);
    return d;
}

bool EvenPiecewise::is_zero() const
{
    for (const auto& c : cheb_)
        for (double x : c)
            if (x != 0.0) return false;
    return true;
}

std::vector<double> EvenPiecewise::full_breaks() const
{
    std::vector<double> b;
    for (std::size_t i = breaks_.size(); i-- > 1;) b.push_back(-breaks_[i]);
    b.insert(b.end(), breaks_.begin(), breaks_.end());
    return b;
}

EvenPiecewise EvenPiecewise::scaled(double c) const
{
    auto ch = cheb_;
    for (auto& v : ch)
        for (double& x : v) x *= c;
    return EvenPiecewise(breaks_, std::move(ch));
}

double EvenPiecewise::integral() const
{
    // int_{-1}^{1} T_j = 2/(1-j^2) for even j
    double s = 0.0;
    for (std::size_t k = 0; k < cheb_.size(); ++k) {
        const double h = 0.5 * (breaks_[k + 1] - breaks_[k]);
        double p = 0.0;
        for (std::size_t j = 0; j < cheb_[k].size(); j += 2) p += cheb_[k][j] * 2.0 / (1.0 - double(j * j));
        s += h * p;
    }
    return 2.0 * s;
}

double EvenPiecewise::condition() const
{
    double csum = 0.0, vmax = 0.0;
    for (std::size_t k = 0; k < cheb_.size(); ++k) {
        double s = 0.0;
        for (double x : cheb_[k]) s += std::abs(x);
        csum = std::max(csum, s);
        vmax = std::max({vmax, std::abs((*this)(breaks_[k])), std::abs((*this)(breaks_[k + 1]))});
    }
    return vmax > 0 ? csum / vmax : 1.0;
}

EvenPiecewise convolve(const EvenPiecewise& a, const EvenPiecewise& b)
{
    if (a.breaks().empty() || b.breaks().empty()) return {};
    const double A = a.support(), B = b.support();
    const auto fa = a.full_breaks(), fb = b.full_breaks();
    std::vector<double> sums;
    for (double x : fa)
        for (double y : fb)
            if (x + y >= 0.0) sums.push_back(x + y);
    auto outb = merge_breaks(sums, A + B);
    if (outb.front() != 0.0) outb.insert(outb.begin(), 0.0);
    outb.back() = A + B;
    const int deg = a.degree() + b.degree() + 1;
    const int ng = (a.degree() + b.degree()) / 2 + 2;
    auto value = [&](double u) {
        std::vector<double> vb;
        const double lo = std::max(-A, u - B), hi = std::min(A, u + B);
        if (!(hi > lo)) return 0.0;
        vb.push_back(lo);
        vb.push_back(hi);
        for (double x : fa)
            if (x > lo && x < hi) vb.push_back(x);
        for (double y : fb) {
            double x = u - y;
            if (x > lo && x < hi) vb.push_back(x);
        }
        std::sort(vb.begin(), vb.end());
        return integrate_gl_panels([&](double v) { return a(v) * b(u - v); }, vb, ng);
    };
    return EvenPiecewise::interpolate(std::move(outb), deg, value);
}

double integrate_product(const std::vector<const EvenPiecewise*>& fs, double lo, double hi,
                         int weight_degree, const std::function<double(double)>& weight)
{
    if (!(hi > lo)) return 0.0;
    std::vector<double> br{lo, hi};
    int deg = weight_degree;
    for (auto* f : fs) {
        deg += f->degree();
        for (double x : f->full_breaks())
            if (x > lo && x < hi) br.push_back(x);
    }
    std::sort(br.begin(), br.end());
    const int ng = deg / 2 + 2;
    return integrate_gl_panels(
        [&](double u) {
            double v = weight ? weight(u) : 1.0;
            for (auto* f : fs) v *= (*f)(u);
            return v;
        },
        br, ng);
}

}  // namespace nlevel
