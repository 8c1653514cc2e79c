#include "nlevel/ridge_integral.hpp"

#include <algorithm>
#include <boost/random/sobol.hpp>
#include <cmath>
#include <random>
#include <stdexcept>

#include "nlevel/quadrature.hpp"

namespace nlevel {

namespace {

class PiecewiseUni final : public Univariate {
public:
    explicit PiecewiseUni(EvenPiecewise p) : p_(std::move(p)), br_(p_.full_breaks()) {}
    double operator()(double s) const override { return p_(s); }
    std::vector<double> breaks() const override { return br_; }
    int degree() const override { return p_.degree(); }

private:
    EvenPiecewise p_;
    std::vector<double> br_;
};

class StepUni final : public Univariate {
public:
    StepUni(double c, bool above) : c_(c), above_(above) {}
    double operator()(double s) const override { return (above_ ? s > c_ : s < c_) ? 1.0 : 0.0; }
    std::vector<double> breaks() const override { return {c_}; }
    int degree() const override { return 0; }

private:
    double c_;
    bool above_;
};

class AffineUni final : public Univariate {
public:
    AffineUni(double c0, double c1) : c0_(c0), c1_(c1) {}
    double operator()(double s) const override { return c0_ + c1_ * s; }
    std::vector<double> breaks() const override { return {}; }
    int degree() const override { return c1_ != 0.0 ? 1 : 0; }

private:
    double c0_, c1_;
};

struct Hyperplane {
    std::vector<double> a;  // a . x = c
    double c;
};

// Work item: ridges restricted to the trailing variables.
struct Term {
    const double* a;  // coefficients for variables [level, dim)
    double b;
    const Univariate* g;
    const std::vector<double>* br;
};

class ExactIntegrator {
public:
    ExactIntegrator(const std::vector<Ridge>& ridges, const std::vector<double>& lo, const std::vector<double>& hi)
        : dim_(static_cast<int>(lo.size())), lo_(lo), hi_(hi)
    {
        for (const auto& r : ridges) {
            if (static_cast<int>(r.a.size()) != dim_) throw std::domain_error("integrate_ridges: ridge dimension");
            coeffs_.push_back(r.a);
            breaks_.push_back(r.g->breaks());
            funcs_.push_back(r.g.get());
            offsets_.push_back(r.b);
            degree_ += r.g->degree();
        }
    }

    // value and integral of the absolute value
    std::pair<double, double> run()
    {
        std::vector<double> b = offsets_;
        return level(0, b);
    }

    std::int64_t evaluations() const { return evals_; }

private:
    int dim_;
    std::vector<double> lo_, hi_;
    std::vector<std::vector<double>> coeffs_;
    std::vector<std::vector<double>> breaks_;
    std::vector<const Univariate*> funcs_;
    std::vector<double> offsets_;
    int degree_ = 0;
    std::int64_t evals_ = 0;

    // x_level-coordinates of all vertices of the arrangement in the
    // remaining variables [level, dim).
    std::vector<double> critical(int level, const std::vector<double>& b) const
    {
        const int d = dim_ - level;
        std::vector<Hyperplane> hs;
        for (std::size_t k = 0; k < coeffs_.size(); ++k) {
            bool active = false;
            for (int i = level; i < dim_; ++i) active = active || coeffs_[k][i] != 0.0;
            if (!active) continue;
            std::vector<double> a(coeffs_[k].begin() + level, coeffs_[k].end());
            for (double beta : breaks_[k]) hs.push_back({a, beta - b[k]});
        }
        for (int i = 0; i < d; ++i) {
            std::vector<double> e(d, 0.0);
            e[i] = 1.0;
            hs.push_back({e, lo_[level + i]});
            hs.push_back({e, hi_[level + i]});
        }
        std::vector<double> xs{lo_[level], hi_[level]};
        const double L = lo_[level], H = hi_[level];
        auto add = [&](double x) {
            if (x > L && x < H) xs.push_back(x);
        };
        const std::size_t m = hs.size();
        if (d == 1) {
            for (const auto& h : hs)
                if (h.a[0] != 0.0) add(h.c / h.a[0]);
        } else if (d == 2) {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = i + 1; j < m; ++j) {
                    const auto &p = hs[i], &q = hs[j];
                    double det = p.a[0] * q.a[1] - p.a[1] * q.a[0];
                    if (std::abs(det) < 1e-14) continue;
                    add((p.c * q.a[1] - p.a[1] * q.c) / det);
                }
        } else if (d == 3) {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = i + 1; j < m; ++j)
                    for (std::size_t k = j + 1; k < m; ++k) {
                        const auto &p = hs[i].a, &q = hs[j].a, &r = hs[k].a;
                        double det = p[0] * (q[1] * r[2] - q[2] * r[1]) - p[1] * (q[0] * r[2] - q[2] * r[0]) +
                                     p[2] * (q[0] * r[1] - q[1] * r[0]);
                        if (std::abs(det) < 1e-14) continue;
                        const double c0 = hs[i].c, c1 = hs[j].c, c2 = hs[k].c;
                        double num = c0 * (q[1] * r[2] - q[2] * r[1]) - p[1] * (c1 * r[2] - q[2] * c2) +
                                     p[2] * (c1 * r[1] - q[1] * c2);
                        add(num / det);
                    }
        } else {
            throw std::logic_error("exact integration limited to 3 dimensions");
        }
        std::sort(xs.begin(), xs.end());
        std::vector<double> out;
        for (double x : xs)
            if (out.empty() || x - out.back() > 1e-13 * std::max(1.0, std::abs(x))) out.push_back(x);
        return out;
    }

    std::pair<double, double> level(int lev, const std::vector<double>& b)
    {
        if (!(hi_[lev] > lo_[lev])) return {0.0, 0.0};
        const int rest = dim_ - lev - 1;
        const int ng = (degree_ + rest) / 2 + 2;
        const QuadRule& rule = gauss_legendre(ng);
        const auto xs = critical(lev, b);
        double total = 0.0, abs_total = 0.0;
        std::vector<double> nb(b.size());
        for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
            const double c = 0.5 * (xs[s] + xs[s + 1]), h = 0.5 * (xs[s + 1] - xs[s]);
            double part = 0.0, abs_part = 0.0;
            for (std::size_t q = 0; q < rule.x.size(); ++q) {
                const double x = c + h * rule.x[q];
                if (rest == 0) {
                    double v = 1.0;
                    for (std::size_t k = 0; k < funcs_.size() && v != 0.0; ++k)
                        v *= (*funcs_[k])(coeffs_[k][lev] * x + b[k]);
                    ++evals_;
                    part += rule.w[q] * v;
                    abs_part += rule.w[q] * std::abs(v);
                } else {
                    for (std::size_t k = 0; k < b.size(); ++k) nb[k] = b[k] + coeffs_[k][lev] * x;
                    auto [v, av] = level(lev + 1, nb);
                    part += rule.w[q] * v;
                    abs_part += rule.w[q] * av;
                }
            }
            total += h * part;
            abs_total += h * abs_part;
        }
        return {total, abs_total};
    }
};

IntegralResult qmc(const std::vector<Ridge>& ridges, const std::vector<double>& lo, const std::vector<double>& hi,
                   const RidgeIntegralOptions& opt)
{
    const int d = static_cast<int>(lo.size());
    const int R = std::max(2, opt.qmc_replicas);
    const std::int64_t per = (std::int64_t{1} << opt.qmc_log2_points) / R;
    double vol = 1.0;
    for (int i = 0; i < d; ++i) vol *= hi[i] - lo[i];
    std::mt19937_64 rng(opt.qmc_seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> means;
    std::vector<double> x(d);
    for (int r = 0; r < R; ++r) {
        boost::random::sobol gen(d);
        std::vector<double> shift(d);
        for (auto& s : shift) s = U(rng);
        double acc = 0.0;
        for (std::int64_t i = 0; i < per; ++i) {
            for (int k = 0; k < d; ++k) {
                double u = std::ldexp(static_cast<double>(gen()), -64) + shift[k];
                if (u >= 1.0) u -= 1.0;
                x[k] = lo[k] + (hi[k] - lo[k]) * u;
            }
            double v = 1.0;
            for (const auto& rd : ridges) {
                double s = rd.b;
                for (int k = 0; k < d; ++k) s += rd.a[k] * x[k];
                v *= (*rd.g)(s);
                if (v == 0.0) break;
            }
            acc += v;
        }
        means.push_back(vol * acc / per);
    }
    double m = 0.0;
    for (double v : means) m += v;
    m /= R;
    double var = 0.0;
    for (double v : means) var += (v - m) * (v - m);
    var /= (R - 1);
    return {m, std::sqrt(var / R), false, per * R};
}

}  // namespace

UnivariatePtr uni_piecewise(const EvenPiecewise& p) { return std::make_shared<PiecewiseUni>(p); }
UnivariatePtr uni_step_above(double c) { return std::make_shared<StepUni>(c, true); }
UnivariatePtr uni_step_below(double c) { return std::make_shared<StepUni>(c, false); }
UnivariatePtr uni_affine(double c0, double c1) { return std::make_shared<AffineUni>(c0, c1); }

IntegralResult integrate_ridges(const std::vector<Ridge>& ridges, const std::vector<double>& lo,
                                const std::vector<double>& hi, const RidgeIntegralOptions& opt)
{
    if (lo.size() != hi.size()) throw std::domain_error("integrate_ridges: bounds mismatch");
    const int d = static_cast<int>(lo.size());
    for (int i = 0; i < d; ++i)
        if (!(hi[i] > lo[i])) return {0.0, 0.0, true, 0};
    if (d == 0) {
        double v = 1.0;
        for (const auto& r : ridges) v *= (*r.g)(r.b);
        return {v, 0.0, true, 1};
    }
    if (d <= opt.exact_max_dim && d <= 3) {
        ExactIntegrator ex(ridges, lo, hi);
        auto [v, av] = ex.run();
        return {v, 64.0 * 2.2e-16 * av, true, ex.evaluations()};
    }
    return qmc(ridges, lo, hi, opt);
}

}  // namespace nlevel
