#include "nlevel/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace nlevel {

namespace {

QuadRule make_legendre(int n)
{
    QuadRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = x; p0 = 1.0; }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = x; p0 = 1.0; }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.x[i] = -x;
        r.x[n - 1 - i] = x;
        r.w[i] = r.w[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    return r;
}

QuadRule make_hermite(int n)
{
    // Golub-Welsch on the symmetric Jacobi matrix
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(k / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    QuadRule r;
    r.x.resize(n);
    r.w.resize(n);
    const double mu0 = std::sqrt(std::numbers::pi);
    for (int i = 0; i < n; ++i) {
        r.x[i] = es.eigenvalues()(i);
        double v = es.eigenvectors()(0, i);
        r.w[i] = mu0 * v * v;
    }
    // symmetrise to remove eigen-solver asymmetry
    for (int i = 0; i < n / 2; ++i) {
        double x = 0.5 * (r.x[n - 1 - i] - r.x[i]);
        double w = 0.5 * (r.w[n - 1 - i] + r.w[i]);
        r.x[i] = -x;
        r.x[n - 1 - i] = x;
        r.w[i] = r.w[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    return r;
}

template <typename Maker>
const QuadRule& cached(std::map<int, std::unique_ptr<QuadRule>>& cache, std::mutex& m, int n, Maker make)
{
    if (n < 1) throw std::domain_error("quadrature order must be positive");
    std::lock_guard<std::mutex> lk(m);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<QuadRule>(make(n));
    return *slot;
}

}  // namespace

const QuadRule& gauss_legendre(int n)
{
    static std::map<int, std::unique_ptr<QuadRule>> cache;
    static std::mutex m;
    return cached(cache, m, n, make_legendre);
}

const QuadRule& gauss_hermite(int n)
{
    static std::map<int, std::unique_ptr<QuadRule>> cache;
    static std::mutex m;
    return cached(cache, m, n, make_hermite);
}

}  // namespace nlevel
