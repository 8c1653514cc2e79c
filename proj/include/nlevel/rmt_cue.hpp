#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "json.hpp"

#include "nlevel/prediction.hpp"
#include "nlevel/ridge_integral.hpp"
#include "nlevel/test_functions.hpp"

namespace nlevel {

struct EigenangleSample {
    int N = 0;
    std::vector<double> angles;  // sorted, in [-pi, pi)
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::uint64_t index = 0;     // position within the stream
};

// sin(pi(x-y))/(pi(x-y)), 1 on the diagonal
double sine_kernel(double x, double y);

// Haar unitary from a complex Gaussian matrix: QR, phase fix, eigen-angles.
EigenangleSample sample_cue(int N, std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t index = 0);

class CueStream {
public:
    CueStream(int N, std::uint64_t seed, std::uint64_t stream);
    EigenangleSample next();

private:
    int N_;
    std::uint64_t seed_, stream_, count_ = 0;
    std::mt19937_64 rng_;
};

// Sum over distinct index n-tuples of f(N theta_j1 / 2pi, ...).
double star_statistic(const std::function<double(const std::vector<double>&)>& f, const EigenangleSample& s, int n);
// Same for a product family, by partition sieving over per-block sums.
double star_statistic(const C4Family& f, const EigenangleSample& s);

// det of the n x n sine-kernel matrix
double w_n(const std::vector<double>& x);

// int_{[-N/2,N/2]^n} f(x) N^-n det S_N(2 pi (x_k - x_j)/N) dx
struct DensityResult {
    double value = 0.0;
    double error = 0.0;
};
DensityResult finite_n_density(const C4Family& f, int N);
// int_{R^n} f W^(n), from the cycle expansion of the sine-kernel determinant
DensityResult integral_f_wn(const C4Family& f, const RidgeIntegralOptions& opt = {});

double j0_term(const std::vector<int>& S1, const std::vector<int>& S2, const std::vector<std::vector<double>>& M);

// J(S12, S22), with the delta constraint solved for u_{alpha_{j1}}
IntegralResult J_integral(const std::vector<int>& S12, const std::vector<int>& S22,
                          const std::vector<const EvenPiecewise*>& transforms, const RidgeIntegralOptions& opt = {});

IntegralResult j1_term(const std::vector<int>& S1, const std::vector<int>& S2,
                       const std::vector<const EvenPiecewise*>& transforms, const std::vector<std::vector<double>>& M,
                       const RidgeIntegralOptions& opt = {});

struct RmtPrediction {
    double total = 0.0;
    double r0 = 0.0;  // diagonal pairings
    double r1 = 0.0;  // one S, T pair
    double error = 0.0;
    bool exact = true;
};
RmtPrediction rmt_prediction(const C4Family& f, const RidgeIntegralOptions& opt = {});
nlohmann::json to_json(const RmtPrediction& p);

// Finite-N contour integral of the |S| = |T| = 1 term of J* for S1 = {a}, S2 = {b},
// on the period contours offset by Re = -/+ delta_scaled * 2 pi / N.
double j1_singleton_finite_n(const TestFunction& fa, const TestFunction& fb, int N, double delta_scaled = 0.25);

struct MonteCarloResult {
    int N = 0;
    int n = 0;
    std::int64_t samples = 0;
    double mean = 0.0;
    double stderr_ = 0.0;
    std::uint64_t seed = 0;
};
nlohmann::json to_json(const MonteCarloResult& r);

// Averages of star_statistic for each family over one set of samples.
// Streams are seeded by (seed, stream id) and reduced in stream order.
std::vector<MonteCarloResult> cue_monte_carlo(const std::vector<C4Family>& families, int N, std::int64_t samples,
                                              std::uint64_t seed, int streams = 8, int workers = 1);

}  // namespace nlevel
