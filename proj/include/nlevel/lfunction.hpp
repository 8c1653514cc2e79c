#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlevel/dirichlet.hpp"
#include "nlevel/test_functions.hpp"

namespace nlevel {

using cplx = std::complex<double>;

struct Evaluation {
    cplx value;
    double error = 0.0;  // absolute, truncation plus a rounding allowance
};

class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IncompleteZerosError : public std::runtime_error {
public:
    IncompleteZerosError(const std::string& label, double lo, double hi, long expected, long found);
    std::string label;
    double window_lo, window_hi;
    long expected, found;
};

// zeta(s, a) = sum_{n >= 0} (n + a)^-s by Euler-Maclaurin after `terms` direct terms.
Evaluation hurwitz_zeta(cplx s, double a, int terms = 20);

// L(s, chi), chi primitive with q >= 3, via q^-s sum_a chi(a) zeta(s, a/q).
class LFunction {
public:
    explicit LFunction(DirichletCharacter chi);

    const DirichletCharacter& character() const { return chi_; }
    int kappa() const { return chi_.parity(); }
    cplx root_number() const { return eps_; }  // tau/(i^kappa sqrt q)

    Evaluation value(cplx s) const;
    // continuous log L(s) from the Euler product, Re s >= 2
    cplx log_euler(cplx s) const;
    // Z(t) = exp(i theta(t)) L(1/2+it) is real
    double theta(double t) const;

    struct ZValue {
        double z = 0.0;
        double imag = 0.0;  // residue of the rotation
        double error = 0.0;
    };
    ZValue hardy_z(double t) const;
    // Z at t0 + j h, j < count, with a shared head length
    std::vector<ZValue> hardy_z_grid(double t0, double h, int count) const;

    // argument-principle count of zeros with 0 < gamma <= T (real, near an integer)
    double zero_count(double T) const;

private:
    Evaluation eval(cplx s, std::int64_t N) const;
    std::int64_t head_index(double abs_s) const;
    cplx tails(cplx s, std::int64_t N, double* err) const;
    double arg_track(cplx a, cplx b) const;

    DirichletCharacter chi_;
    std::vector<cplx> vals_;
    cplx eps_;
    double log_q_over_pi_;
};

Evaluation l_value(cplx s, const DirichletCharacter& chi);
// throws PrecisionError when the imaginary residue exceeds 1e-9
double hardy_z(double t, const DirichletCharacter& chi);

struct ZeroTable {
    std::int64_t q = 0;
    std::string label;
    double height_max = 0.0;
    std::vector<double> zeros;    // sorted ordinates, |gamma| <= height_max
    std::vector<double> abs_err;
    bool completeness_checked = false;

    // indexing: gamma_{-1} < 0 <= gamma_1
    std::vector<int> indices() const;
    std::vector<double> positives() const;  // gamma >= 0
    std::vector<double> negatives() const;  // gamma < 0
    ZeroTable truncated(double T) const;
};

// Zeros with t_lo < gamma <= t_hi of L(s, chi), checked against the argument
// principle count on that window when `check` is set.
struct ZeroSearch {
    std::vector<double> gamma;
    std::vector<double> abs_err;
    bool complete = false;
};
ZeroSearch find_positive_zeros(const LFunction& L, double t_lo, double t_hi, bool check = true);

// All zeros with |gamma| <= T; negatives come from the conjugate character.
ZeroTable find_zeros(const DirichletCharacter& chi, double T);

// On-disk cache: zeros.csv (q,char_label,index,gamma,abs_err) and
// zeros_coverage.csv (q,char_label,height_max,complete).
class ZeroCache {
public:
    explicit ZeroCache(std::filesystem::path dir);
    const std::filesystem::path& dir() const { return dir_; }
    void load();
    void save() const;
    std::optional<ZeroTable> get(const std::string& label, double T) const;
    const ZeroTable* find(const std::string& label) const;
    void put(const ZeroTable& t);
    std::size_t size() const { return tables_.size(); }

private:
    std::filesystem::path dir_;
    std::map<std::string, ZeroTable> tables_;
};

// Cache directory from NLEVEL_CACHE, else `fallback`.
std::filesystem::path default_cache_dir(const std::filesystem::path& fallback = ".nlevel_cache");

// Tables for every character, extending cached coverage only where missing.
// Work is split over `workers` threads by character; output is in label order.
std::vector<ZeroTable> zero_tables(const std::vector<DirichletCharacter>& chars, double T, int workers,
                                   ZeroCache* cache);

// Read a CSV in the cache schema (for published tables).
std::map<std::string, ZeroTable> import_zero_csv(const std::filesystem::path& file);
void write_zero_csv(const std::filesystem::path& file, const std::vector<ZeroTable>& tables);

struct ExplicitFormulaCheck {
    double zero_sum = 0.0;      // sum over |gamma| <= T of F(U(gamma - t))
    double prime_sum = 0.0;     // both prime-power sums
    double archimedean = 0.0;   // Fhat(0) log(q/pi)/log Q
    double e_f = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    double truncation_estimate = 0.0;  // expected size of the omitted zeros
    double height = 0.0;
    int zeros_used = 0;
};

// E_F(t) = (1/2 pi) int F(U(u - t)) Re psi((1/2 + iu + kappa)/2) du
double explicit_formula_EF(const ProductTestFunction& F, int kappa, double t, double Q);
double explicit_formula_EF_direct(const ProductTestFunction& F, int kappa, double t, double Q);

ExplicitFormulaCheck verify_explicit_formula(const DirichletCharacter& chi, const ProductTestFunction& F, double t,
                                             const ZeroTable& zeros, double Q);

}  // namespace nlevel
