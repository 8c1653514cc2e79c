#include "nlevel/lfunction.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "nlevel/arith.hpp"
#include "nlevel/quadrature.hpp"
#include "nlevel/special.hpp"

namespace nlevel {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSigmaEuler = 3.0;
constexpr std::int64_t kEulerPrimes = 10000;

cplx expm1c(cplx w)
{
    if (std::abs(w) < 1e-5) return w * (1.0 + w * (0.5 + w / 6.0));
    return std::exp(w) - 1.0;
}

struct Tail {
    cplx value;
    double error;
};

// sum_{n >= 0} (n + x)^-s approximated by Euler-Maclaurin at x; with
// drop_pole the constant -1/(s-1) is removed from the first term, which is
// harmless whenever the tails are combined with weights summing to zero.
Tail em_tail(cplx s, double x, bool drop_pole)
{
    const double lx = std::log(x);
    const cplx xs = std::exp(-s * lx);
    cplx first;
    if (drop_pole) {
        const cplx w = (1.0 - s) * lx;
        first = std::abs(w) == 0.0 ? cplx(-lx) : -lx * expm1c(w) / w;
    } else {
        first = x * xs / (s - 1.0);
    }
    cplx v = first + 0.5 * xs;
    cplx poch = s;
    double xp = 1.0 / x;
    double prev = INFINITY;
    auto coef = [](int k) { return boost::math::bernoulli_b2n<double>(k) / boost::math::factorial<double>(2 * k); };
    // usual Euler-Maclaurin remainder factor for stopping after order 2k
    auto fac = [&](int k) { return std::abs(s + double(2 * k + 1)) / std::max(1.0, s.real() + 2 * k + 1); };
    for (int k = 1; k <= 40; ++k) {
        const cplx term = coef(k) * poch * xs * xp;
        const double at = std::abs(term);
        if (at > prev) return {v, prev * fac(k - 1)};  // asymptotic series has started to grow
        v += term;
        prev = at;
        poch *= (s + double(2 * k - 1)) * (s + double(2 * k));
        xp /= x * x;
        if (at < 1e-18 * std::abs(v)) return {v, std::abs(coef(k + 1) * poch * xs * xp) * fac(k)};
    }
    return {v, prev * fac(40)};
}

const std::vector<std::int64_t>& euler_primes()
{
    static const std::vector<std::int64_t> p = primes_upto(kEulerPrimes);
    return p;
}

std::string label_key(const std::string& label)
{
    // numeric sort key for "q.k"
    const auto dot = label.find('.');
    char buf[64];
    std::snprintf(buf, sizeof buf, "%012lld.%012lld", std::atoll(label.substr(0, dot).c_str()),
                  std::atoll(label.substr(dot + 1).c_str()));
    return buf;
}

}  // namespace

IncompleteZerosError::IncompleteZerosError(const std::string& lab, double lo, double hi, long exp, long fnd)
    : std::runtime_error("incomplete zero list for " + lab + ": window (" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "] has " + std::to_string(fnd) + " sign changes, argument principle gives " +
                         std::to_string(exp)),
      label(lab), window_lo(lo), window_hi(hi), expected(exp), found(fnd)
{
}

Evaluation hurwitz_zeta(cplx s, double a, int terms)
{
    if (std::abs(s - 1.0) < 1e-15) throw std::domain_error("hurwitz_zeta: pole at s = 1");
    if (!(a > 0.0 && a <= 1.0)) throw std::domain_error("hurwitz_zeta: a must lie in (0, 1]");
    const int need = static_cast<int>(std::ceil((std::abs(s) + 32.0) / 2.2));
    const int N = std::max(terms, need);
    cplx head = 0.0;
    double mag = 0.0;
    for (int n = 0; n < N; ++n) {
        const cplx t = std::exp(-s * std::log(n + a));
        head += t;
        mag += std::abs(t);
    }
    auto tail = em_tail(s, N + a, false);
    const double round = 2.2e-16 * (8.0 + std::abs(s.imag()) * std::log(N + a)) * (mag + std::abs(tail.value));
    return {head + tail.value, tail.error + round};
}

LFunction::LFunction(DirichletCharacter chi) : chi_(std::move(chi))
{
    if (!chi_.primitive() || chi_.q() < 3) throw std::domain_error("LFunction: needs a primitive character with q >= 3");
    vals_ = chi_.values();
    const double q = static_cast<double>(chi_.q());
    const cplx tau = gauss_sum(chi_);
    eps_ = tau / ((kappa() ? cplx(0.0, 1.0) : cplx(1.0)) * std::sqrt(q));
    log_q_over_pi_ = std::log(q / kPi);
}

std::int64_t LFunction::head_index(double abs_s) const
{
    return std::max<std::int64_t>(4, static_cast<std::int64_t>(std::ceil((abs_s + 32.0) / 2.2)));
}

cplx LFunction::tails(cplx s, std::int64_t N, double* err) const
{
    const std::int64_t q = chi_.q();
    const double dq = static_cast<double>(q);
    cplx acc = 0.0;
    double e = 0.0;
    for (std::int64_t a = 1; a < q; ++a) {
        if (vals_[a] == 0.0) continue;
        auto t = em_tail(s, double(N) + double(a) / dq, true);
        acc += vals_[a] * t.value;
        e += t.error;
    }
    const cplx qs = std::exp(-s * std::log(dq));
    if (err) *err = e * std::abs(qs);
    return qs * acc;
}

Evaluation LFunction::eval(cplx s, std::int64_t N) const
{
    const std::int64_t q = chi_.q();
    cplx head = 0.0;
    double mag = 0.0;
    for (std::int64_t n = 1; n <= N * q; ++n) {
        const cplx c = vals_[n % q];
        if (c == 0.0) continue;
        const cplx t = c * std::exp(-s * std::log(double(n)));
        head += t;
        mag += std::abs(t);
    }
    double terr = 0.0;
    const cplx tl = tails(s, N, &terr);
    const double round = 2.2e-16 * (8.0 + std::abs(s.imag()) * std::log(double(N * q))) * (mag + std::abs(tl));
    return {head + tl, terr + round};
}

Evaluation LFunction::value(cplx s) const { return eval(s, head_index(std::abs(s))); }

cplx LFunction::log_euler(cplx s) const
{
    if (s.real() < 2.0) throw std::domain_error("log_euler: requires Re s >= 2");
    const std::int64_t q = chi_.q();
    cplx acc = 0.0;
    for (std::int64_t p : euler_primes()) {
        const cplx c = vals_[p % q];
        if (c == 0.0) continue;
        acc -= std::log(1.0 - c * std::exp(-s * std::log(double(p))));
    }
    return acc;
}

double LFunction::theta(double t) const
{
    const cplx z(0.25 + 0.5 * kappa(), 0.5 * t);
    return log_gamma(z).imag() + 0.5 * t * log_q_over_pi_ - 0.5 * std::arg(eps_);
}

LFunction::ZValue LFunction::hardy_z(double t) const
{
    auto v = value(cplx(0.5, t));
    const cplx z = std::polar(1.0, theta(t)) * v.value;
    return {z.real(), z.imag(), v.error};
}

std::vector<LFunction::ZValue> LFunction::hardy_z_grid(double t0, double h, int count) const
{
    std::vector<ZValue> out;
    if (count <= 0) return out;
    const double tmax = std::max(std::abs(t0), std::abs(t0 + h * (count - 1)));
    const std::int64_t N = head_index(std::abs(cplx(0.5, tmax)));
    const std::int64_t q = chi_.q();
    std::vector<cplx> ph, mult;
    double mag = 0.0;
    for (std::int64_t n = 1; n <= N * q; ++n) {
        const cplx c = vals_[n % q];
        if (c == 0.0) continue;
        const double ln = std::log(double(n));
        ph.push_back(c * std::polar(std::exp(-0.5 * ln), -t0 * ln));
        mult.push_back(std::polar(1.0, -h * ln));
        mag += std::exp(-0.5 * ln);
    }
    out.reserve(count);
    for (int j = 0; j < count; ++j) {
        const double t = t0 + h * j;
        const cplx s(0.5, t);
        cplx head = 0.0;
        for (std::size_t i = 0; i < ph.size(); ++i) {
            head += ph[i];
            ph[i] *= mult[i];
        }
        double terr = 0.0;
        const cplx L = head + tails(s, N, &terr);
        const double round = 2.2e-16 * (8.0 + (std::abs(t) + j) * std::log(double(N * q))) * mag;
        const cplx z = std::polar(1.0, theta(t)) * L;
        out.push_back({z.real(), z.imag(), terr + round});
    }
    return out;
}

double LFunction::arg_track(cplx a, cplx b) const
{
    double total = 0.0, tau = 0.0, dt = 1.0 / 32.0;
    cplx cur = value(a).value;
    if (cur == 0.0) throw PrecisionError("arg_track: L vanishes on the path");
    while (tau < 1.0) {
        const double nt = std::min(1.0, tau + dt);
        const cplx nv = value(a + (b - a) * nt).value;
        if (nv == 0.0) throw PrecisionError("arg_track: L vanishes on the path");
        const double d = std::arg(nv / cur);
        if (std::abs(d) > 0.5 && dt > 1e-7) {
            dt *= 0.5;
            continue;
        }
        total += d;
        cur = nv;
        tau = nt;
        dt = std::min(1.0 / 16.0, dt * 2.0);
    }
    return total;
}

double LFunction::zero_count(double T) const
{
    const cplx half(0.5, 0.0), top_half(0.5, T), right(kSigmaEuler, 0.0), top_right(kSigmaEuler, T);
    const double arg_half = log_euler(right).imag() + arg_track(right, half);
    const double arg_top = log_euler(top_right).imag() + arg_track(top_right, top_half);
    const double gamma_part = log_gamma(cplx(0.25 + 0.5 * kappa(), 0.5 * T)).imag() + 0.5 * T * log_q_over_pi_;
    return (gamma_part + arg_top - arg_half) / kPi;
}

Evaluation l_value(cplx s, const DirichletCharacter& chi) { return LFunction(chi).value(s); }

double hardy_z(double t, const DirichletCharacter& chi)
{
    auto z = LFunction(chi).hardy_z(t);
    if (std::abs(z.imag) > 1e-9) throw PrecisionError("hardy_z: imaginary residue " + std::to_string(z.imag));
    return z.z;
}

// ------------------------------------------------------------------ tables

std::vector<int> ZeroTable::indices() const
{
    std::vector<int> out(zeros.size());
    const auto first_pos = std::lower_bound(zeros.begin(), zeros.end(), 0.0) - zeros.begin();
    for (std::size_t i = 0; i < zeros.size(); ++i) {
        const long k = static_cast<long>(i) - first_pos;
        out[i] = static_cast<int>(k >= 0 ? k + 1 : k);
    }
    return out;
}

std::vector<double> ZeroTable::positives() const
{
    std::vector<double> out;
    for (double g : zeros)
        if (g >= 0.0) out.push_back(g);
    return out;
}

std::vector<double> ZeroTable::negatives() const
{
    std::vector<double> out;
    for (double g : zeros)
        if (g < 0.0) out.push_back(g);
    return out;
}

ZeroTable ZeroTable::truncated(double T) const
{
    ZeroTable r = *this;
    r.zeros.clear();
    r.abs_err.clear();
    for (std::size_t i = 0; i < zeros.size(); ++i)
        if (std::abs(zeros[i]) <= T) {
            r.zeros.push_back(zeros[i]);
            r.abs_err.push_back(abs_err[i]);
        }
    r.height_max = std::min(T, height_max);
    return r;
}

namespace {

struct Bracketed {
    double lo, hi, zlo, zhi;
};

std::vector<Bracketed> scan(const LFunction& L, double t_lo, double t_hi, double refine)
{
    const double q = static_cast<double>(L.character().q());
    auto step = [&](double t) { return 0.2 / std::log(q * (std::abs(t) + 10.0)) / refine; };
    std::vector<Bracketed> out;
    double t = t_lo;
    double zprev = NAN;
    while (t < t_hi) {
        const double h0 = step(std::min(t_hi, t + 512 * step(t)));
        int count = static_cast<int>(std::ceil((t_hi - t) / h0));
        double h = h0;
        if (count <= 512) h = (t_hi - t) / count;
        else count = 512;
        auto z = L.hardy_z_grid(t, h, count + 1);
        if (std::isnan(zprev)) zprev = z[0].z;
        for (int j = 1; j <= count; ++j) {
            const double a = t + h * (j - 1), b = t + h * j;
            if (zprev * z[j].z < 0.0 || (z[j].z == 0.0 && zprev != 0.0)) out.push_back({a, b, zprev, z[j].z});
            zprev = z[j].z;
        }
        t = t + h * count;
        if (count < 512) break;
    }
    return out;
}

ZeroSearch refine_roots(const LFunction& L, const std::vector<Bracketed>& br)
{
    ZeroSearch r;
    for (const auto& b : br) {
        if (b.zhi == 0.0) {
            r.gamma.push_back(b.hi);
            r.abs_err.push_back(L.hardy_z(b.hi).error);
            continue;
        }
        auto f = [&](double t) { return L.hardy_z(t).z; };
        std::uintmax_t iters = 100;
        auto tol = [](double x, double y) { return std::abs(y - x) < 2e-11; };
        auto [lo, hi] = boost::math::tools::toms748_solve(f, b.lo, b.hi, b.zlo, b.zhi, tol, iters);
        const double g = 0.5 * (lo + hi);
        const double slope = std::abs(b.zhi - b.zlo) / (b.hi - b.lo);
        const double zerr = L.hardy_z(g).error;
        r.gamma.push_back(g);
        r.abs_err.push_back(0.5 * (hi - lo) + (slope > 0 ? zerr / slope : 1.0));
    }
    return r;
}

long rounded_count(const LFunction& L, double T)
{
    if (T <= 0.0) return 0;
    return std::lround(L.zero_count(T));
}

}  // namespace

ZeroSearch find_positive_zeros(const LFunction& L, double t_lo, double t_hi, bool check)
{
    if (!(t_hi > t_lo) || t_lo < 0.0) throw std::domain_error("find_positive_zeros: need 0 <= t_lo < t_hi");
    ZeroSearch r = refine_roots(L, scan(L, t_lo, t_hi, 1.0));
    if (!check) return r;
    const long expected = rounded_count(L, t_hi) - rounded_count(L, t_lo);
    if (static_cast<long>(r.gamma.size()) == expected) {
        r.complete = true;
        return r;
    }
    // recovery: rescan short windows with finer grids where counts disagree
    const int windows = std::max(1, static_cast<int>(std::ceil((t_hi - t_lo) / 4.0)));
    ZeroSearch out;
    long prev_count = rounded_count(L, t_lo);
    for (int w = 0; w < windows; ++w) {
        const double a = t_lo + (t_hi - t_lo) * w / windows, b = t_lo + (t_hi - t_lo) * (w + 1) / windows;
        const long cb = rounded_count(L, b);
        const long want = cb - prev_count;
        prev_count = cb;
        ZeroSearch part;
        double refine = 1.0;
        for (int level = 0; level < 4; ++level, refine *= 4.0) {
            part = refine_roots(L, scan(L, a, b, refine));
            if (static_cast<long>(part.gamma.size()) == want) break;
        }
        if (static_cast<long>(part.gamma.size()) != want)
            throw IncompleteZerosError(L.character().label(), a, b, want, static_cast<long>(part.gamma.size()));
        out.gamma.insert(out.gamma.end(), part.gamma.begin(), part.gamma.end());
        out.abs_err.insert(out.abs_err.end(), part.abs_err.begin(), part.abs_err.end());
    }
    out.complete = true;
    return out;
}

namespace {

ZeroTable assemble(const DirichletCharacter& chi, double T, const ZeroSearch& pos, const ZeroSearch& conj_pos)
{
    ZeroTable t;
    t.q = chi.q();
    t.label = chi.label();
    t.height_max = T;
    std::vector<std::pair<double, double>> z;
    for (std::size_t i = 0; i < pos.gamma.size(); ++i)
        if (pos.gamma[i] <= T) z.push_back({pos.gamma[i], pos.abs_err[i]});
    for (std::size_t i = 0; i < conj_pos.gamma.size(); ++i)
        if (conj_pos.gamma[i] > 0.0 && conj_pos.gamma[i] <= T) z.push_back({-conj_pos.gamma[i], conj_pos.abs_err[i]});
    std::sort(z.begin(), z.end());
    for (auto [g, e] : z) {
        t.zeros.push_back(g);
        t.abs_err.push_back(e);
    }
    t.completeness_checked = pos.complete && conj_pos.complete;
    return t;
}

}  // namespace

ZeroTable find_zeros(const DirichletCharacter& chi, double T)
{
    if (!(T > 0.0)) throw std::domain_error("find_zeros: T must be positive");
    LFunction L(chi);
    auto pos = find_positive_zeros(L, 0.0, T);
    if (chi.is_real()) return assemble(chi, T, pos, pos);
    LFunction Lc(chi.conj());
    auto neg = find_positive_zeros(Lc, 0.0, T);
    return assemble(chi, T, pos, neg);
}

// ------------------------------------------------------------------ cache

ZeroCache::ZeroCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

void ZeroCache::load()
{
    tables_.clear();
    const auto zf = dir_ / "zeros.csv", cf = dir_ / "zeros_coverage.csv";
    if (!std::filesystem::exists(zf) || !std::filesystem::exists(cf)) return;
    tables_ = import_zero_csv(zf);
    std::ifstream in(cf);
    std::string line;
    std::getline(in, line);
    std::map<std::string, std::pair<double, bool>> cover;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string q, lab, h, c;
        std::getline(ss, q, ',');
        std::getline(ss, lab, ',');
        std::getline(ss, h, ',');
        std::getline(ss, c, ',');
        cover[lab] = {std::stod(h), c == "1"};
        auto& t = tables_[lab];
        t.q = std::stoll(q);
        t.label = lab;
    }
    for (auto it = tables_.begin(); it != tables_.end();) {
        auto c = cover.find(it->first);
        if (c == cover.end()) {
            it = tables_.erase(it);  // rows without coverage are not trusted
            continue;
        }
        it->second.height_max = c->second.first;
        it->second.completeness_checked = c->second.second;
        ++it;
    }
}

void ZeroCache::save() const
{
    std::filesystem::create_directories(dir_);
    std::vector<ZeroTable> v;
    for (const auto& [k, t] : tables_) v.push_back(t);
    write_zero_csv(dir_ / "zeros.csv.tmp", v);
    std::filesystem::rename(dir_ / "zeros.csv.tmp", dir_ / "zeros.csv");
    std::vector<std::pair<std::string, const ZeroTable*>> order;
    for (const auto& [k, t] : tables_) order.push_back({label_key(k), &t});
    std::sort(order.begin(), order.end());
    {
        std::ofstream out(dir_ / "zeros_coverage.csv.tmp");
        out << "q,char_label,height_max,complete\n";
        char buf[64];
        for (const auto& [k, t] : order) {
            std::snprintf(buf, sizeof buf, "%.17g", t->height_max);
            out << t->q << ',' << t->label << ',' << buf << ',' << (t->completeness_checked ? 1 : 0) << '\n';
        }
    }
    std::filesystem::rename(dir_ / "zeros_coverage.csv.tmp", dir_ / "zeros_coverage.csv");
}

std::optional<ZeroTable> ZeroCache::get(const std::string& label, double T) const
{
    auto it = tables_.find(label);
    if (it == tables_.end() || it->second.height_max < T) return std::nullopt;
    return it->second.truncated(T);
}

const ZeroTable* ZeroCache::find(const std::string& label) const
{
    auto it = tables_.find(label);
    return it == tables_.end() ? nullptr : &it->second;
}

void ZeroCache::put(const ZeroTable& t) { tables_[t.label] = t; }

std::filesystem::path default_cache_dir(const std::filesystem::path& fallback)
{
    if (const char* e = std::getenv("NLEVEL_CACHE"); e && *e) return e;
    return fallback;
}

std::map<std::string, ZeroTable> import_zero_csv(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open zero table " + file.string());
    std::string line;
    std::getline(in, line);
    if (line.rfind("q,char_label,index,gamma,abs_err", 0) != 0)
        throw std::runtime_error("unexpected zero table header in " + file.string());
    std::map<std::string, ZeroTable> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string q, lab, idx, g, e;
        std::getline(ss, q, ',');
        std::getline(ss, lab, ',');
        std::getline(ss, idx, ',');
        std::getline(ss, g, ',');
        std::getline(ss, e, ',');
        auto& t = out[lab];
        t.q = std::stoll(q);
        t.label = lab;
        t.zeros.push_back(std::stod(g));
        t.abs_err.push_back(std::stod(e));
        t.height_max = std::max(t.height_max, std::abs(t.zeros.back()));
    }
    for (auto& [k, t] : out) {
        std::vector<std::size_t> p(t.zeros.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = i;
        std::sort(p.begin(), p.end(), [&](auto a, auto b) { return t.zeros[a] < t.zeros[b]; });
        std::vector<double> z, e;
        for (auto i : p) {
            z.push_back(t.zeros[i]);
            e.push_back(t.abs_err[i]);
        }
        t.zeros = z;
        t.abs_err = e;
    }
    return out;
}

void write_zero_csv(const std::filesystem::path& file, const std::vector<ZeroTable>& tables)
{
    std::vector<std::pair<std::string, const ZeroTable*>> order;
    for (const auto& t : tables) order.push_back({label_key(t.label), &t});
    std::sort(order.begin(), order.end());
    std::ofstream out(file);
    out << "q,char_label,index,gamma,abs_err\n";
    char buf[128];
    for (const auto& [k, t] : order) {
        const auto idx = t->indices();
        for (std::size_t i = 0; i < t->zeros.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%lld,%s,%d,%.17g,%.3e", static_cast<long long>(t->q), t->label.c_str(), idx[i],
                          t->zeros[i], t->abs_err[i]);
            out << buf << '\n';
        }
    }
}

std::vector<ZeroTable> zero_tables(const std::vector<DirichletCharacter>& chars, double T, int workers,
                                   ZeroCache* cache)
{
    // positive ordinates needed for every character and its conjugate
    std::map<std::string, DirichletCharacter> need;
    for (const auto& c : chars) {
        need.emplace(c.label(), c);
        if (!c.is_real()) {
            auto cc = c.conj();
            need.emplace(cc.label(), cc);
        }
    }
    struct Job {
        DirichletCharacter chi;
        ZeroSearch known;
        double from = 0.0;
        bool known_complete = true;
        ZeroSearch result;
        std::string error;
    };
    std::vector<Job> jobs;
    for (const auto& [lab, c] : need) {
        Job j{c, {}, 0.0, true, {}, {}};
        if (cache) {
            // positive ordinates may come from this table or from the conjugate's negatives
            auto take = [&](const ZeroTable* t, bool from_conj) {
                if (!t || t->height_max <= j.from) return;
                ZeroSearch s;
                for (std::size_t i = 0; i < t->zeros.size(); ++i) {
                    const double g = from_conj ? -t->zeros[i] : t->zeros[i];
                    if (g > 0.0 || (!from_conj && g == 0.0)) {
                        s.gamma.push_back(g);
                        s.abs_err.push_back(t->abs_err[i]);
                    }
                }
                std::vector<std::size_t> p(s.gamma.size());
                for (std::size_t i = 0; i < p.size(); ++i) p[i] = i;
                std::sort(p.begin(), p.end(), [&](auto a, auto b) { return s.gamma[a] < s.gamma[b]; });
                j.known = {};
                for (auto i : p) {
                    if (s.gamma[i] > std::min(T, t->height_max)) continue;
                    j.known.gamma.push_back(s.gamma[i]);
                    j.known.abs_err.push_back(s.abs_err[i]);
                }
                j.from = std::min(T, t->height_max);
                j.known_complete = t->completeness_checked;
            };
            take(cache->find(lab), false);
            if (!c.is_real()) take(cache->find(c.conj().label()), true);
        }
        jobs.push_back(std::move(j));
    }
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            auto& j = jobs[i];
            try {
                j.result = j.known;
                j.result.complete = j.known_complete;
                if (j.from < T) {
                    LFunction L(j.chi);
                    auto s = find_positive_zeros(L, j.from, T);
                    j.result.gamma.insert(j.result.gamma.end(), s.gamma.begin(), s.gamma.end());
                    j.result.abs_err.insert(j.result.abs_err.end(), s.abs_err.begin(), s.abs_err.end());
                    j.result.complete = j.known_complete && s.complete;
                }
            } catch (const std::exception& e) {
                j.error = e.what();
            }
        }
    };
    const int nw = std::max(1, workers);
    std::vector<std::thread> pool;
    for (int w = 1; w < nw; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    std::map<std::string, const Job*> by_label;
    for (const auto& j : jobs) {
        if (!j.error.empty()) throw std::runtime_error(j.error);
        by_label[j.chi.label()] = &j;
    }
    std::vector<ZeroTable> out;
    for (const auto& c : chars) {
        const auto& pos = by_label.at(c.label())->result;
        const auto& neg = c.is_real() ? pos : by_label.at(c.conj().label())->result;
        out.push_back(assemble(c, T, pos, neg));
        if (cache) {
            const ZeroTable* old = cache->find(c.label());
            if (!old || old->height_max < T) cache->put(out.back());
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return label_key(a.label) < label_key(b.label); });
    return out;
}

// ------------------------------------------------------------ explicit formula

double explicit_formula_EF(const ProductTestFunction& F, int kappa, double t, double Q)
{
    const double L = std::log(Q);
    const double a = 0.25 + 0.5 * kappa;
    const double f0 = F.fhat(0.0);
    const double X = 2.0 * F.kappa() * L;
    // Re psi(a + i t/2) = int_0^inf (e^-x/x - e^{-a x} cos(t x/2)/(1 - e^-x)) dx, and the
    // cosine transform of F(U(u - t)) turns the second part into Fhat(x/(2 log Q))
    auto g = [&](double x) {
        return f0 * std::exp(-x) / x - std::exp(-a * x) * std::cos(0.5 * t * x) * F.fhat(x / (2.0 * L)) / (-std::expm1(-x));
    };
    std::vector<double> br{0.0};
    for (double u : F.fhat().breaks()) br.push_back(2.0 * L * u);
    const double width = std::min(0.5, 2.0 / (1.0 + std::abs(t)));
    std::vector<double> fine;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        const int n = std::max(1, static_cast<int>(std::ceil((br[i + 1] - br[i]) / width)));
        for (int k = 0; k < n; ++k) fine.push_back(br[i] + (br[i + 1] - br[i]) * k / n);
    }
    fine.push_back(X);
    const double body = integrate_gl_panels(g, fine, 24);
    return (body + f0 * boost::math::expint(1, X)) / L;
}

double explicit_formula_EF_direct(const ProductTestFunction& F, int kappa, double t, double Q)
{
    const double U = std::log(Q) / (2.0 * kPi);
    auto g = [&](double v) {
        return F.f(v) * digamma(cplx(0.25 + 0.5 * kappa, 0.5 * (t + v / U))).real();
    };
    std::vector<double> br;
    const double V = 4000.0;
    for (double v = -V; v <= V + 1e-9; v += 0.25) br.push_back(v);
    return integrate_gl_panels(g, br, 10) / (2.0 * kPi * U);
}

ExplicitFormulaCheck verify_explicit_formula(const DirichletCharacter& chi, const ProductTestFunction& F, double t,
                                             const ZeroTable& zeros, double Q)
{
    if (!(Q > 1.0)) throw std::domain_error("verify_explicit_formula: Q must exceed 1");
    ExplicitFormulaCheck r;
    const double L = std::log(Q), U = L / (2.0 * kPi);
    for (double g : zeros.zeros) r.zero_sum += F.f(U * (g - t));
    r.zeros_used = static_cast<int>(zeros.zeros.size());
    r.height = zeros.height_max;
    const double mmax = std::exp(F.kappa() * L);
    const auto vals = chi.values();
    const std::int64_t q = chi.q();
    double ps = 0.0;
    for (const auto& pp : prime_powers_upto(static_cast<std::int64_t>(std::floor(mmax * (1 + 1e-12))))) {
        const cplx c = vals[pp.m % q];
        if (c == 0.0) continue;
        const double lm = std::log(double(pp.m));
        const double fh = F.fhat(lm / L);
        if (fh == 0.0) continue;
        ps += std::log(double(pp.p)) * 2.0 * (c * std::polar(std::exp(-0.5 * lm), -t * lm)).real() * fh;
    }
    r.prime_sum = -ps / L;
    r.archimedean = F.fhat(0.0) * std::log(double(q) / kPi) / L;
    r.e_f = explicit_formula_EF(F, chi.parity(), t, Q);
    r.rhs = r.prime_sum + r.archimedean + r.e_f;
    r.residual = std::abs(r.zero_sum - r.rhs);
    const double T = zeros.height_max;
    if (T > std::abs(t)) {
        auto dens = [&](double g) {
            return F.envelope(U * (g - std::abs(t))) * std::log(std::max(2.0, double(q) * g / (2.0 * kPi))) / (2.0 * kPi);
        };
        boost::math::quadrature::exp_sinh<double> es;
        r.truncation_estimate = 2.0 * es.integrate([&](double x) { return dens(T + x); });
    } else {
        r.truncation_estimate = INFINITY;
    }
    return r;
}

}  // namespace nlevel
