#include "nlevel/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "nlevel/arith.hpp"
#include "nlevel/dirichlet.hpp"
#include "nlevel/lfunction.hpp"
#include "nlevel/nt_statistics.hpp"
#include "nlevel/prediction.hpp"
#include "nlevel/rmt_cue.hpp"
#include "nlevel/test_functions.hpp"

namespace nlevel {

namespace fs = std::filesystem;
using json = nlohmann::json;

ConfigError::ConfigError(std::string f, const std::string& what)
    : std::runtime_error("config field '" + f + "': " + what), field(std::move(f))
{
}

// ------------------------------------------------------------ parsing

namespace {

const std::set<std::string> kExperiments{"zeros", "empirical", "als",       "predict",
                                         "rmt",   "verify-explicit", "constants", "matchup"};

template <typename T>
T convert(const std::string& field, const std::string& s)
{
    T v{};
    std::istringstream in(s);
    in >> v;
    if (in.fail() || !(in >> std::ws).eof()) throw ConfigError(field, "cannot read '" + s + "'");
    return v;
}

template <typename T>
T scalar(const CLI::ConfigItem& it)
{
    if (it.inputs.size() != 1) throw ConfigError(it.fullname(), "expected a single value");
    return convert<T>(it.fullname(), it.inputs[0]);
}

template <typename T>
std::vector<T> list(const CLI::ConfigItem& it)
{
    std::vector<T> out;
    for (std::size_t i = 0; i < it.inputs.size(); ++i)
        out.push_back(convert<T>(it.fullname() + "[" + std::to_string(i) + "]", it.inputs[i]));
    return out;
}

bool boolean(const CLI::ConfigItem& it)
{
    const auto s = scalar<std::string>(it);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError(it.fullname(), "expected true or false");
}

}  // namespace

ExperimentConfig parse_config(std::istream& in)
{
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigTOML().from_config(in);
    } catch (const CLI::Error& e) {
        throw ConfigError("<file>", e.what());
    }
    ExperimentConfig c;
    bool have_version = false;
    for (const auto& it : items) {
        // CLI11 reports section headers as items named "++" / "--"
        if (it.name == "++" || it.name == "--") continue;
        if (!it.parents.empty()) throw ConfigError(it.fullname(), "sections are not part of the schema");
        const auto& k = it.name;
        if (k == "schema_version") {
            c.schema_version = scalar<int>(it);
            have_version = true;
        } else if (k == "experiment") c.experiment = scalar<std::string>(it);
        else if (k == "family") c.family = list<std::string>(it);
        else if (k == "Q") c.Q = list<double>(it);
        else if (k == "n") c.n = scalar<int>(it);
        else if (k == "N") c.N = list<int>(it);
        else if (k == "samples") c.samples = scalar<std::int64_t>(it);
        else if (k == "streams") c.streams = scalar<int>(it);
        else if (k == "seed") c.seed = scalar<std::uint64_t>(it);
        else if (k == "workers") c.workers = scalar<int>(it);
        else if (k == "tolerance") c.tolerance = scalar<double>(it);
        else if (k == "height") c.height = scalar<double>(it);
        else if (k == "t") c.t = list<double>(it);
        else if (k == "qmax") c.qmax = scalar<int>(it);
        else if (k == "k") c.k = scalar<int>(it);
        else if (k == "r") c.r = scalar<int>(it);
        else if (k == "P") c.P = scalar<std::int64_t>(it);
        else if (k == "statistic") c.statistic = scalar<std::string>(it);
        else if (k == "gh_order") c.gh_order = scalar<int>(it);
        else if (k == "out") c.out = scalar<std::string>(it);
        else if (k == "cache") c.cache = fs::path(scalar<std::string>(it));
        else if (k == "csv") c.csv = boolean(it);
        else throw ConfigError(k, "unknown field");
    }
    if (!have_version) throw ConfigError("schema_version", "missing");
    if (c.schema_version != kSchemaVersion)
        throw ConfigError("schema_version", "unsupported version " + std::to_string(c.schema_version));
    return c;
}

ExperimentConfig load_config(const fs::path& file)
{
    std::ifstream in(file);
    if (!in) throw ConfigError("<file>", "cannot open " + file.string());
    return parse_config(in);
}

void validate(const ExperimentConfig& c)
{
    if (!kExperiments.count(c.experiment)) throw ConfigError("experiment", "unknown experiment '" + c.experiment + "'");
    const bool needs_family = c.experiment != "zeros" && c.experiment != "constants";
    if (needs_family) {
        if (c.family.empty()) throw ConfigError("family", "required for " + c.experiment);
        for (std::size_t i = 0; i < c.family.size(); ++i) {
            try {
                (void)parse_test_function(c.family[i]);
            } catch (const std::exception& e) {
                throw ConfigError("family[" + std::to_string(i) + "]", e.what());
            }
        }
        auto chk = check_c4(parse_family(c.family));
        if (!chk.ok) {
            throw ConfigError(chk.violating_index >= 0 ? "family[" + std::to_string(chk.violating_index) + "]" : "family",
                              chk.message);
        }
        if (c.n != 0 && c.n != static_cast<int>(c.family.size()))
            throw ConfigError("n", "does not match the family size " + std::to_string(c.family.size()));
    }
    auto need_Q = [&] {
        if (c.Q.empty()) throw ConfigError("Q", "required for " + c.experiment);
    };
    for (std::size_t i = 0; i < c.Q.size(); ++i)
        if (!(c.Q[i] >= 2.0)) throw ConfigError("Q[" + std::to_string(i) + "]", "must be at least 2");
    for (std::size_t i = 0; i < c.N.size(); ++i)
        if (c.N[i] < 2 || c.N[i] > 200) throw ConfigError("N[" + std::to_string(i) + "]", "must lie in [2, 200]");
    if (c.workers < 1) throw ConfigError("workers", "must be positive");
    if (c.streams < 1) throw ConfigError("streams", "must be positive");
    if (!(c.height > 0.0)) throw ConfigError("height", "must be positive");
    if (c.experiment == "zeros" || c.experiment == "empirical" || c.experiment == "als") need_Q();
    if (c.experiment == "rmt") {
        if (c.N.empty()) throw ConfigError("N", "required for rmt");
        if (c.samples < 2) throw ConfigError("samples", "need at least 2");
    }
    if (c.experiment == "empirical" && c.statistic != "L0" && c.statistic != "L1")
        throw ConfigError("statistic", "must be L0 or L1");
    if (c.experiment == "als") {
        if (c.k < 1 || c.r < 1) throw ConfigError("k", "k and r must be positive");
        if (static_cast<int>(c.family.size()) != c.k + c.r)
            throw ConfigError("family", "als needs k + r = " + std::to_string(c.k + c.r) + " entries");
        if (c.P < 1 || !is_squarefree(c.P)) throw ConfigError("P", "must be a squarefree positive integer");
    }
    if (c.experiment == "verify-explicit" && c.qmax < 3) throw ConfigError("qmax", "must be at least 3");
}

std::string experiment_id(const ExperimentConfig& c)
{
    std::ostringstream s;
    s << std::setprecision(17);
    s << "v" << c.schema_version << "|" << c.experiment << "|";
    for (const auto& f : c.family) s << f << ",";
    s << "|Q";
    for (double q : c.Q) s << q << ",";
    s << "|N";
    for (int n : c.N) s << n << ",";
    s << "|" << c.samples << "|" << c.streams << "|" << c.seed << "|" << c.tolerance << "|" << c.height << "|t";
    for (double t : c.t) s << t << ",";
    s << "|" << c.qmax << "|" << c.k << "|" << c.r << "|" << c.P << "|" << c.statistic << "|" << c.gh_order;
    // FNV-1a, 64 bit
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s.str()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return c.experiment + "-" + buf;
}

fs::path resolve_cache_dir(const ExperimentConfig& c)
{
    if (c.cache) return *c.cache;
    return default_cache_dir(".nlevel_cache");
}

// ------------------------------------------------------------ experiments

namespace {

std::vector<DirichletCharacter> family_characters(double Q)
{
    std::vector<DirichletCharacter> out;
    for (auto q : family_moduli(WeightFunction::bump(), Q))
        for (const auto& chi : enumerate_primitive(q)) out.push_back(chi);
    return out;
}

std::string zeros_hint(double Q, double h)
{
    std::ostringstream s;
    s << "run `nlevel zeros --Q " << Q << " --height " << h << "` first";
    return s.str();
}

ZeroSource cached_source(const ZeroCache& cache, double Q, double height)
{
    ZeroSource src;
    src.height = height;
    for (const auto& chi : family_characters(Q)) {
        auto t = cache.get(chi.label(), height);
        if (!t) {
            const auto* have = cache.find(chi.label());
            std::ostringstream s;
            s << "zero cache " << cache.dir().string() << " lacks " << chi.label() << " to height " << height << " (has "
              << (have ? have->height_max : 0.0) << "); " << zeros_hint(Q, height);
            throw std::runtime_error(s.str());
        }
        src.tables.emplace(chi.label(), std::move(*t));
    }
    return src;
}

json run_zeros_for(const ExperimentConfig& c, ZeroCache& cache, double Q, std::ostream& log)
{
    const auto chars = family_characters(Q);
    int hits = 0;
    for (const auto& chi : chars) {
        const auto* t = cache.find(chi.label());
        if (t && t->height_max >= c.height) ++hits;
    }
    std::int64_t count = 0;
    if (hits == static_cast<int>(chars.size())) {
        log << "zeros Q=" << Q << ": all " << hits << " characters cached to height " << c.height << "\n";
        for (const auto& chi : chars) count += static_cast<std::int64_t>(cache.get(chi.label(), c.height)->zeros.size());
    } else {
        log << "zeros Q=" << Q << ": computing " << chars.size() - hits << " of " << chars.size() << " characters\n";
        for (const auto& t : zero_tables(chars, c.height, c.workers, &cache)) count += static_cast<std::int64_t>(t.zeros.size());
        cache.save();
    }
    return {{"Q", Q}, {"height", c.height}, {"characters", chars.size()}, {"cache_hits", hits},
            {"computed", static_cast<int>(chars.size()) - hits}, {"zeros", count}};
}

std::vector<json> run_zeros(const ExperimentConfig& c, std::ostream& log)
{
    ZeroCache cache(resolve_cache_dir(c));
    cache.load();
    std::vector<json> out;
    for (double Q : c.Q) out.push_back(run_zeros_for(c, cache, Q, log));
    return out;
}

json empirical_record(const ExperimentConfig& c, const C4Family& fam, const ZeroCache& cache, double Q,
                      double prediction, double prediction_error)
{
    const auto W = WeightFunction::bump();
    const auto src = cached_source(cache, Q, c.height);
    auto st = c.statistic == "L0" ? l0_statistic(fam, W, Q, src, c.workers)
                                  : l1_statistic(fam, W, Q, src, c.gh_order, c.workers);
    // L0 has no t-average, so its natural normaliser drops the sqrt(pi)
    const double D = d_weight_exact(W, Q) / (c.statistic == "L0" ? std::sqrt(std::numbers::pi) : 1.0);
    const double ratio = st.value / D;
    const double err = (st.quadrature_error + st.tail_estimate) / D;
    json rec = to_json(st);
    rec["D"] = D;
    rec["ratio"] = ratio;
    rec["ratio_error"] = err;
    rec["prediction"] = prediction;
    rec["prediction_error"] = prediction_error;
    rec["deviation"] = ratio - prediction;
    rec["deviation_error"] = err + prediction_error;
    return rec;
}

std::vector<json> run_empirical(const ExperimentConfig& c, std::ostream& log)
{
    const auto fam = parse_family(c.family);
    const auto pred = main_term(fam);
    ZeroCache cache(resolve_cache_dir(c));
    cache.load();
    std::vector<json> out;
    for (double Q : c.Q) {
        out.push_back(empirical_record(c, fam, cache, Q, pred.total, pred.error));
        log << "empirical Q=" << Q << ": " << c.statistic << "/D = " << out.back()["ratio"].get<double>() << " +- "
            << out.back()["ratio_error"].get<double>() << " (prediction " << pred.total << ")\n";
    }
    return out;
}

std::vector<json> run_als(const ExperimentConfig& c, std::ostream& log)
{
    const auto fam = parse_family(c.family);
    const auto W = WeightFunction::bump();
    std::vector<const EvenPiecewise*> tr;
    for (const auto& f : fam.functions) tr.push_back(&f.fhat());
    std::vector<int> S12, S22;
    for (int i = 0; i < c.k; ++i) S12.push_back(i);
    for (int i = c.k; i < c.k + c.r; ++i) S22.push_back(i);
    const auto I = I_integral(S12, S22, tr);
    const auto A = arithmetic_constant();
    double local = 1.0;
    for (auto [p, e] : factorize(c.P)) {
        const double x = double(p);
        local *= (1.0 - 1.0 / x) / (1.0 - 1.0 / (x * x) - 1.0 / (x * x * x));
    }
    const double W1 = W.mellin(1.0);
    std::vector<json> out;
    for (double Q : c.Q) {
        const double S = als_sum_exact(c.P, c.k, c.r, tr, W, Q);
        const double L = std::log(Q);
        const double main = Q * std::pow(L, c.k + c.r) * std::sqrt(std::numbers::pi) * W1 * A.extrapolated * local * I.value;
        const double ratio = S / main;
        const double ratio_error = std::abs(ratio) * (I.error / std::max(1e-300, std::abs(I.value)) + A.tail_bound);
        out.push_back({{"Q", Q}, {"k", c.k}, {"r", c.r}, {"P", c.P}, {"family", c.family}, {"value", S},
                       {"value_error", 1e-12 * std::abs(S)}, {"I_kr", I.value}, {"I_kr_error", I.error},
                       {"arithmetic_constant", A.extrapolated * local}, {"main_term", main}, {"ratio", ratio},
                       {"ratio_error", ratio_error}});
        log << "als Q=" << Q << ": S = " << S << ", ratio to leading term " << ratio << "\n";
    }
    return out;
}

std::vector<json> run_predict(const ExperimentConfig& c, std::ostream& log)
{
    const auto rep = main_term(parse_family(c.family));
    json rec = to_json(rep);
    rec["value"] = rep.total;
    rec["family"] = c.family;
    log << "main term " << rep.total << " +- " << rep.error << "\n";
    return {rec};
}

json rmt_record(const ExperimentConfig& c, const C4Family& fam, int N, const DensityResult& lim)
{
    const auto mc = cue_monte_carlo({fam}, N, c.samples, c.seed, c.streams, c.workers).at(0);
    const auto fd = finite_n_density(fam, N);
    json rec = to_json(mc);
    rec["family"] = c.family;
    rec["finite_n_density"] = fd.value;
    rec["finite_n_density_error"] = fd.error;
    rec["limit"] = lim.value;
    rec["limit_error"] = lim.error;
    rec["mc_minus_density"] = mc.mean - fd.value;
    rec["mc_minus_density_sigma"] = (mc.mean - fd.value) / mc.stderr_;
    return rec;
}

std::vector<json> run_rmt(const ExperimentConfig& c, std::ostream& log)
{
    const auto fam = parse_family(c.family);
    const auto lim = integral_f_wn(fam);
    std::vector<json> out;
    for (int N : c.N) {
        out.push_back(rmt_record(c, fam, N, lim));
        log << "rmt N=" << N << ": MC " << out.back()["mean"].get<double>() << " +- " << out.back()["stderr"].get<double>()
            << ", finite-N density " << out.back()["finite_n_density"].get<double>() << "\n";
    }
    return out;
}

std::vector<json> run_verify_explicit(const ExperimentConfig& c, std::ostream& log)
{
    const auto fam = parse_family(c.family);
    const ProductTestFunction F(fam.functions);
    std::vector<DirichletCharacter> chars;
    for (std::int64_t q = 3; q <= c.qmax; ++q)
        for (const auto& chi : enumerate_primitive(q)) chars.push_back(chi);
    ZeroCache cache(resolve_cache_dir(c));
    cache.load();
    bool missing = false;
    for (const auto& chi : chars)
        if (!cache.get(chi.label(), c.height)) missing = true;
    const auto tables = zero_tables(chars, c.height, c.workers, &cache);
    if (missing) cache.save();
    const std::vector<double> Qs = c.Q.empty() ? std::vector<double>{10.0} : c.Q;
    std::vector<json> out;
    double worst = 0.0;
    for (std::size_t i = 0; i < chars.size(); ++i) {
        const auto& z = tables[i];
        const auto& chi = *std::find_if(chars.begin(), chars.end(), [&](const auto& x) { return x.label() == z.label; });
        for (double Q : Qs)
            for (double t : c.t) {
                auto r = verify_explicit_formula(chi, F, t, z, Q);
                worst = std::max(worst, r.residual);
                out.push_back({{"label", chi.label()}, {"q", chi.q()}, {"t", t}, {"Q", Q}, {"family", c.family},
                               {"zero_sum", r.zero_sum}, {"prime_sum", r.prime_sum}, {"archimedean", r.archimedean},
                               {"e_f", r.e_f}, {"rhs", r.rhs}, {"residual", r.residual},
                               {"truncation_estimate", r.truncation_estimate}, {"height", r.height},
                               {"zeros_used", r.zeros_used}, {"within_tolerance", r.residual < c.tolerance}});
            }
    }
    log << "verify-explicit: " << out.size() << " checks, worst residual " << worst << " (tolerance " << c.tolerance << ")\n";
    return out;
}

std::vector<json> run_constants(const ExperimentConfig&, std::ostream& log)
{
    const auto A = arithmetic_constant();
    std::vector<json> out;
    out.push_back({{"name", "prod_p (1 - p^-2 - p^-3)"}, {"value", A.extrapolated}, {"partial", A.partial},
                   {"lower", A.lower}, {"upper", A.upper}, {"tail_bound", A.tail_bound}, {"p_max", A.p_max}});
    const auto b5 = euler_B5(1.0);
    out.push_back({{"name", "B5(1)"}, {"value", b5.value.real()}, {"imag", b5.value.imag()},
                   {"tail_bound", b5.tail_bound}, {"p_max", b5.p_max}});
    for (std::int64_t P : {1, 2, 6, 30, 210}) {
        const auto b6 = euler_B6(1.0, P);
        const cplx prod = euler_B4(-1.0, P) * b6.value;
        out.push_back({{"name", "B4(-1,P) B6(1,P)"}, {"P", P}, {"value", prod.real()}, {"imag", prod.imag()},
                       {"tail_bound", b6.tail_bound}});
    }
    log << "arithmetic constant " << std::setprecision(15) << A.extrapolated << " in [" << A.lower << ", " << A.upper
        << "]\n";
    return out;
}

std::vector<json> run_matchup(const ExperimentConfig& c, std::ostream& log)
{
    const auto fam = parse_family(c.family);
    const auto mt = main_term(fam);
    const auto rp = rmt_prediction(fam);
    const auto wn = integral_f_wn(fam);
    const double scale = std::max(std::abs(mt.total), 1e-300);
    const double rel = std::abs(mt.total - rp.total) / scale;
    json rec{{"family", c.family},
             {"n", fam.n()},
             {"main_term", {{"value", mt.total}, {"error", mt.error}, {"exact", mt.exact}}},
             {"rmt_prediction", {{"value", rp.total}, {"error", rp.error}, {"r0", rp.r0}, {"r1", rp.r1}}},
             {"integral_f_wn", {{"value", wn.value}, {"error", wn.error}}},
             {"main_minus_rmt", {{"value", mt.total - rp.total}, {"relative", rel}, {"budget", c.tolerance},
                                 {"error", mt.error + rp.error}, {"within_budget", rel < c.tolerance}}},
             {"main_minus_wn", {{"value", mt.total - wn.value}, {"error", mt.error + wn.error}}}};
    log << "matchup: main term " << mt.total << ", rmt " << rp.total << ", int f W " << wn.value << ", relative gap " << rel
        << "\n";
    rec["finite_n"] = json::array();
    for (int N : c.N) {
        const auto mc = cue_monte_carlo({fam}, N, c.samples, c.seed, c.streams, c.workers).at(0);
        const auto fd = finite_n_density(fam, N);
        rec["finite_n"].push_back({{"N", N},
                                   {"finite_n_density", {{"value", fd.value}, {"error", fd.error}}},
                                   {"monte_carlo", to_json(mc)},
                                   {"mc_minus_density", {{"value", mc.mean - fd.value}, {"stderr", mc.stderr_}}},
                                   {"density_minus_main", {{"value", fd.value - mt.total}, {"error", fd.error + mt.error}}}});
        log << "  N=" << N << ": finite-N density " << fd.value << ", MC " << mc.mean << " +- " << mc.stderr_ << "\n";
    }
    rec["empirical"] = json::array();
    if (!c.Q.empty()) {
        ZeroCache cache(resolve_cache_dir(c));
        cache.load();
        for (double Q : c.Q) {
            auto e = empirical_record(c, fam, cache, Q, mt.total, mt.error);
            rec["empirical"].push_back({{"Q", Q},
                                        {"ratio", {{"value", e["ratio"]}, {"error", e["ratio_error"]}}},
                                        {"ratio_minus_main", {{"value", e["deviation"]}, {"error", e["deviation_error"]}}}});
            log << "  Q=" << Q << ": " << c.statistic << "/D " << e["ratio"].get<double>() << "\n";
        }
    }
    return {rec};
}

void write_csv(const fs::path& file, const std::vector<json>& recs)
{
    std::vector<std::string> cols;
    for (const auto& r : recs)
        for (auto it = r.begin(); it != r.end(); ++it)
            if ((it->is_number() || it->is_string() || it->is_boolean()) &&
                std::find(cols.begin(), cols.end(), it.key()) == cols.end())
                cols.push_back(it.key());
    std::ofstream o(file);
    for (std::size_t i = 0; i < cols.size(); ++i) o << (i ? "," : "") << cols[i];
    o << "\n";
    for (const auto& r : recs) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) o << ",";
            if (r.contains(cols[i])) {
                const auto& v = r[cols[i]];
                o << (v.is_string() ? v.get<std::string>() : v.dump());
            }
        }
        o << "\n";
    }
}

}  // namespace

RunResult run(const ExperimentConfig& c, std::ostream& log)
{
    validate(c);
    RunResult res;
    const std::string id = experiment_id(c);
    fs::create_directories(c.out);
    res.output = c.out / (c.experiment + ".jsonl");
    bool present = false;
    if (std::ifstream in(res.output); in) {
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto j = json::parse(line, nullptr, false);
            if (!j.is_discarded() && j.value("experiment_id", "") == id) present = true;
        }
    }
    if (present && c.experiment != "zeros") {
        log << "cache hit: " << id << " already recorded in " << res.output.string() << "\n";
        res.cache_hit = true;
        return res;
    }
    std::vector<json> recs;
    if (c.experiment == "zeros") recs = run_zeros(c, log);
    else if (c.experiment == "empirical") recs = run_empirical(c, log);
    else if (c.experiment == "als") recs = run_als(c, log);
    else if (c.experiment == "predict") recs = run_predict(c, log);
    else if (c.experiment == "rmt") recs = run_rmt(c, log);
    else if (c.experiment == "verify-explicit") recs = run_verify_explicit(c, log);
    else if (c.experiment == "constants") recs = run_constants(c, log);
    else recs = run_matchup(c, log);
    for (auto& r : recs) {
        r["experiment_id"] = id;
        r["experiment"] = c.experiment;
        r["schema_version"] = c.schema_version;
    }
    res.records = recs;
    if (present) {
        log << "cache hit: " << id << " already recorded in " << res.output.string() << "\n";
        res.cache_hit = true;
        return res;
    }
    std::ofstream o(res.output, std::ios::app);
    for (const auto& r : recs) o << r.dump() << "\n";
    if (c.csv) write_csv(c.out / (id + ".csv"), recs);
    log << "wrote " << recs.size() << " records to " << res.output.string() << "\n";
    return res;
}

}  // namespace nlevel
